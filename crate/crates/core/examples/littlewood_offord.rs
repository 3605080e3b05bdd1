//! Littlewood-Offord point probabilities against their bound.
//!
//! cargo run --example littlewood_offord

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replicable::spectral::littlewood_offord_estimate;

fn main() -> replicable::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = 101;
    for s in [1, 4, 8, 12, 16, 64, 256] {
        let x: Vec<u32> = (0..s).map(|_| rng.random_range(1..k)).collect();
        let r = littlewood_offord_estimate(&x, 0, k, 200_000, &mut rng)?;
        println!(
            "s={s:3} {}: Pr = {:.5} (sigma {:.5}), bound {:.4}, within: {}",
            if r.exact { "exact" } else { "mc   " },
            r.estimate,
            r.sigma,
            r.bound,
            r.within_bound
        );
    }
    Ok(())
}
