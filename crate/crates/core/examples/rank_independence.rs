//! Rank deficiency of random ternary matrices over F_k and exact independence
//! of inner products.
//!
//! cargo run --example rank_independence

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use replicable::spectral::{inner_product_independence_check, low_rank_fraction_estimate};

fn main() -> replicable::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (d, r) in [(6, 3), (9, 4), (12, 6), (12, 12)] {
        let rep = low_rank_fraction_estimate(d, r, 101, 50_000, &mut rng)?;
        println!(
            "d={d} r={r}: rank <= {:.2} in {:.5} of draws (bound {:.2e}, applies: {}), ranks {:?}",
            rep.threshold, rep.fraction, rep.bound, rep.bound_applicable, rep.rank_histogram
        );
    }
    let ys = vec![vec![1, 2, 0], vec![0, 1, 1], vec![2, 0, 1]];
    println!("{:?}", inner_product_independence_check(&ys, 7)?);
    let dependent = vec![vec![1, 1, 0], vec![1, 0, 0], vec![0, 1, 0]];
    println!("{:?}", inner_product_independence_check(&dependent, 7)?);
    Ok(())
}
