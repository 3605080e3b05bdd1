//! Couple Binomial(d, 0.9) down to Binomial(d, 2/3) and check the coupling by sampling.
//!
//! cargo run --example majorization

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use replicable::coupling::majorization_coupling;
use replicable::stats::{binomial_pmf, chi_square_gof};

fn main() -> replicable::Result<()> {
    let d = 6;
    let x = binomial_pmf(d, 0.9);
    let y = binomial_pmf(d, 2.0 / 3.0);
    let c = majorization_coupling(&x, &y)?;
    println!("max property violation {:.2e}", c.max_violation(&x, &y));
    for i in 0..=d {
        let row: Vec<String> = c.row(i).iter().map(|p| format!("{p:.4}")).collect();
        println!("p[{i}] = [{}]", row.join(", "));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut counts = vec![0u64; d + 1];
    for _ in 0..200_000 {
        let i = (0..d).filter(|_| rng.random_bool(0.9)).count();
        counts[c.sample_row(i, &mut rng)] += 1;
    }
    let test = chi_square_gof(&counts, &y);
    println!("shrunk sizes vs Binomial({d}, 2/3): chi-square {:.2} on {} dof, p = {:.3}", test.statistic, test.dof, test.p_value);
    Ok(())
}
