//! Exact l1 and wrap-around ball counts, uniform sampling and interior mass.
//!
//! cargo run --example ball_counting

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use replicable::balls::{interior_statistics, l1_ball_count, l1_volume_bound, sample_uniform_wrap_ball, BallSpec, BallTable};
use replicable::{HypothesisIndex, Params};

fn main() -> replicable::Result<()> {
    for d in [2, 4, 8] {
        for r in [1, 5, 20] {
            println!("|B_{r}| in Z^{d} = {} (bound {})", l1_ball_count(d, r), l1_volume_bound(d, r));
        }
    }
    print!("{}", BallTable::new(BallSpec::wrapped(3, 6, 7)).to_csv());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let center = HypothesisIndex::new(vec![3, 3, 3], 7)?;
    let offset = sample_uniform_wrap_ball(&center, 4, &mut rng)?;
    println!("uniform point within distance 4 of {center}: {}", center.shifted(&offset));

    let params = Params::new(4, 1031, 0.3, 0.5, 0.1, 0)?;
    let report = interior_statistics(&params, params.radius(), 0.25, params.beta(), 100_000, &mut rng)?;
    println!(
        "interior mass {:.4} exact vs {:.4} sampled; preconditions hold: {}",
        report.within_exact, report.within_mc, report.preconditions_hold
    );
    Ok(())
}
