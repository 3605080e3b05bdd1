//! Label-preserving random steps and their distributional checks.
//!
//! cargo run --example random_step

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use replicable::coupling::{random_step, regime_holds, verify_step_distribution, StepPlan};
use replicable::domain::sample_training_set;
use replicable::{HypothesisIndex, Params};

fn main() -> replicable::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = Params::new(3, 101, 0.3, 0.1, 0.1, 5)?;
    let plan = StepPlan::estimate(&params, 100_000, &mut rng)?;
    println!("law of |P|: {:?}", plan.size_law());

    let u = HypothesisIndex::random(3, 101, &mut rng);
    let s = sample_training_set(&params, &u, &mut rng);
    let step = random_step(&u, &s, &plan, &mut rng)?;
    println!("u {} -> v {} via {:?} (P = {:?}, kept {:?})", step.u, step.v, step.direction, step.candidate_set, step.kept);

    let r = verify_step_distribution(&params, 500_000, &mut rng)?;
    print!("{}", r.to_csv());

    let small = Params::new(3, 11, 0.3, 0.1, 0.1, 20)?;
    println!("k=11, n=20: regime condition holds: {}", regime_holds(3, 11, 20));
    match StepPlan::estimate(&small, 100_000, &mut rng) {
        Ok(_) => println!("dominance holds"),
        Err(e) => println!("{e}"),
    }
    Ok(())
}
