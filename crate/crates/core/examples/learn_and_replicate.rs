//! Learn a random target once, then estimate replicability at the same point.
//!
//! cargo run --example learn_and_replicate

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use replicable::domain::{exact_error, sample_training_set};
use replicable::harness::run_replication;
use replicable::learner::{estimate_transitions, Learner};
use replicable::{HypothesisIndex, Params, SharedKey};

fn main() -> replicable::Result<()> {
    let params = Params::new(4, 29, 0.3, 0.1, 0.1, 200)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let target = HypothesisIndex::random(params.d(), params.k(), &mut rng);
    let key = SharedKey::random(&mut rng);
    let learner = Learner::new(&params)?;
    println!("radius {}, acceptance ball of {} hypotheses", learner.radius(), learner.ball_size());

    for run in 0..2 {
        let sample = sample_training_set(&params, &target, &mut rng);
        let center = estimate_transitions(&sample, &params)?;
        let out = learner.select(&center, &key);
        println!("run {run}: target {target}, center {center}, output {out}, error {:.4}", exact_error(&target, &out)?);
    }

    let report = run_replication(&params, 2000, 7)?;
    println!(
        "rho_hat {:.4} (95% CI {:.4}..{:.4}), runs above epsilon {:.4}, mean error {:.4}",
        report.rho_hat, report.rho_ci.0, report.rho_ci.1, report.error_rate, report.mean_error
    );
    Ok(())
}
