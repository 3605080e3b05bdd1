//! Sweep the sample size and print the harness CSV plus an isotonic trend check.
//!
//! cargo run --example sweep_n

use replicable::harness::{run_replication, trend_check, ExperimentConfig, CSV_HEADER};

fn main() -> replicable::Result<()> {
    let config = ExperimentConfig::parse(
        "d = 4\nk = 29\nepsilon = 0.3\nrho = 0.1\ndelta = 0.1\nn = 50, 100, 200, 400, 800\ntrials = 1000\nmaster_seed = 42\n",
    )?;
    let reports = config
        .grid()?
        .iter()
        .map(|p| run_replication(p, config.trials, config.master_seed))
        .collect::<replicable::Result<Vec<_>>>()?;
    println!("{CSV_HEADER}");
    for r in &reports {
        println!("{}", r.csv_row());
    }
    let trend = trend_check(&reports, 2.0);
    eprintln!("non-increasing within 2 CI widths: {} (worst {:.2})", trend.holds, trend.worst);
    Ok(())
}
