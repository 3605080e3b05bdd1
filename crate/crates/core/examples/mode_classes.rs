//! Exact output distributions and mode classes at micro scale.
//!
//! cargo run --example mode_classes

use replicable::learner::build_mode_classes;
use replicable::{Params, SharedKey};

fn main() -> replicable::Result<()> {
    let params = Params::new(2, 3, 0.3, 0.1, 0.1, 2)?;
    let report = build_mode_classes(&params, &SharedKey(2024))?;
    for e in &report.entries {
        println!(
            "target {} -> mode {} with probability {}/{} (error {:.3})",
            e.target, e.mode, e.mode_count, e.total, e.mode_error
        );
    }
    for (f, members) in &report.classes {
        let names: Vec<String> = members.iter().map(ToString::to_string).collect();
        println!("class {}: {}", f.to_bit_string(), names.join(" "));
    }
    println!("partition of retained hypotheses: {}", report.is_partition(&params));
    Ok(())
}
