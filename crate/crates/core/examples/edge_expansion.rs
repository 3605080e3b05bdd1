//! Internal edge fraction of wrap-around balls in the Cayley graph.
//!
//! cargo run --example edge_expansion

use replicable::domain::{all_hypotheses, tuple_distance_unchecked};
use replicable::spectral::{escaping_edge_count, expansion_ratio, internal_edge_count};
use replicable::HypothesisIndex;

fn main() -> replicable::Result<()> {
    let (d, k) = (3, 11);
    println!("radius,size,internal,escaping,internal_fraction");
    for radius in 0..=6 {
        let ball: Vec<HypothesisIndex> = all_hypotheses(d, k)
            .filter(|h| tuple_distance_unchecked(h.coords(), &[0, 0, 0], k) <= radius)
            .collect();
        println!(
            "{radius},{},{},{},{:.4}",
            ball.len(),
            internal_edge_count(&ball, d, k)?,
            escaping_edge_count(&ball, d, k)?,
            expansion_ratio(&ball, d, k)?
        );
    }
    Ok(())
}
