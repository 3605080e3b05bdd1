//! Analytic spectrum of the Cayley graph on Z_k^d against a dense solver.
//!
//! cargo run --example cayley_spectrum -- 2 5

use replicable::spectral::{analytic_eigenvalue, eigen_check};

fn main() -> replicable::Result<()> {
    let args: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (d, k) = match args.as_slice() {
        [d, k] => (*d as usize, *k),
        _ => (2, 5),
    };
    let r = eigen_check(d, k)?;
    println!("d={d} k={k}: {} eigenvalues, degree {}", r.eigenvalues.len(), r.generator_count);
    println!("max |analytic - dense| = {:.3e}, trace = {:.6}", r.max_deviation, r.trace);
    if let Some(g) = r.gram_deviation {
        println!("characters orthonormal to {g:.3e}, eigenvector residual {:.3e}", r.eigenvector_residual.unwrap_or(0.0));
    }
    let mut e1 = vec![0; d];
    e1[0] = 1;
    println!("lambda at e_1 = {:.6}", analytic_eigenvalue(&e1, d, k));
    for (lo, hi, c) in r.histogram.iter().filter(|b| b.2 > 0) {
        println!("[{lo:8.3}, {hi:8.3}) {c}");
    }
    Ok(())
}
