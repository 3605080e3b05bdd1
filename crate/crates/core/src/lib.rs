//! Replicable PAC learning on the wrap-around interval class over `[d] × Z_k`,
//! together with the combinatorial machinery used to study its sample
//! complexity.
//!
//! | Module | What it provides |
//! |--------|------------------|
//! | [`domain`] | Parameters, hypotheses `h_i`, the wrap-around metric, exact errors, sampling |
//! | [`prf`] | The keyed priority function that realizes the shared random shuffle |
//! | [`learner`] | Transition estimation, acceptance balls, the replicable learner, exact modes |
//! | [`spectral`] | Cayley graph on `Z_k^d`: spectrum, edge counts, tail indicators, ranks over `F_k` |
//! | [`coupling`] | Majorization coupling and the label-preserving random step |
//! | [`balls`] | Exact counting and uniform sampling of (wrap-around) ℓ1 balls |
//! | [`harness`] | Monte Carlo replicability experiments, sweeps and CSV output |
//! | [`stats`] | Wilson intervals, chi-square tests, TV distance, isotonic fits |
//! | [`cli`] | The `replicable` command line front end |
//!
//! Everything that consumes randomness takes an explicit RNG; nothing reads
//! global state.

pub mod balls;
pub mod cli;
pub mod coupling;
pub mod domain;
pub mod error;
pub mod harness;
pub mod learner;
pub mod prf;
pub mod spectral;
pub mod stats;

pub use domain::{HypothesisIndex, LabeledSample, Labeling, Params, Point};
pub use error::{Error, Result};
pub use learner::{replicable_learn, SharedKey};
