//! Assess the accuracy of a probabilistic record-linkage method by Monte
//! Carlo simulation of the agreement matrix.
//!
//! Two aligned files are compared variable by variable into a 3-D agreement
//! matrix (similarity weights in extended mode, exact-match codes in
//! original mode). A Markov chain perturbs the matrix while preserving the
//! per-variable match/non-match agreement marginals; every thinned sample is
//! re-linked with a greedy Fellegi-Sunter linker and the correct re-link
//! proportion is reported per record and per simulation.
//!
//! Pipeline stages map onto the modules below:
//!
//! * [`datamodel`] — record tables, aligned pairs, the agreement matrix
//! * [`comparison`] — similarity weights, thresholds, blocking
//! * [`estimation`] — m/u/g probabilities and chain transition parameters
//! * [`simulator`] — the transition kernel, thinned sampling, distances
//! * [`linker`] — field weights, composite weights, greedy 1-1 linking
//! * [`assessment`] — observed vs simulated links, accuracy reports
//! * [`synthgen`] — synthetic population generator with a perturbation plan
//! * [`config`] / [`pipeline`] — TOML run configuration and the end-to-end
//!   orchestration used by the `macsim` binary
//!
//! Blocks are processed in parallel with rayon when the `parallel` feature
//! (on by default) is enabled; results are bitwise identical either way
//! because every block derives its own RNG stream from the master seed.

pub mod assessment;
pub mod comparison;
pub mod config;
pub mod datamodel;
mod error;
pub mod estimation;
pub mod exec;
pub mod linker;
pub mod pipeline;
pub mod simulator;
pub mod synthgen;

pub use error::{Error, Result};
