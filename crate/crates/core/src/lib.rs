//! Boolean satisfiability on quantum-annealing style hardware, classically.
//!
//! The crate reduces k-SAT formulas to QUBOs (Choi's MIS encoding, its
//! loosened variant and the backbone encoding), solves them with an
//! exhaustive solver or simulated annealing, minor-embeds them into Chimera
//! hardware graphs and runs phase-transition benchmarks over random 3-SAT.

pub mod bench;
pub mod cnf;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod qubo;
pub mod reduction;
pub mod sampler;

pub use error::{Error, Result};
