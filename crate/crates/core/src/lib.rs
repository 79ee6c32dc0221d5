//! Source location and rooted network augmentation.
//!
//! Evaluates `(p, q)`-connectivity with node-capacitated flows, maps source
//! location instances onto rooted augmentation instances and back, and runs
//! three approximation algorithms (greedy submodular cover, sequential
//! biset-transversal augmentation, and two-phase double cover) next to
//! brute-force oracles that certify feasibility and ratios on small inputs.

pub mod biset;
pub mod bisetcover;
pub mod bounds;
pub mod error;
pub mod flow;
pub mod format;
pub mod gen;
pub mod graph;
pub mod instance;
pub mod numeric;
pub mod oracle;
pub mod reductions;
pub mod report;
pub mod submodular;

pub use error::{Error, Infeasibility};
