//! Resolvability and strong-secrecy rate regions of the two-user cribbing
//! multiple-access channel, plus exact simulation of the random codes that
//! achieve them on small alphabets.
//!
//! Layout, bottom-up:
//!
//! - [`prob`]: probability vectors, kernels, joint tables, KL / variational
//!   distance / mutual information, strong typicality.
//! - [`model`]: channels, input laws, cribbing scenarios.
//! - [`region`]: threshold systems per law and scenario, union search,
//!   convexity and Fourier–Motzkin checks.
//! - [`resolvability`]: single-block random codebooks and exact output
//!   divergence.
//! - [`block_markov`]: the strictly-causal block-Markov code and Shannon
//!   strategies for causal cribbing.
//! - [`secrecy`]: wiretap codes, exact leakage and error probability.
//! - [`harness`]: config-driven runs behind the `cribmac` binary.

pub mod block_markov;
pub mod error;
pub mod harness;
pub mod model;
pub mod prob;
pub mod region;
pub mod resolvability;
pub mod sampling;
pub mod secrecy;

pub use error::{Error, Result};
pub use model::{CribbingScenario, InputLaw, MacChannel, TargetOutput, WiretapMac};
pub use prob::{JointTable, Kernel, ProbVector};
pub use region::{RatePoint, RegionSpec};
