//! Desk-scale toolkit for semantic and goal-oriented communication.
//!
//! The crate is organised by concern:
//!
//! - [`language`]: message spaces, knowledge bases as meaning-class
//!   partitions, stochastic message-to-symbol mappings, enumerated sentence
//!   languages.
//! - [`measures`]: message entropy, logical probability, semantic entropy,
//!   redundancy/ambiguity decomposition and the semantic block-coding rate.
//! - [`channel`]: discrete memoryless channels, SNR to crossover mapping,
//!   block Rayleigh fading.
//! - [`codec`]: syntactic source/channel codes, the semantic MAP decoder and
//!   semantic error detection for ARQ.
//! - [`bottleneck`]: sufficient-statistic checks and the iterative
//!   information-bottleneck solver.
//! - [`edgesim`]: drift-plus-penalty edge-learning scheduler and federated
//!   averaging on quadratic losses.
//! - [`harness`]: Monte Carlo link and ARQ experiments.
//! - [`cli`]: the `semcomm` command-line runner.
//!
//! All entropies are in bits.

pub mod bottleneck;
pub mod channel;
pub mod cli;
pub mod codec;
pub mod config;
pub mod edgesim;
mod error;
pub mod harness;
pub mod language;
pub mod measures;
pub mod rng;

pub use error::{Error, Result};

/// Absolute tolerance used when validating probability vectors.
pub const PROB_TOL: f64 = 1e-12;
