//! Attribute-leakage auditing for learned embeddings.
//!
//! Given an `n x m` feature matrix and a paired per-sample attribute (a
//! binary label or a continuous quantity), this crate estimates how much
//! information the features carry about the attribute: a neural critic is
//! trained to maximize the Donsker-Varadhan lower bound on mutual
//! information, the procedure is repeated from independent initializations,
//! and the averaged estimate in nats is reported as the attribute's
//! "expressivity" in the embedding. Synthetic generators with closed-form
//! mutual information calibrate the estimator end to end.

pub mod audit;
pub mod cli;
pub mod data;
pub mod error;
pub mod expressivity;
pub mod mine;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
