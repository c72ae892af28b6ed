//! Sequence-length reliability toolkit: deterministic benchmark tasks with
//! oracles, response scoring and SAR curves, scaling-law fits, a
//! spin-glass token-error model and divide-and-conquer planning.

pub mod cli;
pub mod dnc;
pub mod error;
pub mod pauli;
pub mod rng;
pub mod scaling;
pub mod scoring;
pub mod sk;
pub mod tasks;

pub use error::{Error, Result};
