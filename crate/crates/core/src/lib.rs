//! Noisy two-qubit simulation of the joint Peres/Sorkin interference tests.

pub mod circuits;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod qcore;
pub mod rng;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
