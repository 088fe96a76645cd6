//! Entanglement-assisted classical communication over finite-dimensional
//! quantum channels: capacities, dispersions, second-order rates, and exact
//! one-shot achievability and converse bounds.

pub mod cli;
pub mod error;
pub mod capacity;
pub mod channels;
pub mod coding;
pub mod divergences;
pub mod linalg;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
