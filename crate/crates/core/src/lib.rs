//! Bidirectional teleportation benchmarks: simulation errors of the swap
//! channel under PPT-preserving simulation, closed-form evaluators, and
//! end-to-end channel reconstruction.

pub mod analytic;
pub mod channels;
pub mod cli;
pub mod error;
pub mod json;
pub mod qcore;
pub mod resources;
pub mod sdp;
pub mod verify;

pub use error::{Error, Result};
