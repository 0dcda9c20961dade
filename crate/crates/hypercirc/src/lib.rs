//! File formats, the analysis pipeline, the Monte Carlo engine and worker
//! pools on top of [`hypercirc_core`].

pub mod error;
pub mod io;
pub mod montecarlo;
pub mod parallel;
pub mod pipeline;

pub use error::{Error, Result};
pub use hypercirc_core as core;
