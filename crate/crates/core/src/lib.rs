//! Hyperbolic two-sample tests for circular data.
//!
//! Each group is modelled as von Mises `VM(mu, kappa)`, its fitted
//! parameters are embedded in the Poincare disk as `kappa / (1 + kappa) e^{i mu}`,
//! and groups are compared through their hyperbolic distance to the radius of
//! a preferred direction. The crate is `no_std` (it needs `alloc`) and
//! carries no IO; see the `hypercirc` crate for files, the Monte Carlo
//! engine and the command line.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod circular;
mod error;
pub mod hyperbolic;
pub mod inference;
pub mod rng;
pub mod specialfn;

pub use circular::{Angle, CircularSample, CircularSummary, FitResult, VonMisesParams};
pub use error::{Degeneracy, Error, Result};
pub use hyperbolic::{DiskPoint, PreferredDirection, Projection};
pub use inference::{Method, TestConfig, TestReport};
