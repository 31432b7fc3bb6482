//! Locally adaptive channel access for Poisson bipolar networks.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`geometry`] samples bipolar networks and answers stopping-set queries,
//! - [`policy`] solves the per-transmitter access fixed point,
//! - [`simulator`] runs the slotted interacting-queue network and tracks AoI,
//! - [`numerics`] holds root finding, quadrature and Fourier inversion kernels,
//! - [`analysis`] evaluates the access-probability law, the conditional success
//!   CDF and the peak AoI expressions.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod params;
pub mod policy;
pub mod simulator;

pub use error::{Error, Result};
pub use params::SystemParams;
