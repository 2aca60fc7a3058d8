//! Desk-scale simulation of a driven-dissipative Ising spin glass realized in
//! a degenerate multimode (M/N) optical cavity.
//!
//! The crate is organized along the data flow of an experiment:
//!
//! - [`optics`]: Mehler kernels, η-family Green's functions, fractional
//!   Fourier transforms and the cavity symmetry filter.
//! - [`coupling`]: spin positions, atomic densities and the coupling matrix J.
//! - [`dynamics`]: pump schedules and replica generation.
//! - [`imaging`]: synthesis of emitted-field images and spin recovery by fitting.
//! - [`analysis`]: overlaps, Parisi function, ultrametricity, entropy.
//! - [`randmat`]: random-matrix diagnostics of J ensembles.
//! - [`io`]: CSV/JSON persistence shared by the command-line driver.

pub mod analysis;
pub mod coupling;
pub mod dynamics;
pub mod error;
mod gaussint;
pub mod imaging;
pub mod io;
pub mod optics;
pub mod randmat;
mod optim;
mod rng;

pub use error::{Error, Result};

/// Two-component real vector used for transverse positions.
pub type Vec2 = [f64; 2];
