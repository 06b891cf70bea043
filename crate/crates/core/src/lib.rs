//! Near-field ambiguity functions of sampled antenna arrays and the
//! aliasing-free regions they induce.
//!
//! Lengths are in the units of [`PhysicalConfig::wavelength`]; with
//! [`PhysicalConfig::normalized`] everything is measured in wavelengths and
//! `k_c = 2π`.
//!
//! * [`geometry`]: array curves, uniform antenna grids.
//! * [`field`]: energies, steering signals, matched signal.
//! * [`ambiguity`]: continuous and discrete ambiguity functions.
//! * [`spectral`]: matched spectrum, Poisson decomposition, numerical band limit.
//! * [`closedform`]: ULA and UCA band limits, the ULA eye.
//! * [`afr`]: AFR contours, operating-domain checks, safe spacing.

pub mod afr;
pub mod ambiguity;
pub mod closedform;
pub mod error;
pub mod field;
pub mod geometry;
pub mod io;
pub mod spectral;

mod optimize;
mod quadrature;

pub use error::{Error, Result};
pub use field::{energy, steering, MatchedSignalContext};
pub use geometry::{
    half_wavelength_check, sample_grid, Alignment, CustomCurve, ParametricCurve, ParametricGrid,
    PhysicalConfig, PiecewisePolynomial, Vec2,
};
pub use num_complex::Complex64;
