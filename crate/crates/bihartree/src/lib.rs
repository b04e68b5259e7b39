//! Pseudospectral simulator and diagnostic suite for a fourth-order
//! Schrödinger equation with an inhomogeneous Hartree nonlinearity,
//!
//! ```text
//! i u_t + Delta^2 u - (I_alpha * |x|^b |u|^p) |x|^b |u|^{p-2} u = 0
//! ```
//!
//! on a periodic box. The crate exposes the parameter algebra (critical
//! indices, admissible pairs, exponent systems), the split-step integrator
//! with exact linear flow, a ground-state solver, and the analysis
//! quantities used to probe scattering: conserved quantities, mass/energy
//! thresholds, the momentum-weight (virial) identity, local-mass evacuation,
//! weighted spacetime norms, and a pullback-based scattering detector.
//!
//! The numerical core is generic over the scalar type via [`real::Real`];
//! the aliases below fix the binary64 instantiation used by the CLI and the
//! on-disk formats.

pub mod error;
pub mod exponents;
pub mod fft;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod profile;
pub mod real;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod driver;
pub mod dynamics;
pub mod spectral;
pub mod timeseries;
pub mod virial;

pub use error::{Error, Result};
pub use real::Real;

/// Binary64 grid.
pub type Grid64 = grid::TorusGrid<f64>;
/// Binary64 complex field.
pub type Field64 = field::ComplexField<f64>;
/// Binary64 operator cache.
pub type Cache64 = spectral::SpectralCache<f64>;
/// Binary64 model parameters.
pub type Params64 = exponents::ModelParams<f64>;
/// Binary64 critical exponents.
pub type Exponents64 = exponents::CriticalExponents<f64>;
