//! Linearized Fourier-symbol analysis and pseudospectral simulation of the
//! bipolar compressible Navier–Stokes–Poisson system.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] physical constants and pressure laws,
//! * [`symbol`] the 4×4 symbol, its spectrum, projectors and semigroup,
//! * [`spectral`] periodic grids, radial profiles, Helmholtz split, Poisson solve,
//! * [`linlab`] exact linear evolution of radial whole-space data,
//! * [`nlsim`] the nonlinear periodic-box solver,
//! * [`analysis`] power-law fits and verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod linlab;
pub mod nlsim;
pub mod params;
pub mod quadrature;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{ExpansionConstants, PhysicalParams, Species};
pub use spectral::{RadialProfile, SpectralGrid, SpectralState};
pub use symbol::{EigenSystem, QuarticCoeffs, SymbolMatrix};
