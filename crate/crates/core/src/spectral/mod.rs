//! Fourier-space representations: periodic grids and radial whole-space
//! profiles, with the Helmholtz split, Poisson solve and Sobolev norms.

mod cutoff;
mod grid;
mod ops;
mod radial;
pub mod snapshot;
mod state;

pub use cutoff::{smoothstep, CutoffSpec, Transition};
pub use grid::{symmetrize, SpectralGrid};
pub use ops::{
    freq_split, helmholtz_mode, helmholtz_reconstruct, helmholtz_split, poisson_gradient,
    reconstruct_mode, sobolev_norm, sobolev_norm_joint, NEUTRALITY_TOL,
};
pub use radial::{joint_sobolev_norm, RadialGrid, RadialProfile};
pub use state::{m_slot, rho_slot, SpectralState, FIELD_NAMES};
