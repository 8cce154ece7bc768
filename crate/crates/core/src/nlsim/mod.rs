//! Pseudospectral solver for the nonlinear perturbation system on a periodic box.
//!
//! A periodic box has a discrete spectrum, so every nonzero mode decays
//! exponentially; whole-space algebraic rates are out of reach here. The
//! solver is used for stability, conservation and consistency with the
//! linear semigroup through the Duhamel formula.

mod config;
mod diagnostics;
mod duhamel;
mod model;
mod run;
mod stepper;

pub use config::{Dealias, Form, InitialSpec, ModeSpec, SimConfig, StepperKind, TimeStep, TrajectorySpec};
pub use diagnostics::{DiagEntry, Diagnostics, NormSet};
pub use duhamel::{DuhamelReport, Trajectory, CADENCE_WARNING, MIN_SAMPLES_PER_UNIT};
pub use model::{momentum_to_velocity, velocity_to_momentum, Model, ShellOp};
pub use run::{cfl_dt, SimSummary, Simulation};
pub use stepper::{Stepper, MAX_STEP_GROWTH};
