use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{CutoffSpec, SpectralGrid, SpectralState, FIELD_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepperKind {
    /// Classical explicit RK4 on the full right-hand side.
    Rk4,
    /// ARS(4,4,3): linear block implicit, nonlinear terms explicit.
    Imex,
    /// Integrating-factor RK4; the linear block is propagated exactly.
    Lawson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dealias {
    TwoThirds,
    /// Only the Nyquist planes are removed.
    None,
}

/// Unknowns carried by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    /// (ϱ₁, m₁, ϱ₂, m₂)
    Momentum,
    /// (ϱ₁, u₁, ϱ₂, u₂) with uᵢ = mᵢ/ρᵢ, stored in the momentum slots.
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum TimeStep {
    Fixed(f64),
    /// Fraction of the largest stable explicit step, fixed from the initial state.
    Cfl(f64),
}

/// One Fourier coefficient of the initial data; its conjugate is set at −k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub field: String,
    pub mode: [i64; 3],
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSpec {
    /// Multiplies every coefficient.
    pub amplitude: f64,
    pub modes: Vec<ModeSpec>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        let m = |field: &str, mode: [i64; 3], re: f64, im: f64| ModeSpec {
            field: field.into(),
            mode,
            coeff: [re, im],
        };
        InitialSpec {
            amplitude: 1e-3,
            modes: vec![
                m("rho1", [1, 0, 0], 0.5, 0.0),
                m("rho1", [1, 1, 1], 0.2, 0.0),
                m("rho2", [0, 1, 0], 0.4, 0.1),
                m("m1x", [0, 0, 1], 0.3, 0.0),
                m("m1y", [0, 1, 0], 0.2, -0.1),
                m("m2z", [1, 1, 0], 0.25, 0.0),
                m("m2x", [1, 0, 1], 0.1, 0.2),
            ],
        }
    }
}

impl InitialSpec {
    /// Coefficients placed on `grid`; the zero mode is left untouched so the
    /// data is neutral.
    pub fn build(&self, grid: &SpectralGrid) -> Result<SpectralState> {
        let mut s = SpectralState::zeros(grid);
        let c = grid.dealias_cutoff();
        let n = grid.n as i64;
        for spec in &self.modes {
            let slot = FIELD_NAMES
                .iter()
                .position(|f| *f == spec.field)
                .ok_or_else(|| Error::Config(format!("unknown field `{}`", spec.field)))?;
            if spec.mode == [0, 0, 0] {
                return Err(Error::Config("initial data may not set the zero mode".into()));
            }
            if spec.mode.iter().any(|m| m.abs() > c) {
                return Err(Error::Config(format!(
                    "mode {:?} lies outside the dealiased band |k_i| <= {c}",
                    spec.mode
                )));
            }
            let wrap = |m: i64| m.rem_euclid(n) as usize;
            let idx = grid.index(wrap(spec.mode[0]), wrap(spec.mode[1]), wrap(spec.mode[2]));
            let v = Complex64::new(spec.coeff[0], spec.coeff[1]) * self.amplitude;
            s.fields[slot][idx] += v;
            let j = grid.conj_index(idx);
            s.fields[slot][j] += v.conj();
        }
        Ok(s)
    }
}

/// Where the Duhamel trajectory is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectorySpec {
    pub enabled: bool,
    /// Steps between samples.
    pub every: usize,
    /// Modes with |m|² up to this value (grid units) are kept.
    pub max_shell: i64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec {
            enabled: false,
            every: 1,
            max_shell: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n: usize,
    pub box_len: f64,
    pub t_final: f64,
    pub dt: TimeStep,
    pub stepper: StepperKind,
    pub dealias: Dealias,
    pub form: Form,
    /// Nonlinear terms off gives the linearized system.
    pub nonlinear: bool,
    /// Steps between diagnostics rows.
    pub diag_every: usize,
    /// Steps between field snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Highest derivative order in the norm diagnostics.
    pub diag_order: u32,
    /// Lebesgue exponent in the time weights of M(t).
    pub weight_p: f64,
    /// Low/high frequency split used by L(t).
    pub cutoff: CutoffSpec,
    pub initial: InitialSpec,
    pub trajectory: TrajectorySpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 64,
            box_len: 8.0 * std::f64::consts::PI,
            t_final: 10.0,
            dt: TimeStep::Fixed(1.0 / 32.0),
            stepper: StepperKind::Imex,
            dealias: Dealias::TwoThirds,
            form: Form::Momentum,
            nonlinear: true,
            diag_every: 8,
            snapshot_every: 0,
            diag_order: 2,
            weight_p: 1.0,
            cutoff: CutoffSpec::default(),
            initial: InitialSpec::default(),
            trajectory: TrajectorySpec::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!("n = {} must be a power of two >= 4", self.n)));
        }
        if !(self.box_len > 0.0 && self.box_len.is_finite()) {
            return Err(Error::Config(format!("box_len = {} must be positive", self.box_len)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final = {} must be nonnegative", self.t_final)));
        }
        match self.dt {
            TimeStep::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(Error::Config(format!("dt = {dt} must be positive")));
            }
            TimeStep::Cfl(c) if !(c > 0.0 && c <= 1.0) => {
                return Err(Error::Config(format!("CFL target {c} must lie in (0, 1]")));
            }
            _ => {}
        }
        if self.diag_every == 0 {
            return Err(Error::Config("diag_every must be at least 1".into()));
        }
        if self.diag_order == 0 {
            return Err(Error::Config("diag_order must be at least 1".into()));
        }
        if !(1.0..=1.5).contains(&self.weight_p) {
            return Err(Error::Config(format!("weight_p = {} must lie in [1, 3/2]", self.weight_p)));
        }
        if self.trajectory.enabled && self.trajectory.every == 0 {
            return Err(Error::Config("trajectory.every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.n, self.box_len)
    }
}
