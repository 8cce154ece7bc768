use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{SimConfig, StepperKind, TimeStep};
use super::diagnostics::{DiagEntry, Diagnostics};
use super::duhamel::{DuhamelReport, Trajectory};
use super::model::Model;
use super::stepper::Stepper;
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, Species};
use crate::spectral::SpectralState;

// Stability radii of classical RK4 on the imaginary and negative real axes.
const RK4_IMAG: f64 = 2.8;
const RK4_REAL: f64 = 2.78;
/// Largest step used when only the nonlinear terms limit it.
const MAX_DT: f64 = 1.0 / 8.0;

/// Step size for a CFL target, from the initial state.
pub fn cfl_dt(model: &Model, state: &SpectralState, kind: StepperKind, target: f64) -> f64 {
    let grid = &model.grid;
    let p = &model.params;
    let k_max = grid.dk() * grid.dealias_cutoff() as f64 * 3f64.sqrt();
    let mut u_max = 0.0f64;
    for s in Species::BOTH {
        let rho_bar = p.equilibrium_density(s);
        let m: Vec<&[num_complex::Complex64]> = state.momentum(s).to_vec();
        for f in model.physical(&m) {
            for v in f {
                u_max = u_max.max(v.abs() / (0.5 * rho_bar));
            }
        }
    }
    let mut dt = MAX_DT;
    if u_max > 0.0 {
        dt = dt.min(RK4_IMAG / (k_max * u_max));
    }
    if kind == StepperKind::Rk4 {
        let c = Species::BOTH
            .iter()
            .map(|&s| p.p_prime(s).sqrt())
            .fold(0.0, f64::max);
        let damping = Species::BOTH
            .iter()
            .map(|&s| p.longitudinal_damping(s))
            .fold(0.0, f64::max);
        dt = dt
            .min(RK4_IMAG / (k_max * (c + u_max) + p.sqrt_1pz()))
            .min(RK4_REAL / (damping * k_max * k_max));
    }
    target * dt
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSummary {
    pub t: f64,
    pub steps: u64,
    pub dt: f64,
    pub wall_seconds: f64,
    /// Largest relative change of either total mass over the run.
    pub mass_drift: f64,
    pub max_neutrality: f64,
    pub duhamel: Option<DuhamelReport>,
}

/// A run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub model: Model,
    pub stepper: Stepper,
    pub state: SpectralState,
    pub t: f64,
    pub step: u64,
    pub dt: f64,
    pub n_steps: u64,
    pub diagnostics: Diagnostics,
    pub trajectory: Option<Trajectory>,
}

impl Simulation {
    pub fn new(params: PhysicalParams, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let state = config.initial.build(&grid)?;
        Self::with_state(params, config, state)
    }

    pub fn with_state(params: PhysicalParams, config: SimConfig, mut state: SpectralState) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        if state.n != grid.n || state.box_len != grid.box_len {
            return Err(Error::Config("initial state does not match the grid".into()));
        }
        let model = Model::new(params, grid, config.form, config.dealias, config.nonlinear)?;
        model.dealias(&mut state);
        let dt_target = match config.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) => cfl_dt(&model, &state, config.stepper, c),
        };
        let n_steps = if config.t_final == 0.0 {
            0
        } else {
            (config.t_final / dt_target - 1e-9).ceil().max(1.0) as u64
        };
        let dt = if n_steps == 0 { dt_target } else { config.t_final / n_steps as f64 };
        let trajectory = if config.trajectory.enabled {
            Some(Trajectory::new(&model, config.trajectory.max_shell)?)
        } else {
            None
        };
        Ok(Simulation {
            stepper: Stepper::new(config.stepper),
            diagnostics: Diagnostics::new(&config),
            config,
            model,
            state,
            t: 0.0,
            step: 0,
            dt,
            n_steps,
            trajectory,
        })
    }

    fn sampling_now(&self) -> bool {
        self.trajectory.is_some() && self.step % self.config.trajectory.every as u64 == 0
    }

    /// One time step, recording the trajectory and diagnostics on cadence.
    pub fn advance(&mut self) -> Result<()> {
        let n0 = self.model.nonlinear(&self.state)?;
        if self.sampling_now() {
            if let Some(tr) = self.trajectory.as_mut() {
                tr.record(&self.model, &self.state, &n0, self.t);
            }
        }
        self.state = self.stepper.step(&self.model, &self.state, self.dt, self.t, Some(n0))?;
        self.step += 1;
        self.t = self.step as f64 * self.dt;
        if self.step % self.config.diag_every as u64 == 0 || self.step == self.n_steps {
            self.diagnostics.record(&self.model, &self.state, self.t, self.step)?;
        }
        Ok(())
    }

    /// Run to the final time. `on_step` sees the simulation after every step.
    pub fn run(&mut self, mut on_step: impl FnMut(&Simulation) -> Result<()>) -> Result<SimSummary> {
        let start = Instant::now();
        if self.diagnostics.entries.is_empty() {
            self.diagnostics.record(&self.model, &self.state, self.t, self.step)?;
            on_step(self)?;
        }
        while self.step < self.n_steps {
            self.advance()?;
            on_step(self)?;
        }
        let duhamel = if self.sampling_now() {
            let n = self.model.nonlinear(&self.state)?;
            let tr = self.trajectory.as_mut().expect("sampling implies a trajectory");
            if tr.times.last() != Some(&self.t) {
                tr.record(&self.model, &self.state, &n, self.t);
            }
            Some(tr.residual(&self.model)?)
        } else {
            None
        };
        Ok(self.summary(start.elapsed().as_secs_f64(), duhamel))
    }

    fn summary(&self, wall_seconds: f64, duhamel: Option<DuhamelReport>) -> SimSummary {
        let e = &self.diagnostics.entries;
        let (m1, m2) = (e[0].mass1, e[0].mass2);
        let mass_drift = e
            .iter()
            .map(|d| ((d.mass1 - m1) / m1).abs().max(((d.mass2 - m2) / m2).abs()))
            .fold(0.0, f64::max);
        let max_neutrality = e.iter().map(|d| d.neutrality).fold(0.0, f64::max);
        SimSummary {
            t: self.t,
            steps: self.step,
            dt: self.dt,
            wall_seconds,
            mass_drift,
            max_neutrality,
            duhamel,
        }
    }

    pub fn entries(&self) -> &[DiagEntry] {
        &self.diagnostics.entries
    }
}
