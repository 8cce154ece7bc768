use super::config::StepperKind;
use super::model::{Model, ShellOp};
use crate::error::{Error, Result};
use crate::spectral::SpectralState;

/// A single step may not grow the state norm by more than this factor.
pub const MAX_STEP_GROWTH: f64 = 10.0;

// ARS(4,4,3) tableaux, stage 0 explicit.
const ARS_IMPLICIT: [[f64; 5]; 5] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0, 0.0],
    [0.0, 1.0 / 6.0, 0.5, 0.0, 0.0],
    [0.0, -0.5, 0.5, 0.5, 0.0],
    [0.0, 1.5, -1.5, 0.5, 0.5],
];
const ARS_EXPLICIT: [[f64; 4]; 5] = [
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [11.0 / 18.0, 1.0 / 18.0, 0.0, 0.0],
    [5.0 / 6.0, -5.0 / 6.0, 0.5, 0.0],
    [0.25, 1.75, 0.75, -1.75],
];
const ARS_GAMMA: f64 = 0.5;

/// Time integrator with per-step operator caches.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub kind: StepperKind,
    cached_dt: f64,
    half: Vec<ShellOp>,
    full: Vec<ShellOp>,
    resolvent: Vec<ShellOp>,
}

impl Stepper {
    pub fn new(kind: StepperKind) -> Self {
        Stepper {
            kind,
            cached_dt: f64::NAN,
            half: Vec::new(),
            full: Vec::new(),
            resolvent: Vec::new(),
        }
    }

    fn prepare(&mut self, model: &Model, dt: f64) -> Result<()> {
        if self.cached_dt == dt {
            return Ok(());
        }
        match self.kind {
            StepperKind::Rk4 => {}
            StepperKind::Lawson => {
                self.half = model.exp_ops(0.5 * dt)?;
                self.full = model.exp_ops(dt)?;
            }
            StepperKind::Imex => {
                self.resolvent = model.resolvent_ops(ARS_GAMMA * dt)?;
            }
        }
        self.cached_dt = dt;
        Ok(())
    }

    /// Advance by `dt`. `n0` may carry the nonlinear terms at `state`.
    pub fn step(
        &mut self,
        model: &Model,
        state: &SpectralState,
        dt: f64,
        t: f64,
        n0: Option<SpectralState>,
    ) -> Result<SpectralState> {
        if dt == 0.0 {
            return Ok(state.clone());
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step {dt} must be positive")));
        }
        self.prepare(model, dt)?;
        let n0 = match n0 {
            Some(n) => n,
            None => model.nonlinear(state)?,
        };
        let next = match self.kind {
            StepperKind::Rk4 => rk4(model, state, dt, n0)?,
            StepperKind::Lawson => self.lawson(model, state, dt, n0)?,
            StepperKind::Imex => self.imex(model, state, dt, n0)?,
        };
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("state after step at t = {t}")));
        }
        let before = state.l2_norm();
        let after = next.l2_norm();
        if before > 0.0 && after > MAX_STEP_GROWTH * before {
            return Err(Error::Unstable {
                t: t + dt,
                growth: after / before,
            });
        }
        Ok(next)
    }

    fn lawson(&self, model: &Model, u: &SpectralState, h: f64, n0: SpectralState) -> Result<SpectralState> {
        let e_half = |s: &SpectralState| model.apply_ops(&self.half, s);
        let e_full = |s: &SpectralState| model.apply_ops(&self.full, s);
        let eu_half = e_half(u);
        let mut y2 = u.clone();
        y2.axpy(0.5 * h, &n0);
        let y2 = e_half(&y2);
        let n2 = model.nonlinear(&y2)?;
        let mut y3 = eu_half.clone();
        y3.axpy(0.5 * h, &n2);
        let n3 = model.nonlinear(&y3)?;
        let mut y4 = e_full(u);
        y4.axpy(h, &e_half(&n3));
        let n4 = model.nonlinear(&y4)?;
        let mut mid = n2;
        mid.axpy(1.0, &n3);
        let mut out = e_full(u);
        out.axpy(h / 6.0, &e_full(&n0));
        out.axpy(h / 3.0, &e_half(&mid));
        out.axpy(h / 6.0, &n4);
        Ok(out)
    }

    fn imex(&self, model: &Model, u: &SpectralState, h: f64, n0: SpectralState) -> Result<SpectralState> {
        let mut lin: Vec<SpectralState> = Vec::with_capacity(5);
        let mut non: Vec<SpectralState> = Vec::with_capacity(4);
        lin.push(model.linear(u));
        non.push(n0);
        let mut y = u.clone();
        for i in 1..5 {
            let mut rhs = u.clone();
            for j in 0..i {
                let a = ARS_IMPLICIT[i][j];
                if a != 0.0 {
                    rhs.axpy(h * a, &lin[j]);
                }
                let b = ARS_EXPLICIT[i][j];
                if b != 0.0 {
                    rhs.axpy(h * b, &non[j]);
                }
            }
            y = model.apply_ops(&self.resolvent, &rhs);
            if i < 4 {
                // L y = (y − rhs)/(γh)
                let mut ly = y.clone();
                ly.axpy(-1.0, &rhs);
                ly.scale(1.0 / (ARS_GAMMA * h));
                lin.push(ly);
                non.push(model.nonlinear(&y)?);
            }
        }
        Ok(y)
    }
}

fn rk4(model: &Model, u: &SpectralState, h: f64, n0: SpectralState) -> Result<SpectralState> {
    let mut k1 = n0;
    k1.axpy(1.0, &model.linear(u));
    let stage = |a: f64, k: &SpectralState| {
        let mut y = u.clone();
        y.axpy(a, k);
        y
    };
    let k2 = model.rhs(&stage(0.5 * h, &k1))?;
    let k3 = model.rhs(&stage(0.5 * h, &k2))?;
    let k4 = model.rhs(&stage(h, &k3))?;
    let mut out = u.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    Ok(out)
}
