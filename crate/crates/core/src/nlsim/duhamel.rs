use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::Form;
use super::model::Model;
use crate::error::{Error, Result};
use crate::spectral::SpectralState;

type CVec4 = Vector4<Complex64>;

/// Trapezoid samples per unit time below which the quadrature is refused.
pub const MIN_SAMPLES_PER_UNIT: f64 = 8.0;
/// Relative change under cadence halving that triggers the coarse-cadence warning.
pub const CADENCE_WARNING: f64 = 0.2;

/// Compressible parts of the state and of the nonlinear forcing on a set of
/// low modes, sampled at a uniform cadence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub modes: Vec<usize>,
    pub shells: Vec<i64>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<CVec4>>,
    pub forcing: Vec<Vec<CVec4>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub t: f64,
    pub cadence: f64,
    pub samples: usize,
    pub modes: usize,
    pub residual: f64,
    /// Residual from every other sample, if the sample count allows it.
    pub residual_coarse: Option<f64>,
    pub cadence_warning: bool,
}

impl DuhamelReport {
    /// residual_coarse / residual.
    pub fn halving_ratio(&self) -> Option<f64> {
        self.residual_coarse.map(|c| c / self.residual)
    }
}

impl Trajectory {
    /// Nonzero retained modes with |m|² ≤ `max_shell`.
    pub fn new(model: &Model, max_shell: i64) -> Result<Self> {
        if model.form != Form::Momentum {
            return Err(Error::Config("the Duhamel check runs on the momentum form".into()));
        }
        let grid = &model.grid;
        let mut modes = Vec::new();
        let mut shells = Vec::new();
        for i in 1..grid.len() {
            let m = grid.mode(i);
            let s = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
            if s <= max_shell && model.mask()[i] {
                modes.push(i);
                shells.push(s);
            }
        }
        if modes.is_empty() {
            return Err(Error::Config(format!("no retained modes with |m|^2 <= {max_shell}")));
        }
        Ok(Trajectory {
            modes,
            shells,
            times: Vec::new(),
            states: Vec::new(),
            forcing: Vec::new(),
        })
    }

    pub fn record(&mut self, model: &Model, state: &SpectralState, forcing: &SpectralState, t: f64) {
        self.times.push(t);
        self.states.push(self.modes.iter().map(|&i| model.compressible(state, i)).collect());
        self.forcing.push(self.modes.iter().map(|&i| model.compressible(forcing, i)).collect());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// ‖Û(t) − e^{tA}Û₀ − ∫₀ᵗ e^{(t−τ)A}𝒩̂(τ)dτ‖ / ‖Û(t)‖ at the last sample,
    /// with trapezoid quadrature in τ.
    pub fn residual(&self, model: &Model) -> Result<DuhamelReport> {
        let k = self.times.len();
        if k < 3 {
            return Err(Error::InsufficientPoints { got: k, need: 3 });
        }
        let h = self.times[1] - self.times[0];
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        if !uniform {
            return Err(Error::Config("trajectory cadence is not uniform".into()));
        }
        if h > 1.0 / MIN_SAMPLES_PER_UNIT {
            return Err(Error::Config(format!(
                "trajectory cadence {h} is coarser than 1/{MIN_SAMPLES_PER_UNIT}"
            )));
        }
        let residual = self.residual_with_stride(model, 1)?;
        let residual_coarse = if (k - 1) % 2 == 0 && k >= 5 {
            Some(self.residual_with_stride(model, 2)?)
        } else {
            None
        };
        let cadence_warning = residual_coarse
            .map(|c| (c - residual).abs() > CADENCE_WARNING * residual)
            .unwrap_or(false);
        Ok(DuhamelReport {
            t: self.times[k - 1],
            cadence: h,
            samples: k,
            modes: self.modes.len(),
            residual,
            residual_coarse,
            cadence_warning,
        })
    }

    fn residual_with_stride(&self, model: &Model, stride: usize) -> Result<f64> {
        let idx: Vec<usize> = (0..self.times.len()).step_by(stride).collect();
        let h = self.times[idx[1]] - self.times[idx[0]];
        let last = *idx.last().expect("nonempty");
        let mut shell_ops: Vec<(i64, Matrix4<f64>)> = Vec::new();
        let mut num = 0.0;
        let mut den = 0.0;
        for (p, &shell) in self.shells.iter().enumerate() {
            let e = match shell_ops.iter().find(|(s, _)| *s == shell) {
                Some((_, e)) => *e,
                None => {
                    let e = (model.symbol_block(shell)? * h).exp();
                    shell_ops.push((shell, e));
                    e
                }
            };
            let ec = e.map(|x| Complex64::new(x, 0.0));
            // Horner: acc ← E·acc + w_j 𝒩_j
            let mut acc = self.states[0][p] + self.forcing[0][p] * Complex64::from(0.5 * h);
            for (n, &j) in idx.iter().enumerate().skip(1) {
                let w = if n == idx.len() - 1 { 0.5 * h } else { h };
                acc = ec * acc + self.forcing[j][p] * Complex64::from(w);
            }
            let exact = self.states[last][p];
            num += (exact - acc).norm_squared();
            den += exact.norm_squared();
        }
        if !(den > 0.0) {
            return Err(Error::NonPositive {
                t: self.times[last],
                value: den,
            });
        }
        Ok((num / den).sqrt())
    }
}
