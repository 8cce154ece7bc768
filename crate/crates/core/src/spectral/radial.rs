use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::cutoff::CutoffSpec;
use crate::quadrature::CompositeRule;

/// Quadrature nodes on (0, R_max] for radial Fourier integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub rule: CompositeRule,
    pub points_per_panel: usize,
}

impl RadialGrid {
    pub fn new(breakpoints: &[f64], points_per_panel: usize) -> Self {
        assert!(breakpoints.len() >= 2, "need at least one panel");
        assert!(
            breakpoints.windows(2).all(|w| w[0] < w[1]) && breakpoints[0] >= 0.0,
            "breakpoints must increase from a nonnegative start"
        );
        RadialGrid {
            rule: CompositeRule::new(breakpoints, points_per_panel),
            points_per_panel,
        }
    }

    /// Uniform panels on [0, r_max].
    pub fn uniform(r_max: f64, panels: usize, points_per_panel: usize) -> Self {
        let bp: Vec<f64> = (0..=panels).map(|i| r_max * i as f64 / panels as f64).collect();
        Self::new(&bp, points_per_panel)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.rule.weights
    }

    pub fn r_max(&self) -> f64 {
        *self.rule.breakpoints.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn family(&self) -> String {
        format!(
            "composite Gauss-Legendre, {} panels x {} points",
            self.rule.breakpoints.len() - 1,
            self.points_per_panel
        )
    }

    pub fn refined(&self) -> Self {
        RadialGrid {
            rule: self.rule.refined(self.points_per_panel),
            points_per_panel: self.points_per_panel,
        }
    }

    /// 4π ∫ r^{2+2k} g(r) dr.
    pub fn shell_integral(&self, k: u32, g: impl Fn(usize) -> f64) -> f64 {
        let mut s = 0.0;
        for (j, (&r, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            s += w * r.powi(2 + 2 * k as i32) * g(j);
        }
        4.0 * PI * s
    }
}

/// Radially symmetric Fourier data sampled on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

impl RadialProfile {
    pub fn sample(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialProfile { grid, values }
    }

    pub fn from_values(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), values.len(), "profile length does not match grid");
        RadialProfile { grid, values }
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// ‖∇^k f‖²_{L²(ℝ³)} = 4π ∫ r^{2+2k} |f̂(r)|² dr.
    pub fn sobolev_norm_sq(&self, k: u32) -> f64 {
        self.grid.shell_integral(k, |j| self.values[j].norm_sqr())
    }

    pub fn sobolev_norm(&self, k: u32) -> f64 {
        self.sobolev_norm_sq(k).sqrt()
    }

    pub fn freq_split(&self, cutoff: &CutoffSpec, scale: f64) -> (RadialProfile, RadialProfile) {
        let mut low = Vec::with_capacity(self.values.len());
        let mut high = Vec::with_capacity(self.values.len());
        for (&r, &v) in self.nodes().iter().zip(&self.values) {
            let l = v * cutoff.value(r / scale);
            low.push(l);
            high.push(v - l);
        }
        (
            RadialProfile::from_values(self.grid.clone(), low),
            RadialProfile::from_values(self.grid.clone(), high),
        )
    }
}

/// Joint norm ‖(f₁, …, f_m)‖ of profiles on a common grid.
pub fn joint_sobolev_norm(profiles: &[&RadialProfile], k: u32) -> f64 {
    profiles
        .iter()
        .map(|p| p.sobolev_norm_sq(k))
        .sum::<f64>()
        .sqrt()
}
