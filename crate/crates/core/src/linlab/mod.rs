//! Exact evolution of radial whole-space data under the linear semigroup.
//!
//! The compressible part (ϱ̂₁, n̂₁, ϱ̂₂, n̂₂) is propagated node by node with
//! e^{tA(r)}; the incompressible magnitudes M̂ᵢ decay with the heat factors
//! e^{−μ₁Z r²t} and e^{−μ₂ r²t}.

mod data;
mod lower_bound;
mod series;

use std::sync::Arc;

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use data::{
    make_case, make_lower_bound_data, CaseSettings, LinearCase, LinearInitialData, RadialData,
    ShapeTerm,
};
pub use lower_bound::{lower_bound_integrals, LowerBoundIntegrals, LOWER_BOUND_MIN_TIME};
pub use series::{norm_series, NormRow, NormTable, QuadratureCheck, QUADRATURE_TOL};

use crate::error::{Error, Result};
use crate::params::{expansion_constants, PhysicalParams, Species};
use crate::spectral::{RadialGrid, RadialProfile};
use crate::symbol;

/// Quantities whose norms are tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Rho1,
    Rho2,
    N1,
    N2,
    GradPhi,
    #[serde(rename = "M1")]
    BigM1,
    #[serde(rename = "M2")]
    BigM2,
    M1,
    M2,
    /// Joint (ϱ₁, ϱ₂).
    Rho,
    /// Joint (m₁, m₂, ∇φ).
    MPhi,
}

impl Component {
    pub const ALL: [Component; 11] = [
        Component::Rho1,
        Component::Rho2,
        Component::N1,
        Component::N2,
        Component::GradPhi,
        Component::BigM1,
        Component::BigM2,
        Component::M1,
        Component::M2,
        Component::Rho,
        Component::MPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Rho1 => "rho1",
            Component::Rho2 => "rho2",
            Component::N1 => "n1",
            Component::N2 => "n2",
            Component::GradPhi => "grad_phi",
            Component::BigM1 => "M1",
            Component::BigM2 => "M2",
            Component::M1 => "m1",
            Component::M2 => "m2",
            Component::Rho => "rho",
            Component::MPhi => "m_phi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Slot indices into [`EvolvedProfiles::slots`].
const RHO1: usize = 0;
const N1: usize = 1;
const RHO2: usize = 2;
const N2: usize = 3;
const GRAD_PHI: usize = 4;
const BIG_M1: usize = 5;
const BIG_M2: usize = 6;

/// Profiles at one time on one radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolvedProfiles {
    pub t: f64,
    pub grid: Arc<RadialGrid>,
    /// ϱ̂₁, n̂₁, ϱ̂₂, n̂₂, ∇φ̂ (as ĉ/r), M̂₁, M̂₂.
    pub slots: [Vec<Complex64>; 7],
}

impl EvolvedProfiles {
    fn parts(c: Component) -> &'static [usize] {
        match c {
            Component::Rho1 => &[RHO1],
            Component::Rho2 => &[RHO2],
            Component::N1 => &[N1],
            Component::N2 => &[N2],
            Component::GradPhi => &[GRAD_PHI],
            Component::BigM1 => &[BIG_M1],
            Component::BigM2 => &[BIG_M2],
            Component::M1 => &[N1, BIG_M1],
            Component::M2 => &[N2, BIG_M2],
            Component::Rho => &[RHO1, RHO2],
            Component::MPhi => &[N1, BIG_M1, N2, BIG_M2, GRAD_PHI],
        }
    }

    pub fn norm_sq(&self, c: Component, k: u32) -> f64 {
        let parts = Self::parts(c);
        self.grid
            .shell_integral(k, |j| parts.iter().map(|&p| self.slots[p][j].norm_sqr()).sum())
    }

    pub fn norm(&self, c: Component, k: u32) -> f64 {
        self.norm_sq(c, k).sqrt()
    }

    /// Single-slot components as profiles.
    pub fn profile(&self, c: Component) -> Option<RadialProfile> {
        match Self::parts(c) {
            [p] => Some(RadialProfile::from_values(self.grid.clone(), self.slots[*p].clone())),
            _ => None,
        }
    }
}

/// Apply e^{tA(r)} to 4-vectors sampled at `nodes`.
pub fn propagate_values(
    params: &PhysicalParams,
    nodes: &[f64],
    values: &[[Complex64; 4]],
    t: f64,
) -> Result<Vec<[Complex64; 4]>> {
    if t < 0.0 {
        return Err(Error::Config(format!("negative time {t}")));
    }
    let mut out = Vec::with_capacity(nodes.len());
    for (&r, u0) in nodes.iter().zip(values) {
        if t == 0.0 || u0.iter().all(|z| z.norm() == 0.0) {
            out.push(*u0);
            continue;
        }
        let v = Vector4::from_column_slice(u0);
        let a = symbol::build_symbol(params, r)?;
        let spec = symbol::eigenvalues(&symbol::char_poly(params, r)?)?;
        let u = if spec.well_separated {
            symbol::projectors(&a, &spec.lambdas)?.apply(t, &v)
        } else {
            symbol::propagator(params, r, t)? * v
        };
        out.push([u[0], u[1], u[2], u[3]]);
    }
    Ok(out)
}

/// Evolve closed-form initial data to time `t` on a given grid.
pub fn evolve_linear(
    params: &PhysicalParams,
    data: &LinearInitialData,
    t: f64,
    grid: Arc<RadialGrid>,
) -> Result<EvolvedProfiles> {
    let nodes = grid.nodes();
    let u0: Vec<[Complex64; 4]> = nodes.iter().map(|&r| data.compressible(r)).collect();
    let u = propagate_values(params, nodes, &u0, t)?;
    let len = nodes.len();
    let mut slots: [Vec<Complex64>; 7] = std::array::from_fn(|_| Vec::with_capacity(len));
    let c1 = params.heat_coefficient(Species::Ion);
    let c2 = params.heat_coefficient(Species::Electron);
    for (j, &r) in nodes.iter().enumerate() {
        let [a, b, c, d] = u[j];
        slots[RHO1].push(a);
        slots[N1].push(b);
        slots[RHO2].push(c);
        slots[N2].push(d);
        slots[GRAD_PHI].push((params.z * a - c) / r);
        slots[BIG_M1].push(Complex64::new(data.big_m1.eval(r) * (-c1 * r * r * t).exp(), 0.0));
        slots[BIG_M2].push(Complex64::new(data.big_m2.eval(r) * (-c2 * r * r * t).exp(), 0.0));
    }
    Ok(EvolvedProfiles { t, grid, slots })
}

/// How the radial grid adapts to the time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridPolicy {
    pub r_max: f64,
    pub points_per_panel: usize,
    /// Oscillation periods allowed per panel in the core region.
    pub periods_per_panel: f64,
    /// Core radius in units of the diffusion length 1/√(κ_min t).
    pub core_widths: f64,
    /// Core panels are at most this fraction of the core radius.
    pub max_panel_fraction: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            r_max: 8.0,
            points_per_panel: 32,
            periods_per_panel: 3.0,
            core_widths: 12.0,
            max_panel_fraction: 0.125,
        }
    }
}

/// Closed-form data plus everything needed to pick grids.
#[derive(Debug, Clone)]
pub struct LinearLab {
    pub params: PhysicalParams,
    pub data: LinearInitialData,
    pub policy: GridPolicy,
    /// Smallest damping rate among κ₁, κ₂ and the heat coefficients.
    pub kappa_min: f64,
}

impl LinearLab {
    pub fn new(params: PhysicalParams, data: LinearInitialData, policy: GridPolicy) -> Result<Self> {
        params.validate()?;
        let c = expansion_constants(&params)?;
        let kappa_min = c
            .kappa1
            .min(c.kappa2)
            .min(params.heat_coefficient(Species::Ion))
            .min(params.heat_coefficient(Species::Electron));
        Ok(LinearLab {
            params,
            data,
            policy,
            kappa_min,
        })
    }

    /// Panels adapted to time `t` over [0, upper].
    pub fn grid_for(&self, t: f64, upper: f64) -> Result<RadialGrid> {
        grid_for(&self.params, &self.policy, self.kappa_min, t, upper, &self.data.features())
    }

    pub fn evolve(&self, t: f64) -> Result<EvolvedProfiles> {
        let upper = self.data.support().min(self.policy.r_max);
        let grid = Arc::new(self.grid_for(t, upper)?);
        evolve_linear(&self.params, &self.data, t, grid)
    }
}

/// Largest |d Im λ / dr| over (0, r_hi], sampled.
fn phase_slope(params: &PhysicalParams, r_hi: f64) -> Result<f64> {
    let samples = 128;
    let mut prev: Option<(f64, [Complex64; 4])> = None;
    let mut slope = 0.0f64;
    for i in 0..=samples {
        let r = r_hi * (i as f64 + 0.125) / (samples as f64 + 0.125);
        let l = symbol::eigenvalues(&symbol::char_poly(params, r)?)?.lambdas;
        if let Some((rp, lp)) = prev {
            for b in 0..4 {
                slope = slope.max((l[b].im - lp[b].im).abs() / (r - rp));
            }
        }
        prev = Some((r, l));
    }
    Ok(slope)
}

pub(crate) fn grid_for(
    params: &PhysicalParams,
    policy: &GridPolicy,
    kappa_min: f64,
    t: f64,
    upper: f64,
    features: &[f64],
) -> Result<RadialGrid> {
    if !(upper > 0.0) {
        return Err(Error::Config("radial data has empty support".into()));
    }
    let core = if t > 0.0 {
        (policy.core_widths / (kappa_min * t).sqrt()).min(upper)
    } else {
        upper
    };
    // phase differences between branches oscillate at up to twice the slope
    let rate = 2.0 * t * phase_slope(params, core)?;
    let mut h = policy.max_panel_fraction * core;
    if rate > 0.0 {
        h = h.min(policy.periods_per_panel * 2.0 * std::f64::consts::PI / rate);
    }
    let mut stops: Vec<f64> = features
        .iter()
        .copied()
        .filter(|&f| f > 0.0 && f < upper)
        .collect();
    stops.push(core);
    stops.push(upper);
    stops.sort_by(f64::total_cmp);
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    let mut bp = vec![0.0];
    let mut a = 0.0;
    for &b in &stops {
        if b <= a {
            continue;
        }
        if b <= core * (1.0 + 1e-14) {
            let panels = ((b - a) / h).ceil().max(1.0) as usize;
            for i in 1..=panels {
                bp.push(a + (b - a) * i as f64 / panels as f64);
            }
        } else {
            // geometric panels past the core
            let panels = (b / a.max(core)).log2().ceil().max(1.0) as usize;
            let ratio = (b / a).powf(1.0 / panels as f64);
            let mut x = a;
            for i in 1..=panels {
                x = if i == panels { b } else { x * ratio };
                bp.push(x);
            }
        }
        a = b;
    }
    Ok(RadialGrid::new(&bp, policy.points_per_panel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Transition;
    use proptest::prelude::*;

    fn lab(params: PhysicalParams, case: LinearCase) -> LinearLab {
        let data = make_case(&params, case, &CaseSettings::default());
        LinearLab::new(params, data, GridPolicy::default()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let l = lab(PhysicalParams::standard(), LinearCase::ChargedLinear);
        let e = l.evolve(0.0).unwrap();
        for (j, &r) in e.grid.nodes().iter().enumerate() {
            let u0 = l.data.compressible(r);
            for i in 0..4 {
                assert_eq!(e.slots[i][j], u0[i]);
            }
            assert_eq!(e.slots[BIG_M1][j].re, l.data.big_m1.eval(r));
        }
    }

    #[test]
    fn symmetric_neutral_data_stays_neutral() {
        let p = PhysicalParams::symmetric(1.0, 0.5, 1.3);
        let mut data = make_case(&p, LinearCase::Neutral, &CaseSettings::default());
        data.n1 = data.rho1.clone();
        data.n2 = data.rho1.clone();
        let l = LinearLab::new(p, data, GridPolicy::default()).unwrap();
        for t in [0.5, 10.0, 300.0] {
            let e = l.evolve(t).unwrap();
            let c = e.norm(Component::GradPhi, 0);
            let rho = e.norm(Component::Rho, 0);
            assert!(c <= 1e-12 * rho, "t={t}: {c} vs {rho}");
        }
    }

    #[test]
    fn heat_factors_exact() {
        let p = PhysicalParams { z: 2.0, ..PhysicalParams::standard() };
        let l = lab(p, LinearCase::Neutral);
        let t = 3.7;
        let e = l.evolve(t).unwrap();
        for (j, &r) in e.grid.nodes().iter().enumerate() {
            let m0 = l.data.big_m1.eval(r);
            if m0 > 0.0 {
                let ratio = e.slots[BIG_M1][j].re / m0;
                assert!((ratio - (-p.mu1 * p.z * r * r * t).exp()).abs() <= 1e-15);
                let ratio = e.slots[BIG_M2][j].re / l.data.big_m2.eval(r);
                assert!((ratio - (-p.mu2 * r * r * t).exp()).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn small_r_total_density_is_conserved() {
        // the charge oscillates at the plasma frequency, ϱ̂₁ + ϱ̂₂ is frozen as r → 0
        let l = lab(PhysicalParams::standard(), LinearCase::ChargedFlat);
        let r = 1e-6;
        let grid = Arc::new(RadialGrid::new(&[0.0, 2.0 * r], 2));
        for t in [1.0, 100.0, 1e4] {
            let e = evolve_linear(&l.params, &l.data, t, grid.clone()).unwrap();
            for (j, &r_j) in grid.nodes().iter().enumerate() {
                let u0 = l.data.compressible(r_j);
                let before = u0[RHO1] + u0[RHO2];
                let after = e.slots[RHO1][j] + e.slots[RHO2][j];
                let tol = 10.0 * (r_j * (1.0 + t)).powi(2) + 1e-9;
                assert!((after - before).norm() <= tol, "t={t}: {}", (after - before).norm());
            }
        }
    }

    #[test]
    fn lower_bound_support_grid_covers_data() {
        let p = PhysicalParams::standard();
        let data = make_lower_bound_data(p.z, 0.1, 0.1, Transition::Smooth);
        let l = LinearLab::new(p, data, GridPolicy::default()).unwrap();
        let g = l.grid_for(1e4, 0.2).unwrap();
        assert!((g.r_max() - 0.2).abs() < 1e-15);
        assert!(g.rule.breakpoints.iter().any(|&b| (b - 0.1).abs() < 1e-15));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn semigroup_composition(t1 in 0.0f64..50.0, t2 in 0.0f64..50.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let p = PhysicalParams::standard();
            let nodes: Vec<f64> = (1..=12).map(|i| 0.03 * i as f64).collect();
            let u0: Vec<[Complex64; 4]> = nodes
                .iter()
                .map(|&r| {
                    let c = |x: f64| Complex64::new(x, 0.5 * x * r);
                    [c(a), c(b * r), c(a + b), c(1.0 - a * r)]
                })
                .collect();
            let direct = propagate_values(&p, &nodes, &u0, t1 + t2).unwrap();
            let mid = propagate_values(&p, &nodes, &u0, t1).unwrap();
            let twice = propagate_values(&p, &nodes, &mid, t2).unwrap();
            for (x, y) in direct.iter().zip(&twice) {
                let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
                for i in 0..4 {
                    prop_assert!((x[i] - y[i]).norm() <= 1e-9 * scale.max(1e-6));
                }
            }
        }
    }
}
