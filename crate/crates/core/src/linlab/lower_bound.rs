use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{grid_for, propagate_values, LinearLab, QUADRATURE_TOL};
use crate::error::{Error, Result};
use crate::spectral::RadialGrid;
use crate::symbol;

/// The leading-order decomposition is only meaningful once t is large.
pub const LOWER_BOUND_MIN_TIME: f64 = 10.0;

/// Low-frequency pieces of ‖n̂₂(t)‖² on the ball r ≤ η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundIntegrals {
    pub t: f64,
    pub eta: f64,
    /// Fast pair alone.
    pub i1: f64,
    /// Acoustic pair alone.
    pub i2: f64,
    /// Cross term.
    pub i3: f64,
    /// ‖n̂₂(t)‖² restricted to r ≤ η.
    pub n2_sq: f64,
    pub remainder: f64,
    pub quadrature_change: f64,
}

fn integrals_on(lab: &LinearLab, grid: &RadialGrid, t: f64) -> Result<[f64; 4]> {
    let z = lab.params.z;
    let nodes = grid.nodes();
    let u0: Vec<[Complex64; 4]> = nodes.iter().map(|&r| lab.data.compressible(r)).collect();
    let u = propagate_values(&lab.params, nodes, &u0, t)?;
    let mut acc = [0.0; 4];
    for (j, (&r, &w)) in nodes.iter().zip(grid.weights()).enumerate() {
        let l = symbol::eigenvalues(&symbol::char_poly(&lab.params, r)?)?.lambdas;
        let e1 = (l[0] * t).exp().re;
        let e3 = (l[2] * t).exp().re;
        let n20 = u0[j][3].norm_sqr() / ((1.0 + z) * (1.0 + z));
        let wr = w * r * r;
        acc[0] += wr * e1 * e1 * n20;
        acc[1] += wr * z * z * e3 * e3 * n20;
        acc[2] += wr * 2.0 * z * e1 * e3 * n20;
        acc[3] += wr * u[j][3].norm_sqr();
    }
    Ok(acc.map(|a| 4.0 * PI * a))
}

/// I₁, I₂, I₃ and the remainder ‖n̂₂(t)‖² − (I₁ + I₂ + I₃) on r ≤ η.
pub fn lower_bound_integrals(lab: &LinearLab, eta: f64, t: f64) -> Result<LowerBoundIntegrals> {
    if !(t >= LOWER_BOUND_MIN_TIME) {
        return Err(Error::Config(format!(
            "lower-bound integrals need t >= {LOWER_BOUND_MIN_TIME}, got {t}"
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::Config(format!("ball radius must be positive, got {eta}")));
    }
    let grid = grid_for(&lab.params, &lab.policy, lab.kappa_min, t, eta, &[])?;
    let coarse = integrals_on(lab, &grid, t)?;
    let fine = integrals_on(lab, &grid.refined(), t)?;
    let mut change = 0.0f64;
    for i in [0, 1, 3] {
        let scale = coarse[i].abs().max(fine[i].abs());
        if scale > 0.0 {
            change = change.max((coarse[i] - fine[i]).abs() / scale);
        }
    }
    if change > QUADRATURE_TOL {
        return Err(Error::Quadrature {
            t,
            change,
            component: "lower-bound integrals".into(),
        });
    }
    let [i1, i2, i3, n2_sq] = fine;
    Ok(LowerBoundIntegrals {
        t,
        eta,
        i1,
        i2,
        i3,
        n2_sq,
        remainder: n2_sq - (i1 + i2 + i3),
        quadrature_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linlab::{make_lower_bound_data, GridPolicy};
    use crate::params::PhysicalParams;
    use crate::spectral::Transition;

    #[test]
    fn remainder_is_small_against_leading_terms() {
        let p = PhysicalParams::standard();
        let data = make_lower_bound_data(p.z, 0.1, 0.1, Transition::Smooth);
        let lab = LinearLab::new(p, data, GridPolicy::default()).unwrap();
        let lb = lower_bound_integrals(&lab, 0.1, 1e3).unwrap();
        assert!(lb.i1 > 0.0 && lb.i2 > 0.0);
        assert!(lb.remainder.abs() < 0.2 * (lb.i1 + lb.i2), "{lb:?}");
    }

    #[test]
    fn rejects_short_times() {
        let p = PhysicalParams::standard();
        let data = make_lower_bound_data(p.z, 0.1, 0.1, Transition::Smooth);
        let lab = LinearLab::new(p, data, GridPolicy::default()).unwrap();
        assert!(matches!(lower_bound_integrals(&lab, 0.1, 1.0), Err(Error::Config(_))));
    }
}
