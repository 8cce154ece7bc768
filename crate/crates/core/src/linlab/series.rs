use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evolve_linear, Component, LinearLab};
use crate::analysis::DecaySeries;
use crate::error::{Error, Result};

/// Largest relative norm change allowed when every panel is halved.
pub const QUADRATURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub component: Component,
    pub k: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub t: f64,
    pub max_rel_change: f64,
    pub worst: String,
    pub nodes: usize,
    pub nodes_refined: usize,
    pub family: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormTable {
    pub case: String,
    pub times: Vec<f64>,
    pub rows: Vec<NormRow>,
    pub check: QuadratureCheck,
}

impl NormTable {
    pub fn row(&self, c: Component, k: u32) -> Option<&NormRow> {
        self.rows.iter().find(|r| r.component == c && r.k == k)
    }

    pub fn series(&self, c: Component, k: u32) -> Result<DecaySeries> {
        let row = self
            .row(c, k)
            .ok_or_else(|| Error::Config(format!("no norms recorded for {} k={k}", c.name())))?;
        DecaySeries::new(c.name(), k, self.case.clone(), self.times.clone(), row.values.clone())
    }
}

/// Norms of the requested components at each time.
///
/// At the largest time the grid is refined once and the norms compared.
pub fn norm_series(
    lab: &LinearLab,
    case: &str,
    times: &[f64],
    requests: &[(Component, u32)],
) -> Result<NormTable> {
    let t_max = times
        .iter()
        .copied()
        .fold(f64::NAN, f64::max);
    if !t_max.is_finite() || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Config("times must be finite and nonnegative".into()));
    }
    let per_time: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let e = lab.evolve(t)?;
            Ok(requests.iter().map(|&(c, k)| e.norm(c, k)).collect())
        })
        .collect::<Result<_>>()?;
    let rows = requests
        .iter()
        .enumerate()
        .map(|(i, &(c, k))| NormRow {
            component: c,
            k,
            values: per_time.iter().map(|v| v[i]).collect(),
        })
        .collect();
    let check = quadrature_check(lab, t_max, requests)?;
    Ok(NormTable {
        case: case.to_string(),
        times: times.to_vec(),
        rows,
        check,
    })
}

fn quadrature_check(lab: &LinearLab, t: f64, requests: &[(Component, u32)]) -> Result<QuadratureCheck> {
    let coarse = lab.evolve(t)?;
    let fine_grid = Arc::new(coarse.grid.refined());
    let fine = evolve_linear(&lab.params, &lab.data, t, fine_grid.clone())?;
    let mut worst = (0.0f64, String::new());
    for &(c, k) in requests {
        let a = coarse.norm(c, k);
        let b = fine.norm(c, k);
        let scale = a.abs().max(b.abs());
        if scale < f64::MIN_POSITIVE {
            continue;
        }
        let change = (a - b).abs() / scale;
        if change > worst.0 || worst.1.is_empty() {
            worst = (change, format!("{} k={k}", c.name()));
        }
    }
    if worst.0 > QUADRATURE_TOL {
        return Err(Error::Quadrature {
            t,
            change: worst.0,
            component: worst.1,
        });
    }
    Ok(QuadratureCheck {
        t,
        max_rel_change: worst.0,
        worst: worst.1,
        nodes: coarse.grid.len(),
        nodes_refined: fine_grid.len(),
        family: coarse.grid.family(),
    })
}
