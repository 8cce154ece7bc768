use bnsp_core::analysis::{band_check, fit_exponent, log_times, BandCheck, DecaySeries, FitWindow};
use bnsp_core::linlab::{
    lower_bound_integrals, make_case, norm_series, CaseSettings, Component, LinearCase, LinearLab,
    LowerBoundIntegrals,
};
use bnsp_core::PhysicalParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::linear::FitRecord;
use crate::config::LowerBoundConfig;
use crate::output::{csv, num, CliResult, Failure, Run};

const FIVE: [Component; 5] = [Component::Rho1, Component::N1, Component::Rho2, Component::N2, Component::GradPhi];

#[derive(Debug, Serialize)]
struct RateCheck {
    fit: FitRecord,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct CrossTermCheck {
    /// sup |I₃|·t² over the first and second half of the window.
    early_sup: f64,
    late_sup: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct LowerBoundReport {
    delta0: f64,
    eta: f64,
    window: FitWindow,
    min_norm_band: BandCheck,
    min_norm_fit: FitRecord,
    i1: RateCheck,
    i2: RateCheck,
    i3: CrossTermCheck,
    max_relative_remainder: f64,
    pass: bool,
}

pub fn run(run: &mut Run, params: &PhysicalParams, cfg: &LowerBoundConfig) -> CliResult<bool> {
    if !(cfg.delta0 > 0.0 && cfg.delta0 < 1.0 && cfg.eta > 0.0) {
        return Err(Failure::new("config", "config", "lower_bound: need 0 < delta0 < 1 and eta > 0"));
    }
    if !(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min && cfg.per_decade > 0) {
        return Err(Failure::new("config", "config", "lower_bound: need 0 < t_min < t_max and per_decade > 0"));
    }
    let settings = CaseSettings { delta0: cfg.delta0, eta: cfg.eta, ..CaseSettings::default() };
    let data = make_case(params, LinearCase::LowerBound, &settings);
    let lab = run.stage("setup", || LinearLab::new(*params, data, cfg.grid))?;
    let times = log_times(cfg.t_min, cfg.t_max, cfg.per_decade);
    let window = FitWindow::new(cfg.t_min, cfg.t_max);

    let requests: Vec<(Component, u32)> = FIVE.iter().map(|&c| (c, 0)).collect();
    let table = run.stage("norms", || norm_series(&lab, "lower-bound", &times, &requests))?;
    let (min, series) = run.stage("minimum", || {
        let series: Vec<DecaySeries> = FIVE.iter().map(|&c| table.series(c, 0)).collect::<bnsp_core::Result<_>>()?;
        let refs: Vec<&DecaySeries> = series.iter().collect();
        Ok((DecaySeries::pointwise_min("min5", &refs)?, series))
    })?;
    let rows = times.iter().enumerate().map(|(i, &t)| {
        let mut row = vec![num(t)];
        row.extend(series.iter().map(|s| num(s.values[i])));
        row.push(num(min.values[i]));
        row
    });
    let header = ["t", "rho1", "n1", "rho2", "n2", "grad_phi", "min5"];
    run.write("norms.csv", csv(&header, rows).as_bytes())?;

    let ints: Vec<LowerBoundIntegrals> = run.stage("integrals", || {
        times
            .par_iter()
            .map(|&t| lower_bound_integrals(&lab, cfg.eta, t))
            .collect()
    })?;
    let rows = ints.iter().map(|i| {
        [i.t, i.i1, i.i2, i.i3, i.n2_sq, i.remainder, i.quadrature_change]
            .into_iter()
            .map(num)
            .collect()
    });
    let header = ["t", "i1", "i2", "i3", "n2_sq_ball", "remainder", "quadrature_change"];
    run.write("integrals.csv", csv(&header, rows).as_bytes())?;

    let report = run.stage("verdict", || {
        let band = band_check(&min, window, -0.75, cfg.band);
        let min_fit = fit_exponent(&min, window)?;
        let rate = |name: &str, v: Vec<f64>| -> bnsp_core::Result<RateCheck> {
            let s = DecaySeries::new(name, 0, "lower-bound", times.clone(), v)?;
            let f = fit_exponent(&s, window)?;
            Ok(RateCheck {
                pass: (f.exponent + 1.5).abs() <= cfg.exponent_tolerance,
                fit: FitRecord::new(&s, &f),
                expected: -1.5,
                tolerance: cfg.exponent_tolerance,
            })
        };
        let i1 = rate("I1", ints.iter().map(|i| i.i1).collect())?;
        let i2 = rate("I2", ints.iter().map(|i| i.i2).collect())?;
        let weighted: Vec<f64> = ints.iter().map(|i| i.i3.abs() * i.t * i.t).collect();
        let half = weighted.len() / 2;
        let early_sup = weighted[..=half].iter().copied().fold(0.0, f64::max);
        let late_sup = weighted[half..].iter().copied().fold(0.0, f64::max);
        let i3 = CrossTermCheck {
            early_sup,
            late_sup,
            pass: late_sup.is_finite() && late_sup <= early_sup,
        };
        let max_relative_remainder = ints
            .iter()
            .map(|i| i.remainder.abs() / (i.i1 + i.i2))
            .fold(0.0, f64::max);
        let pass = band.pass && i1.pass && i2.pass && i3.pass;
        Ok(LowerBoundReport {
            delta0: cfg.delta0,
            eta: cfg.eta,
            window,
            min_norm_band: band,
            min_norm_fit: FitRecord::new(&min, &min_fit),
            i1,
            i2,
            i3,
            max_relative_remainder,
            pass,
        })
    })?;
    run.write_json("lower_bound.json", &report)?;
    println!(
        "lower bound: band ratio {:.3} (≤ {}), I1 {:.4}, I2 {:.4}, |I3|t² sup {:.2e} → {:.2e}: {}",
        report.min_norm_band.ratio,
        cfg.band,
        report.i1.fit.exponent,
        report.i2.fit.exponent,
        report.i3.early_sup,
        report.i3.late_sup,
        if report.pass { "pass" } else { "FAIL" }
    );
    Ok(report.pass)
}
