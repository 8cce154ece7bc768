use bnsp_core::analysis::{fit_exponent, log_times, verdict, Claim, DecayFit, DecaySeries, FitWindow, Report};
use bnsp_core::linlab::{make_case, norm_series, Component, LinearCase, LinearLab, QuadratureCheck};
use bnsp_core::PhysicalParams;
use serde::Serialize;

use crate::config::LinearConfig;
use crate::output::{csv, num, CliResult, Failure, Run};

#[derive(Debug, Serialize)]
pub struct FitRecord {
    pub component: String,
    pub k: u32,
    pub case: String,
    pub exponent: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
    pub points: usize,
    pub sensitivity: Option<f64>,
}

impl FitRecord {
    pub fn new(s: &DecaySeries, f: &DecayFit) -> Self {
        FitRecord {
            component: s.component.clone(),
            k: s.k,
            case: s.case.clone(),
            exponent: f.exponent,
            amplitude: f.amplitude,
            residual_rms: f.residual_rms,
            points: f.points,
            sensitivity: f.sensitivity,
        }
    }
}

#[derive(Debug, Serialize)]
struct LinearReport {
    case: LinearCase,
    window: FitWindow,
    quadrature: QuadratureCheck,
    fits: Vec<FitRecord>,
    verdict: Report,
}

/// Claimed upper rates for the components the case is designed to probe.
fn claims(case: LinearCase, k_max: u32) -> Vec<Claim> {
    let name = case.name();
    let mut out = Vec::new();
    for k in 0..=k_max {
        let kf = k as f64;
        if case != LinearCase::LowerBound {
            for c in [Component::Rho1, Component::Rho2] {
                out.push(Claim::rate(c.name(), k, name, -0.75 - 0.5 * kf, 0.05));
            }
            for c in [Component::BigM1, Component::BigM2] {
                out.push(Claim::rate(c.name(), k, name, -0.75 - 0.5 * kf, 0.02));
            }
        }
        match case {
            LinearCase::ChargedFlat => out.push(Claim::rate(Component::MPhi.name(), k, name, -0.25 - 0.5 * kf, 0.05)),
            LinearCase::ChargedLinear => out.push(Claim::rate(Component::MPhi.name(), k, name, -0.75 - 0.5 * kf, 0.05)),
            _ => {}
        }
    }
    out
}

pub fn run(run: &mut Run, params: &PhysicalParams, cfg: &LinearConfig) -> CliResult<bool> {
    if !(cfg.t_min > 0.0 && cfg.t_max > cfg.t_min && cfg.per_decade > 0) {
        return Err(Failure::new("config", "config", "linear: need 0 < t_min < t_max and per_decade > 0"));
    }
    let data = make_case(params, cfg.case, &cfg.data);
    let lab = run.stage("setup", || LinearLab::new(*params, data, cfg.grid))?;
    let times = log_times(cfg.t_min, cfg.t_max, cfg.per_decade);
    let requests: Vec<(Component, u32)> = Component::ALL
        .iter()
        .flat_map(|&c| (0..=cfg.k_max).map(move |k| (c, k)))
        .collect();
    let table = run.stage("norms", || norm_series(&lab, cfg.case.name(), &times, &requests))?;

    let rows = table.times.iter().enumerate().flat_map(|(i, &t)| {
        table
            .rows
            .iter()
            .map(move |row| vec![num(t), row.component.name().to_string(), row.k.to_string(), num(row.values[i])])
    });
    run.write("norms.csv", csv(&["t", "component", "k", "norm"], rows).as_bytes())?;

    let [lo, hi] = cfg.fit_window.unwrap_or([cfg.t_min, cfg.t_max]);
    let window = FitWindow::new(lo, hi);
    let fits: Vec<(DecaySeries, DecayFit)> = run.stage("fit", || {
        let mut out = Vec::new();
        for &(c, k) in &requests {
            // components that vanish identically have nothing to fit
            let positive = table.row(c, k).is_some_and(|r| r.values.iter().all(|v| *v > 0.0));
            if positive {
                let s = table.series(c, k)?;
                let f = fit_exponent(&s, window)?;
                out.push((s, f));
            }
        }
        Ok(out)
    })?;
    let report = LinearReport {
        case: cfg.case,
        window,
        quadrature: table.check.clone(),
        fits: fits.iter().map(|(s, f)| FitRecord::new(s, f)).collect(),
        verdict: verdict(&fits, &claims(cfg.case, cfg.k_max)),
    };
    run.write_json("fits.json", &report)?;
    for e in &report.verdict.entries {
        println!(
            "{} {} k={}: exponent {}, expected {:.4} ± {}",
            if e.pass { "pass" } else { "FAIL" },
            e.component,
            e.k,
            e.fitted.map_or("n/a".into(), |x| format!("{x:.4}")),
            e.expected,
            e.tolerance
        );
    }
    Ok(report.verdict.all_pass())
}
