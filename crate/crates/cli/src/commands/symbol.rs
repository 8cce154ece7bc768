use bnsp_core::params::{expansion_constants, ExpansionConstants};
use bnsp_core::symbol::{self, log_space, KappaFit};
use bnsp_core::{Complex64, PhysicalParams};
use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::SymbolConfig;
use crate::output::{csv, num, CliResult, Run};

#[derive(Debug, Serialize)]
struct RandomChecks {
    seed: u64,
    count: usize,
    /// max ‖e^{(s+t)A}u − e^{sA}e^{tA}u‖ / ‖u‖
    composition: f64,
    /// max ‖Σe^{λt}Pᵢu − exp(tA)u‖ / ‖u‖
    matrix_exponential: f64,
}

#[derive(Debug, Serialize)]
struct PrintedKappas {
    nu1_reading: [f64; 2],
    as_printed: [f64; 2],
}

#[derive(Debug, Serialize)]
struct SymbolReport {
    params: PhysicalParams,
    nodes: usize,
    r_min: f64,
    r_max: f64,
    max_projector_residual: f64,
    max_semigroup_error: f64,
    semigroup_times: Vec<f64>,
    min_gap: f64,
    constants: ExpansionConstants,
    expansion: KappaFit,
    printed_kappas: PrintedKappas,
    random: RandomChecks,
}

fn random_checks(params: &PhysicalParams, cfg: &SymbolConfig, seed: u64) -> bnsp_core::Result<RandomChecks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (cfg.r_min.ln(), cfg.r_max.ln());
    let mut composition = 0.0f64;
    let mut matrix_exponential = 0.0f64;
    for _ in 0..cfg.random_checks {
        let r = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let s = 10.0 * rng.random::<f64>();
        let t = 10.0 * rng.random::<f64>();
        let u = Vector4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let eig = symbol::eigensystem(params, r)?;
        let a = symbol::build_symbol(params, r)?;
        let both = eig.apply(s + t, &u);
        let stepwise = eig.apply(s, &eig.apply(t, &u));
        composition = composition.max((both - stepwise).norm() / u.norm());
        let oracle = (a.entries * t).exp().map(|x| Complex64::new(x, 0.0)) * u;
        matrix_exponential = matrix_exponential.max((eig.apply(t, &u) - oracle).norm() / u.norm());
    }
    Ok(RandomChecks {
        seed,
        count: cfg.random_checks,
        composition,
        matrix_exponential,
    })
}

pub fn run(run: &mut Run, params: &PhysicalParams, cfg: &SymbolConfig, seed: u64) -> CliResult<()> {
    let nodes = log_space(cfg.r_min, cfg.r_max, cfg.points);
    let table = run.stage("spectrum", || {
        nodes
            .iter()
            .map(|&r| {
                let a = symbol::build_symbol(params, r)?;
                let eig = symbol::eigensystem(params, r)?;
                let mut semi = 0.0f64;
                for &t in &cfg.times {
                    let oracle = (a.entries * t).exp().map(|x| Complex64::new(x, 0.0));
                    semi = semi.max((eig.semigroup(t) - oracle).norm() / oracle.norm().max(1.0));
                }
                Ok((eig, eig.residuals(&a).max(), semi))
            })
            .collect::<bnsp_core::Result<Vec<_>>>()
    })?;
    let rows = table.iter().map(|(eig, res, semi)| {
        let mut row = vec![num(eig.r)];
        for l in &eig.lambdas {
            row.push(num(l.re));
            row.push(num(l.im));
        }
        row.extend([num(eig.min_gap), num(*res), num(*semi)]);
        row
    });
    let header = [
        "r", "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im", "lambda3_re", "lambda3_im", "lambda4_re",
        "lambda4_im", "min_gap", "projector_residual", "semigroup_error",
    ];
    run.write("eigenvalues.csv", csv(&header, rows).as_bytes())?;

    let expansion = run.stage("expansion", || {
        symbol::derive_kappas_on(params, cfg.fit_r_min, cfg.fit_r_max, cfg.fit_points)
    })?;
    let constants = run.stage("constants", || expansion_constants(params))?;
    let random = run.stage("random-checks", || random_checks(params, cfg, seed))?;
    let (m1, m2) = params.kappas_matched();
    let (p1, p2) = params.kappas_as_printed();
    let report = SymbolReport {
        params: *params,
        nodes: nodes.len(),
        r_min: cfg.r_min,
        r_max: cfg.r_max,
        max_projector_residual: table.iter().map(|t| t.1).fold(0.0, f64::max),
        max_semigroup_error: table.iter().map(|t| t.2).fold(0.0, f64::max),
        semigroup_times: cfg.times.clone(),
        min_gap: table.iter().map(|t| t.0.min_gap).fold(f64::INFINITY, f64::min),
        constants,
        expansion,
        printed_kappas: PrintedKappas {
            nu1_reading: [m1, m2],
            as_printed: [p1, p2],
        },
        random,
    };
    run.write_json("symbol.json", &report)?;
    println!(
        "symbol: {} nodes, projector residual {:.2e}, semigroup error {:.2e}, kappa = ({:.6}, {:.6})",
        report.nodes, report.max_projector_residual, report.max_semigroup_error, expansion.kappa1, expansion.kappa2
    );
    Ok(())
}
