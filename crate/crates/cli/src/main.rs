//! `bnsp`: symbol validation, linear decay experiments, lower bounds,
//! nonlinear simulation and power-law fits.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bnsp_core::linlab::LinearCase;
use bnsp_core::nlsim::StepperKind;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use output::{CliResult, Failure, Run, ERROR_RECORD};

#[derive(Debug, Parser)]
#[command(name = "bnsp", version, about = "Bipolar Navier-Stokes-Poisson spectral laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues, projectors, semigroup checks and small-r expansion.
    Symbol {
        #[arg(long)]
        rmin: Option<f64>,
        #[arg(long)]
        rmax: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Norm time series and decay exponents of radial whole-space data.
    LinearDecay {
        #[arg(long, value_parser = parse_case)]
        case: Option<LinearCase>,
        #[arg(long)]
        kmax: Option<u32>,
    },
    /// Lower-bound data: minimum-norm band and the I₁, I₂, I₃ integrals.
    LowerBound {
        #[arg(long)]
        delta0: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// Nonlinear periodic-box run.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long, value_parser = parse_stepper)]
        stepper: Option<StepperKind>,
    },
    /// Power-law fits of CSV norm tables.
    Fit {
        inputs: Vec<PathBuf>,
        /// Restrict to these columns or components.
        #[arg(long = "column")]
        columns: Vec<String>,
        /// Fit window as `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<[f64; 2]>,
    },
}

fn parse_case(s: &str) -> Result<LinearCase, String> {
    LinearCase::parse(s).ok_or_else(|| {
        let names: Vec<&str> = LinearCase::ALL.iter().map(|c| c.name()).collect();
        format!("unknown case `{s}`; expected one of {}", names.join(", "))
    })
}

fn parse_stepper(s: &str) -> Result<StepperKind, String> {
    match s {
        "rk4" => Ok(StepperKind::Rk4),
        "imex" => Ok(StepperKind::Imex),
        "lawson" => Ok(StepperKind::Lawson),
        _ => Err(format!("unknown stepper `{s}`; expected rk4, imex or lawson")),
    }
}

fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(lo > 0.0 && hi > lo) {
        return Err("need 0 < lo < hi".into());
    }
    Ok([lo, hi])
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Symbol { .. } => "symbol",
            Command::LinearDecay { .. } => "linear-decay",
            Command::LowerBound { .. } => "lower-bound",
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
        }
    }
}

/// Flags override the file.
fn apply_flags(cfg: &mut RunConfig, cmd: &Command) {
    match cmd {
        Command::Symbol { rmin, rmax, points } => {
            if let Some(r) = rmin {
                cfg.symbol.r_min = *r;
                cfg.symbol.fit_r_min = *r;
            }
            if let Some(r) = rmax {
                cfg.symbol.r_max = *r;
                cfg.symbol.fit_r_max = *r;
            }
            if let Some(p) = points {
                cfg.symbol.points = *p;
            }
        }
        Command::LinearDecay { case, kmax } => {
            if let Some(c) = case {
                cfg.linear.case = *c;
            }
            if let Some(k) = kmax {
                cfg.linear.k_max = *k;
            }
        }
        Command::LowerBound { delta0, eta } => {
            if let Some(d) = delta0 {
                cfg.lower_bound.delta0 = *d;
            }
            if let Some(e) = eta {
                cfg.lower_bound.eta = *e;
            }
        }
        Command::Simulate { n, t_final, stepper } => {
            if let Some(n) = n {
                cfg.simulate.n = *n;
            }
            if let Some(t) = t_final {
                cfg.simulate.t_final = *t;
            }
            if let Some(s) = stepper {
                cfg.simulate.stepper = *s;
            }
        }
        Command::Fit { columns, window, .. } => {
            if !columns.is_empty() {
                cfg.fit.columns = columns.clone();
            }
            if window.is_some() {
                cfg.fit.window = *window;
            }
        }
    }
}

fn execute(cli: &Cli, run: &mut Run, cfg: &RunConfig) -> CliResult<bool> {
    let p = &cfg.params;
    match &cli.command {
        Command::Symbol { .. } => commands::symbol::run(run, p, &cfg.symbol, cli.common.seed).map(|_| true),
        Command::LinearDecay { .. } => commands::linear::run(run, p, &cfg.linear),
        Command::LowerBound { .. } => commands::lower_bound::run(run, p, &cfg.lower_bound),
        Command::Simulate { .. } => commands::simulate::run(run, p, &cfg.simulate).map(|_| true),
        Command::Fit { inputs, .. } => commands::fit::run(run, inputs, &cfg.fit).map(|_| true),
    }
}

fn report_failure(dir: Option<&PathBuf>, f: &Failure) {
    let record = serde_json::json!({ "error": f });
    let text = serde_json::to_string_pretty(&record).unwrap_or_else(|_| f.message.clone());
    eprintln!("{text}");
    if let Some(dir) = dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join(ERROR_RECORD), text + "\n");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let out = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    let result = (|| {
        if let Some(n) = cli.common.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::new("setup", "threads", e.to_string()))?;
        }
        let mut cfg = RunConfig::load(cli.common.config.as_deref())?;
        apply_flags(&mut cfg, &cli.command);
        let mut run = Run::create(&out)?;
        let _ = std::fs::remove_file(out.join(ERROR_RECORD));
        let ok = execute(&cli, &mut run, &cfg)?;
        run.finish(name, cli.common.seed, &cfg)?;
        Ok(ok)
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        // the run completed but a claimed bound did not hold
        Ok(false) => ExitCode::from(3),
        Err(f) => {
            report_failure(Some(&out), &f);
            ExitCode::from(2)
        }
    }
}
