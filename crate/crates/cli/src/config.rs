use std::path::Path;

use bnsp_core::linlab::{CaseSettings, GridPolicy, LinearCase};
use bnsp_core::nlsim::SimConfig;
use bnsp_core::symbol::{KAPPA_FIT_POINTS, KAPPA_FIT_RMAX, KAPPA_FIT_RMIN};
use bnsp_core::PhysicalParams;
use serde::{Deserialize, Serialize};

use crate::output::Failure;

/// One file drives every subcommand; each reads its own table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub symbol: SymbolConfig,
    pub linear: LinearConfig,
    pub lower_bound: LowerBoundConfig,
    pub simulate: SimConfig,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub fit_r_min: f64,
    pub fit_r_max: f64,
    pub fit_points: usize,
    /// Times at which the semigroup is compared with the matrix exponential.
    pub times: Vec<f64>,
    /// Seeded random semigroup checks.
    pub random_checks: usize,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        SymbolConfig {
            r_min: 1e-3,
            r_max: 0.1,
            points: 200,
            fit_r_min: KAPPA_FIT_RMIN,
            fit_r_max: KAPPA_FIT_RMAX,
            fit_points: KAPPA_FIT_POINTS,
            times: vec![0.1, 1.0, 10.0],
            random_checks: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearConfig {
    pub case: LinearCase,
    pub k_max: u32,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Defaults to [t_min, t_max].
    pub fit_window: Option<[f64; 2]>,
    pub data: CaseSettings,
    pub grid: GridPolicy,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            case: LinearCase::Neutral,
            k_max: 2,
            t_min: 1e2,
            t_max: 1e4,
            per_decade: 40,
            fit_window: None,
            data: CaseSettings::default(),
            grid: GridPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub delta0: f64,
    pub eta: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Allowed sup/inf ratio of min-norm·(1+t)^{3/4}.
    pub band: f64,
    pub exponent_tolerance: f64,
    pub grid: GridPolicy,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            delta0: 0.1,
            eta: 0.1,
            t_min: 1e2,
            t_max: 1e4,
            per_decade: 40,
            band: 3.0,
            exponent_tolerance: 0.05,
            grid: GridPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub window: Option<[f64; 2]>,
    /// Columns to fit; empty means every norm column.
    pub columns: Vec<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::new("config", "io", format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Failure::new("config", "config", e.to_string()))?
            }
        };
        cfg.params.validate().map_err(|e| Failure::core("config", &e))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.params, cfg.params);
        assert_eq!(back.simulate, cfg.simulate);
        assert_eq!(back.linear.case, cfg.linear.case);
    }

    #[test]
    fn partial_tables_take_defaults() {
        let cfg: RunConfig = toml::from_str("[linear]\ncase = \"charged-flat\"\n").unwrap();
        assert_eq!(cfg.linear.case, LinearCase::ChargedFlat);
        assert_eq!(cfg.linear.per_decade, 40);
        assert_eq!(cfg.params, PhysicalParams::standard());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[symbol]\nrmin = 1.0\n").is_err());
    }
}
