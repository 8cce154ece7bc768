use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bnsp_core::analysis::{fit_exponent, DecaySeries, FitWindow};
use serde::Serialize;

use crate::commands::linear::FitRecord;
use crate::commands::simulate::SCOPE_NOTE;
use crate::config::FitConfig;
use crate::output::{CliResult, Failure, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Source {
    /// Norm table from the radial whole-space laboratory.
    WholeSpace,
    /// Diagnostics from the periodic-box solver.
    PeriodicBox,
}

#[derive(Debug, Serialize)]
struct SeriesFit {
    input: String,
    #[serde(flatten)]
    fit: FitRecord,
    /// Least-squares γ in value ≈ C·e^{−γt}; periodic-box inputs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    exponential_rate: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FitReport {
    source: Source,
    window: Option<[f64; 2]>,
    fits: Vec<SeriesFit>,
    skipped: Vec<String>,
    notes: Vec<String>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io("read", path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Failure::new("read", "config", format!("{}: empty file", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(|s| s.trim().to_string()).collect()).collect();
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(Failure::new(
            "read",
            "config",
            format!("{}: row {} has the wrong number of columns", path.display(), bad + 2),
        ));
    }
    Ok(Table { header, rows })
}

fn parse(path: &Path, s: &str) -> CliResult<f64> {
    s.parse()
        .map_err(|_| Failure::new("read", "config", format!("{}: `{s}` is not a number", path.display())))
}

fn column(t: &Table, name: &str) -> Option<usize> {
    t.header.iter().position(|h| h == name)
}

/// `rho1_k2` → ("rho1", 2); names without a derivative suffix get k = 0.
fn split_order(name: &str) -> (String, u32) {
    if let Some((base, k)) = name.rsplit_once("_k") {
        if let Ok(k) = k.parse() {
            return (base.to_string(), k);
        }
    }
    (name.to_string(), 0)
}

type Points = BTreeMap<(String, u32), Vec<(f64, f64)>>;

fn collect(path: &Path, table: &Table, wanted: &[String]) -> CliResult<Points> {
    let t_col = column(table, "t").ok_or_else(|| {
        Failure::new("read", "config", format!("{}: no `t` column", path.display()))
    })?;
    let mut out: Points = BTreeMap::new();
    if let (Some(c), Some(k), Some(v)) = (column(table, "component"), column(table, "k"), column(table, "norm")) {
        for row in &table.rows {
            if !wanted.is_empty() && !wanted.contains(&row[c]) {
                continue;
            }
            let k: u32 = row[k]
                .parse()
                .map_err(|_| Failure::new("read", "config", format!("{}: bad k `{}`", path.display(), row[k])))?;
            out.entry((row[c].clone(), k))
                .or_default()
                .push((parse(path, &row[t_col])?, parse(path, &row[v])?));
        }
        return Ok(out);
    }
    for (j, name) in table.header.iter().enumerate() {
        if j == t_col || name == "step" {
            continue;
        }
        if !wanted.is_empty() && !wanted.contains(name) {
            continue;
        }
        let key = split_order(name);
        for row in &table.rows {
            out.entry(key.clone())
                .or_default()
                .push((parse(path, &row[t_col])?, parse(path, &row[j])?));
        }
    }
    Ok(out)
}

fn exponential_rate(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    -sxy / sxx
}

pub fn run(run: &mut Run, inputs: &[PathBuf], cfg: &FitConfig) -> CliResult<()> {
    if inputs.is_empty() {
        return Err(Failure::new("config", "config", "fit: no input files"));
    }
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    let mut periodic = false;
    for path in inputs {
        let table = read_table(path)?;
        let is_periodic = column(&table, "step").is_some() && column(&table, "linear_energy").is_some();
        periodic |= is_periodic;
        let points = collect(path, &table, &cfg.columns)?;
        let label = path.display().to_string();
        for ((component, k), pts) in points {
            let pts: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.0 > 0.0).collect();
            let tag = format!("{label}: {component} k={k}");
            if pts.iter().any(|p| !(p.1 > 0.0 && p.1.is_finite())) {
                skipped.push(format!("{tag} (non-positive values)"));
                continue;
            }
            let (times, values): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            let case = path.file_stem().map_or(String::new(), |s| s.to_string_lossy().into_owned());
            let series = match DecaySeries::new(component.clone(), k, case, times, values) {
                Ok(s) => s,
                Err(e) => {
                    skipped.push(format!("{tag} ({e})"));
                    continue;
                }
            };
            let window = match cfg.window {
                Some([lo, hi]) => FitWindow::new(lo, hi),
                None => FitWindow::new(series.times[0], *series.times.last().expect("nonempty")),
            };
            match fit_exponent(&series, window) {
                Ok(f) => {
                    let in_window: Vec<(f64, f64)> = pts.iter().copied().filter(|p| window.contains(p.0)).collect();
                    fits.push(SeriesFit {
                        input: label.clone(),
                        fit: FitRecord::new(&series, &f),
                        exponential_rate: is_periodic.then(|| exponential_rate(&in_window)),
                    });
                }
                Err(e) => skipped.push(format!("{tag} ({e})")),
            }
        }
    }
    let mut notes = Vec::new();
    if periodic {
        notes.push(SCOPE_NOTE.to_string());
        notes.push(
            "Power-law exponents of periodic-box series describe the fitted window only; \
             the exponential rate column is the relevant summary."
                .to_string(),
        );
    }
    let report = FitReport {
        source: if periodic { Source::PeriodicBox } else { Source::WholeSpace },
        window: cfg.window,
        fits,
        skipped,
        notes,
    };
    run.write_json("fits.json", &report)?;
    for f in &report.fits {
        println!(
            "{} k={}: exponent {:.4}{}",
            f.fit.component,
            f.fit.k,
            f.fit.exponent,
            f.exponential_rate.map_or(String::new(), |g| format!(", exponential rate {g:.4}"))
        );
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_suffix() {
        assert_eq!(split_order("rho1_k2"), ("rho1".to_string(), 2));
        assert_eq!(split_order("grad_phi_k0"), ("grad_phi".to_string(), 0));
        assert_eq!(split_order("linear_energy"), ("linear_energy".to_string(), 0));
    }

    #[test]
    fn exponential_rate_of_exact_decay() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 3.0 * (-0.4 * i as f64).exp())).collect();
        assert!((exponential_rate(&pts) - 0.4).abs() < 1e-12);
    }
}
