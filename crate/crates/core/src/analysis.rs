//! Power-law fits of norm time series and pass/fail verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fits need at least this many samples inside the window.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub component: String,
    pub k: u32,
    pub case: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl DecaySeries {
    pub fn new(
        component: impl Into<String>,
        k: u32,
        case: impl Into<String>,
        times: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let s = DecaySeries {
            component: component.into(),
            k,
            case: case.into(),
            times,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::Config(format!(
                "series {}: {} times but {} values",
                self.component,
                self.times.len(),
                self.values.len()
            )));
        }
        if self.times.iter().any(|&t| !(t > 0.0)) || self.times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "series {}: times must be positive and strictly increasing",
                self.component
            )));
        }
        for (&t, &v) in self.times.iter().zip(&self.values) {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositive { t, value: v });
            }
        }
        Ok(())
    }

    pub fn key(&self) -> ClaimKey {
        ClaimKey {
            component: self.component.clone(),
            k: self.k,
            case: self.case.clone(),
        }
    }

    /// Pointwise minimum over series sharing a time grid.
    pub fn pointwise_min(component: &str, series: &[&DecaySeries]) -> Result<DecaySeries> {
        let first = series
            .first()
            .ok_or_else(|| Error::Config("minimum over an empty set of series".into()))?;
        let mut values = first.values.clone();
        for s in &series[1..] {
            if s.times != first.times {
                return Err(Error::Config("series do not share a time grid".into()));
            }
            for (m, v) in values.iter_mut().zip(&s.values) {
                *m = m.min(*v);
            }
        }
        DecaySeries::new(component, first.k, first.case.clone(), first.times.clone(), values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        FitWindow { t_lo, t_hi }
    }

    /// The last `decades` decades of the series' time range.
    pub fn last_decades(series: &DecaySeries, decades: f64) -> Self {
        let t_hi = *series.times.last().unwrap_or(&1.0);
        let t_lo = (t_hi / 10f64.powf(decades)).max(series.times.first().copied().unwrap_or(t_hi));
        FitWindow { t_lo, t_hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        // relative slack so log-spaced endpoints are not lost to rounding
        let eps = 1e-12;
        t >= self.t_lo * (1.0 - eps) && t <= self.t_hi * (1.0 + eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// RMS of log-space residuals.
    pub residual_rms: f64,
    pub window: FitWindow,
    pub points: usize,
    /// Exponent change when the window start is doubled, if that window
    /// still holds enough samples.
    pub sensitivity: Option<f64>,
}

/// Least squares of log(value) against log(1 + t) inside the window.
pub fn fit_exponent(series: &DecaySeries, window: FitWindow) -> Result<DecayFit> {
    series.validate()?;
    let (first, last) = match (series.times.first(), series.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientPoints { got: 0, need: MIN_FIT_POINTS }),
    };
    if window.t_lo < first * (1.0 - 1e-12) || window.t_hi > last * (1.0 + 1e-12) || window.t_lo >= window.t_hi {
        return Err(Error::Config(format!(
            "fit window [{}, {}] outside data range [{first}, {last}]",
            window.t_lo, window.t_hi
        )));
    }
    let (slope, intercept, rms, n) = log_fit(series, window)?;
    let shifted = FitWindow::new(2.0 * window.t_lo, window.t_hi);
    let sensitivity = if shifted.t_lo < shifted.t_hi {
        log_fit(series, shifted).ok().map(|(s, ..)| s - slope)
    } else {
        None
    };
    Ok(DecayFit {
        exponent: slope,
        amplitude: intercept.exp(),
        residual_rms: rms,
        window,
        points: n,
        sensitivity,
    })
}

fn log_fit(series: &DecaySeries, window: FitWindow) -> Result<(f64, f64, f64, usize)> {
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| window.contains(**t))
        .map(|(t, v)| ((1.0 + t).ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { got: n, need: MIN_FIT_POINTS });
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok((slope, intercept, rms, n))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClaimKey {
    pub component: String,
    pub k: u32,
    pub case: String,
}

impl std::fmt::Display for ClaimKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} k={} ({})", self.component, self.k, self.case)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum BoundKind {
    /// Fitted exponent within tolerance of the expected rate.
    Rate,
    /// Rate, plus value·(1+t)^{−expected} stays inside a bounded band.
    Lower { band: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub key: ClaimKey,
    pub expected: f64,
    pub tolerance: f64,
    pub bound: BoundKind,
}

impl Claim {
    pub fn rate(component: &str, k: u32, case: &str, expected: f64, tolerance: f64) -> Self {
        Claim {
            key: ClaimKey {
                component: component.into(),
                k,
                case: case.into(),
            },
            expected,
            tolerance,
            bound: BoundKind::Rate,
        }
    }

    pub fn lower(component: &str, k: u32, case: &str, expected: f64, tolerance: f64, band: f64) -> Self {
        Claim {
            bound: BoundKind::Lower { band },
            ..Claim::rate(component, k, case, expected, tolerance)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub inf: f64,
    pub sup: f64,
    pub ratio: f64,
    pub band: f64,
    pub pass: bool,
}

/// inf/sup of value·(1+t)^{−rate} over the window, and whether sup/inf ≤ band.
pub fn band_check(series: &DecaySeries, window: FitWindow, rate: f64, band: f64) -> BandCheck {
    let scaled: Vec<f64> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| window.contains(**t))
        .map(|(t, v)| v * (1.0 + t).powf(-rate))
        .collect();
    let inf = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let sup = scaled.iter().copied().fold(0.0, f64::max);
    let ratio = sup / inf;
    BandCheck {
        inf,
        sup,
        ratio,
        band,
        pass: inf > 0.0 && inf.is_finite() && ratio <= band,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub component: String,
    pub k: u32,
    pub case: String,
    pub expected: f64,
    pub fitted: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub sensitivity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<BandCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<FitWindow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub entries: Vec<VerdictEntry>,
    /// Claims with no matching fit.
    pub missing: Vec<ClaimKey>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.missing.is_empty() && self.entries.iter().all(|e| e.pass)
    }
}

/// Compare fits with claims. Claims without a fit are listed in `missing`
/// and reported as failing entries.
pub fn verdict(fits: &[(DecaySeries, DecayFit)], claims: &[Claim]) -> Report {
    let mut entries = Vec::with_capacity(claims.len());
    let mut missing = Vec::new();
    for claim in claims {
        let found = fits.iter().find(|(s, _)| s.key() == claim.key);
        let entry = match found {
            None => {
                missing.push(claim.key.clone());
                VerdictEntry {
                    component: claim.key.component.clone(),
                    k: claim.key.k,
                    case: claim.key.case.clone(),
                    expected: claim.expected,
                    fitted: None,
                    tolerance: claim.tolerance,
                    pass: false,
                    sensitivity: None,
                    band: None,
                    window: None,
                    residual_rms: None,
                }
            }
            Some((series, fit)) => {
                let rate_ok = (fit.exponent - claim.expected).abs() <= claim.tolerance;
                let band = match claim.bound {
                    BoundKind::Rate => None,
                    BoundKind::Lower { band } => Some(band_check(series, fit.window, claim.expected, band)),
                };
                VerdictEntry {
                    component: claim.key.component.clone(),
                    k: claim.key.k,
                    case: claim.key.case.clone(),
                    expected: claim.expected,
                    fitted: Some(fit.exponent),
                    tolerance: claim.tolerance,
                    pass: rate_ok && band.map_or(true, |b| b.pass),
                    sensitivity: fit.sensitivity,
                    band,
                    window: Some(fit.window),
                    residual_rms: Some(fit.residual_rms),
                }
            }
        };
        entries.push(entry);
    }
    Report {
        entries,
        missing,
        notes: Vec::new(),
    }
}

/// Log-uniform sample times, `per_decade` per decade, both ends included.
pub fn log_times(t_lo: f64, t_hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (t_hi / t_lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|i| t_lo * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> DecaySeries {
        let times = log_times(1e2, 1e4, 40);
        let values = times.iter().map(|&t| f(t)).collect();
        DecaySeries::new("x", 0, "synthetic", times, values).unwrap()
    }

    #[test]
    fn exact_power_law() {
        let s = synthetic(|t| (1.0 + t).powf(-0.75));
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        assert!((fit.exponent + 0.75).abs() < 1e-6);
        assert!((fit.amplitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillating_envelope() {
        let s = synthetic(|t| (1.0 + t).powf(-0.75) * (2.0 + t.sin()));
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        assert!((fit.exponent + 0.75).abs() < 0.05, "{}", fit.exponent);
        assert!(fit.residual_rms > 0.0);
    }

    #[test]
    fn constant_series() {
        let s = synthetic(|_| 3.0);
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        assert!(fit.exponent.abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let s = synthetic(|t| 1.0 / t);
        assert!(matches!(
            fit_exponent(&s, FitWindow::new(9e3, 1e4)),
            Err(Error::InsufficientPoints { .. })
        ));
        assert!(matches!(
            DecaySeries::new("x", 0, "c", vec![1.0, 2.0], vec![1.0, 0.0]),
            Err(Error::NonPositive { .. })
        ));
        assert!(fit_exponent(&s, FitWindow::new(10.0, 1e4)).is_err());
    }

    #[test]
    fn verdict_examples() {
        let s = synthetic(|t| (1.0 + t).powf(-0.76));
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        let claims = vec![Claim::rate("x", 0, "synthetic", -0.75, 0.05), Claim::rate("x", 2, "synthetic", -1.75, 0.05)];
        let r = verdict(&[(s, fit)], &claims);
        assert!(r.entries[0].pass);
        assert!(!r.entries[1].pass);
        assert_eq!(r.missing.len(), 1);
        assert_eq!(r.missing[0].k, 2);
        assert!(!r.all_pass());
        let json = serde_json::to_value(&r.entries[0]).unwrap();
        for key in ["component", "k", "case", "expected", "fitted", "tolerance", "pass", "sensitivity"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn charged_flat_example() {
        let s = synthetic(|t| (1.0 + t).powf(-0.24));
        let s = DecaySeries { component: "m_phi".into(), case: "charged-flat".into(), ..s };
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        let r = verdict(&[(s, fit)], &[Claim::rate("m_phi", 0, "charged-flat", -0.25, 0.05)]);
        assert!(r.all_pass());
    }

    #[test]
    fn lower_band() {
        let s = synthetic(|t| (1.0 + t).powf(-0.75) * (1.5 + 0.5 * (t / 100.0).sin()));
        let fit = fit_exponent(&s, FitWindow::new(1e2, 1e4)).unwrap();
        let b = band_check(&s, fit.window, -0.75, 3.0);
        assert!(b.pass && b.ratio <= 2.0 + 1e-12);
        let b = band_check(&s, fit.window, -0.75, 1.5);
        assert!(!b.pass);
    }

    proptest! {
        #[test]
        fn scale_invariance(scale in 1e-6f64..1e6, rate in -2.0f64..0.0) {
            let a = synthetic(|t| (1.0 + t).powf(rate) * (1.0 + 0.1 * t.ln().cos()));
            let b = DecaySeries { values: a.values.iter().map(|v| v * scale).collect(), ..a.clone() };
            let w = FitWindow::new(1e2, 1e4);
            let fa = fit_exponent(&a, w).unwrap();
            let fb = fit_exponent(&b, w).unwrap();
            prop_assert!((fa.exponent - fb.exponent).abs() <= 1e-12);
        }

        #[test]
        fn power_equivariance(shift in -1.5f64..1.5) {
            let a = synthetic(|t| (1.0 + t).powf(-0.75) * (2.0 + (0.3 * t).sin()));
            let b = DecaySeries {
                values: a.times.iter().zip(&a.values).map(|(t, v)| v * (1.0 + t).powf(shift)).collect(),
                ..a.clone()
            };
            let w = FitWindow::new(1e2, 1e4);
            let fa = fit_exponent(&a, w).unwrap();
            let fb = fit_exponent(&b, w).unwrap();
            prop_assert!((fb.exponent - fa.exponent - shift).abs() <= 1e-9);
        }
    }
}
