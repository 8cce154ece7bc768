use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::params::PhysicalParams;
use crate::spectral::{CutoffSpec, Transition};

/// amplitude · r^power · plateau(r)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeTerm {
    pub amplitude: f64,
    pub power: i32,
    pub plateau: CutoffSpec,
}

impl ShapeTerm {
    pub fn eval(&self, r: f64) -> f64 {
        let p = self.plateau.value(r);
        if p == 0.0 {
            return 0.0;
        }
        let base = if self.power == 0 { 1.0 } else { r.powi(self.power) };
        self.amplitude * base * p
    }
}

/// A radial Fourier profile given in closed form as a sum of shape terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialData {
    pub terms: Vec<ShapeTerm>,
}

impl RadialData {
    pub fn zero() -> Self {
        RadialData { terms: Vec::new() }
    }

    pub fn term(t: ShapeTerm) -> Self {
        RadialData { terms: vec![t] }
    }

    pub fn with(mut self, t: ShapeTerm) -> Self {
        self.terms.push(t);
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(r)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == 0.0)
    }

    /// Radii where the profile changes smoothness.
    pub fn features(&self) -> Vec<f64> {
        self.terms
            .iter()
            .flat_map(|t| [t.plateau.inner, t.plateau.outer])
            .collect()
    }

    pub fn support(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.amplitude != 0.0)
            .map(|t| t.plateau.outer)
            .fold(0.0, f64::max)
    }
}

/// Initial data of the linear experiments, all radial in Fourier space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInitialData {
    pub z: f64,
    pub rho1: RadialData,
    pub n1: RadialData,
    pub rho2: RadialData,
    pub n2: RadialData,
    /// Magnitudes of the incompressible parts.
    pub big_m1: RadialData,
    pub big_m2: RadialData,
}

impl LinearInitialData {
    pub fn compressible(&self, r: f64) -> [Complex64; 4] {
        [
            Complex64::new(self.rho1.eval(r), 0.0),
            Complex64::new(self.n1.eval(r), 0.0),
            Complex64::new(self.rho2.eval(r), 0.0),
            Complex64::new(self.n2.eval(r), 0.0),
        ]
    }

    /// ĉ₀ = Z ϱ̂₁₀ − ϱ̂₂₀.
    pub fn charge(&self, r: f64) -> f64 {
        self.z * self.rho1.eval(r) - self.rho2.eval(r)
    }

    /// |∇φ̂₀| = |ĉ₀|/r.
    pub fn grad_phi(&self, r: f64) -> f64 {
        self.charge(r).abs() / r
    }

    fn all(&self) -> [&RadialData; 6] {
        [&self.rho1, &self.n1, &self.rho2, &self.n2, &self.big_m1, &self.big_m2]
    }

    pub fn features(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.all().iter().flat_map(|d| d.features()).collect();
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    pub fn support(&self) -> f64 {
        self.all().iter().map(|d| d.support()).fold(0.0, f64::max)
    }
}

/// The canonical experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearCase {
    /// Neutral plateau data: Zϱ̂₁₀ − ϱ̂₂₀ = 0.
    Neutral,
    /// Charge imbalance tending to a nonzero constant as r → 0.
    ChargedFlat,
    /// Charge imbalance vanishing linearly as r → 0.
    ChargedLinear,
    /// Only n̂₂₀ nonzero, on a small ball.
    LowerBound,
}

impl LinearCase {
    pub const ALL: [LinearCase; 4] = [
        LinearCase::Neutral,
        LinearCase::ChargedFlat,
        LinearCase::ChargedLinear,
        LinearCase::LowerBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinearCase::Neutral => "neutral",
            LinearCase::ChargedFlat => "charged-flat",
            LinearCase::ChargedLinear => "charged-linear",
            LinearCase::LowerBound => "lower-bound",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Shape parameters of the canonical data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseSettings {
    pub plateau_inner: f64,
    pub plateau_outer: f64,
    /// Size of ĉ₀ near the origin in the charged cases.
    pub charge_amplitude: f64,
    pub delta0: f64,
    pub eta: f64,
    pub transition: Transition,
}

impl Default for CaseSettings {
    fn default() -> Self {
        CaseSettings {
            plateau_inner: 0.5,
            plateau_outer: 1.0,
            charge_amplitude: 0.25,
            delta0: 0.1,
            eta: 0.1,
            transition: Transition::Smooth,
        }
    }
}

impl CaseSettings {
    fn plateau(&self, amplitude: f64, power: i32) -> ShapeTerm {
        ShapeTerm {
            amplitude,
            power,
            plateau: CutoffSpec::new(self.plateau_inner, self.plateau_outer, self.transition),
        }
    }
}

pub fn make_case(params: &PhysicalParams, case: LinearCase, s: &CaseSettings) -> LinearInitialData {
    let z = params.z;
    let f = |a: f64| RadialData::term(s.plateau(a, 0));
    let c = s.charge_amplitude;
    match case {
        LinearCase::Neutral => LinearInitialData {
            z,
            rho1: f(1.0),
            n1: RadialData::zero(),
            rho2: f(z),
            n2: RadialData::zero(),
            big_m1: f(1.0),
            big_m2: f(1.0),
        },
        LinearCase::ChargedFlat => LinearInitialData {
            rho2: f(z - c),
            ..make_case(params, LinearCase::Neutral, s)
        },
        LinearCase::ChargedLinear => LinearInitialData {
            rho2: f(z).with(s.plateau(-c, 1)),
            ..make_case(params, LinearCase::Neutral, s)
        },
        LinearCase::LowerBound => make_lower_bound_data(z, s.delta0, s.eta, s.transition),
    }
}

/// n̂₂₀ = δ₀^{3/2} on [0, η], descending to 0 on [η, 2η]; all else zero.
pub fn make_lower_bound_data(z: f64, delta0: f64, eta: f64, transition: Transition) -> LinearInitialData {
    assert!(delta0 > 0.0 && delta0 < 1.0, "δ₀ must lie in (0, 1)");
    assert!(eta > 0.0, "η must be positive");
    LinearInitialData {
        z,
        rho1: RadialData::zero(),
        n1: RadialData::zero(),
        rho2: RadialData::zero(),
        n2: RadialData::term(ShapeTerm {
            amplitude: delta0.powf(1.5),
            power: 0,
            plateau: CutoffSpec::new(eta, 2.0 * eta, transition),
        }),
        big_m1: RadialData::zero(),
        big_m2: RadialData::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_data_conditions() {
        let d = make_lower_bound_data(1.0, 0.1, 0.1, Transition::Smooth);
        for i in 1..=100 {
            let r = 0.1 * i as f64 / 100.0;
            assert_eq!(d.rho1.eval(r), 0.0);
            assert_eq!(d.n1.eval(r), 0.0);
            assert_eq!(d.rho2.eval(r), 0.0);
            assert_eq!(d.big_m1.eval(r), 0.0);
            assert_eq!(d.big_m2.eval(r), 0.0);
            assert!(d.n2.eval(r).abs() >= 0.1f64.powf(1.5) * (1.0 - 1e-15));
        }
        assert!((d.n2.eval(0.05) - 0.1f64.powf(1.5)).abs() < 1e-16);
        assert_eq!(d.n2.eval(0.2), 0.0);
    }

    #[test]
    fn charge_profiles() {
        let p = PhysicalParams { z: 2.0, ..PhysicalParams::standard() };
        let s = CaseSettings::default();
        let n = make_case(&p, LinearCase::Neutral, &s);
        let f = make_case(&p, LinearCase::ChargedFlat, &s);
        let l = make_case(&p, LinearCase::ChargedLinear, &s);
        for r in [1e-4, 0.1, 0.4] {
            assert!(n.charge(r).abs() < 1e-15);
            assert!((f.charge(r) - 0.25).abs() < 1e-15);
            assert!((l.charge(r) - 0.25 * r).abs() < 1e-15);
        }
        assert_eq!(LinearCase::parse("charged-linear"), Some(LinearCase::ChargedLinear));
    }
}
