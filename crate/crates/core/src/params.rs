//! Physical parameters, pressure laws and derived symbol constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol;

/// The two charged fluids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Ion,
    Electron,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::Ion, Species::Electron];

    pub fn index(self) -> usize {
        match self {
            Species::Ion => 0,
            Species::Electron => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Ion => "ion",
            Species::Electron => "electron",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    #[serde(rename = "Z")]
    pub z: f64,
    pub mu1: f64,
    pub nu1: f64,
    pub mu2: f64,
    pub nu2: f64,
    pub p1_prime: f64,
    pub p2_prime: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::standard()
    }
}

impl PhysicalParams {
    /// Z = 1, unequal viscosities, unit sound speeds.
    pub fn standard() -> Self {
        PhysicalParams {
            z: 1.0,
            mu1: 1.0,
            nu1: 0.5,
            mu2: 2.0,
            nu2: 1.0,
            p1_prime: 1.0,
            p2_prime: 1.0,
            gamma1: None,
            gamma2: None,
        }
    }

    /// Same charges and viscosities for both fluids.
    pub fn symmetric(mu: f64, nu: f64, p_prime: f64) -> Self {
        PhysicalParams {
            z: 1.0,
            mu1: mu,
            nu1: nu,
            mu2: mu,
            nu2: nu,
            p1_prime: p_prime,
            p2_prime: p_prime,
            gamma1: None,
            gamma2: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParams { name, reason });
        let all = [
            ("Z", self.z),
            ("mu1", self.mu1),
            ("nu1", self.nu1),
            ("mu2", self.mu2),
            ("nu2", self.nu2),
            ("p1_prime", self.p1_prime),
            ("p2_prime", self.p2_prime),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return bad(name, format!("{v} is not finite"));
            }
        }
        if self.z <= 0.0 {
            return bad("Z", format!("{} must be positive", self.z));
        }
        for (mu_name, mu, nu_name, nu) in [
            ("mu1", self.mu1, "nu1", self.nu1),
            ("mu2", self.mu2, "nu2", self.nu2),
        ] {
            if mu <= 0.0 {
                return bad(mu_name, format!("{mu} must be positive"));
            }
            if 3.0 * mu + 2.0 * nu <= 0.0 {
                return bad(nu_name, format!("3·{mu} + 2·{nu} must be positive"));
            }
            if mu + nu <= 0.0 {
                return bad(
                    nu_name,
                    format!("{mu} + {nu} must be positive for a dissipative longitudinal mode"),
                );
            }
        }
        if self.p1_prime <= 0.0 {
            return bad("p1_prime", format!("{} must be positive", self.p1_prime));
        }
        if self.p2_prime <= 0.0 {
            return bad("p2_prime", format!("{} must be positive", self.p2_prime));
        }
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            if let Some(g) = g {
                if !(g.is_finite() && g >= 1.0) {
                    return bad(name, format!("{g} must be a finite exponent ≥ 1"));
                }
            }
        }
        Ok(())
    }

    /// Parse the flat `key = value` parameter table, ignoring unrelated keys.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: PhysicalParams = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn equilibrium_density(&self, s: Species) -> f64 {
        match s {
            Species::Ion => 1.0 / self.z,
            Species::Electron => 1.0,
        }
    }

    /// Signed charge entering the Lorentz force.
    pub fn charge(&self, s: Species) -> f64 {
        match s {
            Species::Ion => self.z,
            Species::Electron => -1.0,
        }
    }

    /// Factor multiplying μ and ν in the momentum equations.
    pub fn viscous_scale(&self, s: Species) -> f64 {
        match s {
            Species::Ion => self.z,
            Species::Electron => 1.0,
        }
    }

    pub fn mu(&self, s: Species) -> f64 {
        match s {
            Species::Ion => self.mu1,
            Species::Electron => self.mu2,
        }
    }

    pub fn nu(&self, s: Species) -> f64 {
        match s {
            Species::Ion => self.nu1,
            Species::Electron => self.nu2,
        }
    }

    pub fn p_prime(&self, s: Species) -> f64 {
        match s {
            Species::Ion => self.p1_prime,
            Species::Electron => self.p2_prime,
        }
    }

    /// Longitudinal damping coefficient: (μ₁+ν₁)Z or μ₂+ν₂.
    pub fn longitudinal_damping(&self, s: Species) -> f64 {
        self.viscous_scale(s) * (self.mu(s) + self.nu(s))
    }

    /// Transverse (heat) coefficient: μ₁Z or μ₂.
    pub fn heat_coefficient(&self, s: Species) -> f64 {
        self.viscous_scale(s) * self.mu(s)
    }

    pub fn pressure_law(&self, s: Species) -> PressureLaw {
        let gamma = match s {
            Species::Ion => self.gamma1,
            Species::Electron => self.gamma2,
        };
        PressureLaw::matched(self.p_prime(s), self.equilibrium_density(s), gamma)
    }

    pub fn sqrt_1pz(&self) -> f64 {
        (1.0 + self.z).sqrt()
    }

    pub fn sigma1(&self) -> f64 {
        ((self.z * self.p1_prime + self.p2_prime) / (1.0 + self.z)).sqrt()
    }

    pub fn sigma2(&self) -> f64 {
        ((self.p1_prime + self.z * self.p2_prime) / (1.0 + self.z)).sqrt()
    }

    /// κ values with μ₁ paired with ν₁.
    pub fn kappas_matched(&self) -> (f64, f64) {
        let (z, a1, a2) = (self.z, self.mu1 + self.nu1, self.mu2 + self.nu2);
        let k1 = (z * z * a1 + a2) / (2.0 * (1.0 + z));
        let k2 = z * (a1 + a2) / (2.0 * (1.0 + z));
        (k1, k2)
    }

    /// κ values exactly as typeset, with μ₁ paired with ν₂.
    pub fn kappas_as_printed(&self) -> (f64, f64) {
        let z = self.z;
        let k1 = (z * z * (self.mu1 + self.nu2) + self.mu2 + self.nu2) / (2.0 * (1.0 + z));
        let k2 = z * (self.mu1 + self.nu2 + self.mu2 + self.nu2) / (2.0 * (1.0 + z));
        (k1, k2)
    }
}

/// γ-law pressure P(ρ) = A ρ^γ, or isothermal P = A ρ when γ is absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    pub coeff: f64,
    pub gamma: f64,
}

impl PressureLaw {
    /// Fix A so that P′(ρ̄) equals `p_prime`.
    pub fn matched(p_prime: f64, rho_bar: f64, gamma: Option<f64>) -> Self {
        let gamma = gamma.unwrap_or(1.0);
        let coeff = p_prime / (gamma * rho_bar.powf(gamma - 1.0));
        PressureLaw { coeff, gamma }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.coeff * rho.powf(self.gamma)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        self.coeff * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// P(ρ̄+ϱ) − P(ρ̄) − P′(ρ̄)ϱ, evaluated without cancellation for small ϱ.
    pub fn remainder(&self, rho_bar: f64, varrho: f64) -> f64 {
        if self.gamma == 1.0 {
            return 0.0;
        }
        let x = varrho / rho_bar;
        let g = self.gamma;
        let base = self.coeff * rho_bar.powf(g);
        let tail = if x.abs() < 1e-3 {
            // (1+x)^γ − 1 − γx by its Taylor series
            let c2 = g * (g - 1.0) / 2.0;
            let c3 = c2 * (g - 2.0) / 3.0;
            let c4 = c3 * (g - 3.0) / 4.0;
            let c5 = c4 * (g - 4.0) / 5.0;
            x * x * (c2 + x * (c3 + x * (c4 + x * c5)))
        } else {
            (1.0 + x).powf(g) - 1.0 - g * x
        };
        base * tail
    }
}

/// Constants of the small-frequency eigenvalue expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    /// Damping of the fast pair, from the eigenvalue fit.
    pub kappa1: f64,
    /// Damping of the acoustic pair, from the eigenvalue fit.
    pub kappa2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    #[serde(rename = "sqrt_1pZ")]
    pub sqrt_1pz: f64,
    pub kappa1_printed: f64,
    pub kappa2_printed: f64,
    pub kappa1_matched: f64,
    pub kappa2_matched: f64,
    pub fit: symbol::KappaFit,
}

pub fn expansion_constants(params: &PhysicalParams) -> Result<ExpansionConstants> {
    params.validate()?;
    let fit = symbol::derive_kappas(params)?;
    let (k1p, k2p) = params.kappas_as_printed();
    let (k1m, k2m) = params.kappas_matched();
    Ok(ExpansionConstants {
        kappa1: fit.kappa1,
        kappa2: fit.kappa2,
        sigma1: params.sigma1(),
        sigma2: params.sigma2(),
        sqrt_1pz: params.sqrt_1pz(),
        kappa1_printed: k1p,
        kappa2_printed: k2p,
        kappa1_matched: k1m,
        kappa2_matched: k2m,
        fit,
    })
}
