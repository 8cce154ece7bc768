use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Form, SimConfig};
use super::model::{momentum_to_velocity, velocity_to_momentum, Model};
use crate::error::Result;
use crate::params::Species;
use crate::spectral::{m_slot, rho_slot, sobolev_norm_joint, CutoffSpec, SpectralState};

/// ‖∇ᵏ·‖ of each field at one derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSet {
    pub rho1: f64,
    pub m1: f64,
    pub rho2: f64,
    pub m2: f64,
    pub grad_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagEntry {
    pub t: f64,
    pub step: u64,
    /// Index k holds the order-k seminorms.
    pub norms: Vec<NormSet>,
    /// ½∫(Z|m₁|² + ZP₁′ϱ₁² + |m₂|² + P₂′ϱ₂² + |∇φ|²), nonincreasing for the linear system.
    pub linear_energy: f64,
    /// ‖(ϱ₁,u₁,ϱ₂,u₂,∇φ)‖²_{H^l} plus the accumulated dissipation integral.
    pub energy_functional: f64,
    /// Running supremum of the time-weighted norms.
    pub m_functional: f64,
    /// High-frequency functional at order l.
    pub l_functional: f64,
    /// ∫ρᵢ over the box, equilibrium included.
    pub mass1: f64,
    pub mass2: f64,
    pub neutrality: f64,
}

impl DiagEntry {
    pub fn csv_header(order: u32) -> String {
        let mut cols = vec!["t".to_string(), "step".to_string()];
        for k in 0..=order {
            for f in ["rho1", "m1", "rho2", "m2", "grad_phi"] {
                cols.push(format!("{f}_k{k}"));
            }
        }
        cols.extend(
            [
                "linear_energy",
                "energy_functional",
                "m_functional",
                "l_functional",
                "mass1",
                "mass2",
                "neutrality",
            ]
            .map(String::from),
        );
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        let mut cols = vec![f(self.t), self.step.to_string()];
        for n in &self.norms {
            cols.extend([f(n.rho1), f(n.m1), f(n.rho2), f(n.m2), f(n.grad_phi)]);
        }
        cols.extend(
            [
                self.linear_energy,
                self.energy_functional,
                self.m_functional,
                self.l_functional,
                self.mass1,
                self.mass2,
                self.neutrality,
            ]
            .map(f),
        );
        cols.join(",")
    }
}

/// Accumulates diagnostics across a run.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub order: u32,
    pub weight_p: f64,
    pub cutoff: CutoffSpec,
    pub entries: Vec<DiagEntry>,
    dissipation_integral: f64,
    last_dissipation: Option<(f64, f64)>,
    m_sup: f64,
}

fn rho(s: &SpectralState, sp: Species) -> &[Complex64] {
    s.fields[rho_slot(sp)].as_slice()
}

fn vec3(s: &SpectralState, sp: Species) -> [&[Complex64]; 3] {
    std::array::from_fn(|d| s.fields[m_slot(sp, d)].as_slice())
}

impl Diagnostics {
    pub fn new(cfg: &SimConfig) -> Self {
        Diagnostics {
            order: cfg.diag_order,
            weight_p: cfg.weight_p,
            cutoff: cfg.cutoff,
            entries: Vec::new(),
            dissipation_integral: 0.0,
            last_dissipation: None,
            m_sup: 0.0,
        }
    }

    pub fn record(&mut self, model: &Model, state: &SpectralState, t: f64, step: u64) -> Result<&DiagEntry> {
        let (mom, vel) = match model.form {
            Form::Momentum => (state.clone(), momentum_to_velocity(model, state)),
            Form::Velocity => (velocity_to_momentum(model, state), state.clone()),
        };
        let p = &model.params;
        let grid = &model.grid;
        let g = mom.grad_phi(grid, p.z)?;
        let g_ref: [&[Complex64]; 3] = [&g[0], &g[1], &g[2]];
        let l = self.order;
        let (i, e) = (Species::Ion, Species::Electron);
        let norm = |fields: &[&[Complex64]], k: u32| sobolev_norm_joint(grid, fields, k);

        let norms: Vec<NormSet> = (0..=l)
            .map(|k| NormSet {
                rho1: norm(&[rho(&mom, i)], k),
                m1: norm(&vec3(&mom, i), k),
                rho2: norm(&[rho(&mom, e)], k),
                m2: norm(&vec3(&mom, e), k),
                grad_phi: norm(&g_ref, k),
            })
            .collect();

        let linear_energy = 0.5
            * (p.z * norms[0].m1.powi(2)
                + p.z * p.p1_prime * norms[0].rho1.powi(2)
                + norms[0].m2.powi(2)
                + p.p2_prime * norms[0].rho2.powi(2)
                + norms[0].grad_phi.powi(2));

        let sq = |fields: &[&[Complex64]], k: u32| norm(fields, k).powi(2);
        let (u1, u2) = (vec3(&vel, i), vec3(&vel, e));
        let mut state_part = 0.0;
        for k in 0..=l {
            state_part += sq(&[rho(&mom, i), rho(&mom, e)], k) + sq(&u1, k) + sq(&u2, k) + sq(&g_ref, k);
        }
        let mut dissipation = 0.0;
        for k in 1..=l {
            dissipation += sq(&[rho(&mom, i), rho(&mom, e)], k) + sq(&g_ref, k);
        }
        for k in 1..=l + 1 {
            dissipation += sq(&u1, k) + sq(&u2, k);
        }
        if let Some((t0, d0)) = self.last_dissipation {
            self.dissipation_integral += 0.5 * (t - t0) * (d0 + dissipation);
        }
        self.last_dissipation = Some((t, dissipation));
        let energy_functional = state_part + self.dissipation_integral;

        let q = 1.5 * (1.0 / self.weight_p - 0.5);
        let mut weighted = 0.0;
        for (k, n) in norms.iter().enumerate() {
            let kf = k as f64;
            let dens = (n.rho1.powi(2) + n.rho2.powi(2)).sqrt();
            let mom_phi = (n.m1.powi(2) + n.m2.powi(2) + n.grad_phi.powi(2)).sqrt();
            weighted += (1.0 + t).powf(0.75 + 0.5 * kf) * dens + (1.0 + t).powf(q + 0.5 * kf) * mom_phi;
        }
        self.m_sup = self.m_sup.max(weighted);

        let l_functional = self.high_frequency_functional(model, &mom, &vel, &g);

        let entry = DiagEntry {
            t,
            step,
            norms,
            linear_energy,
            energy_functional,
            m_functional: self.m_sup,
            l_functional,
            mass1: grid.volume() * p.equilibrium_density(i) + mom.mass(i),
            mass2: grid.volume() * p.equilibrium_density(e) + mom.mass(e),
            neutrality: mom.neutrality_residual(p.z),
        };
        self.entries.push(entry);
        Ok(self.entries.last().expect("just pushed"))
    }

    fn high_frequency_functional(
        &self,
        model: &Model,
        mom: &SpectralState,
        vel: &SpectralState,
        g: &[Vec<Complex64>; 3],
    ) -> f64 {
        let p = &model.params;
        let grid = &model.grid;
        let l = self.order as i32;
        let c4 = 0.25 * p.mu1.min(p.mu2);
        let coef = [p.z * p.p1_prime, p.p2_prime];
        let mut cross = 0.0;
        let mut quad = 0.0;
        for idx in 0..grid.len() {
            let k2 = grid.k2(idx);
            if k2 == 0.0 {
                continue;
            }
            let high = 1.0 - self.cutoff.value(k2.sqrt());
            if high == 0.0 {
                continue;
            }
            let h2 = high * high;
            let kl = k2.powi(l);
            let kl1 = k2.powi(l - 1);
            let k = grid.wavevector(idx);
            for s in Species::BOTH {
                let r = mom.fields[rho_slot(s)][idx];
                let u: [Complex64; 3] = std::array::from_fn(|d| vel.fields[m_slot(s, d)][idx]);
                let ku = k[0] * u[0].conj() + k[1] * u[1].conj() + k[2] * u[2].conj();
                cross += c4 * h2 * kl1 * (Complex64::i() * r * ku).re;
                let u2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
                quad += 0.5 * h2 * kl * (coef[s.index()] * r.norm_sqr() + u2);
            }
            let g2: f64 = (0..3).map(|d| g[d][idx].norm_sqr()).sum();
            quad += 0.5 * h2 * kl * g2;
        }
        grid.volume() * (cross + quad)
    }
}
