use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::config::{Dealias, Form};
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, PressureLaw, Species};
use crate::spectral::{m_slot, rho_slot, SpectralGrid, SpectralState};
use crate::symbol;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Per-shell action of a function of the linear operator: a real 4×4 block on
/// (ϱ̂₁, n̂₁, ϱ̂₂, n̂₂) and a scalar on each incompressible part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellOp {
    pub block: Matrix4<f64>,
    pub heat: [f64; 2],
}

/// Right-hand side of the perturbation system on one periodic grid.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: PhysicalParams,
    pub grid: SpectralGrid,
    pub form: Form,
    pub nonlinear: bool,
    mask: Vec<bool>,
    k: [Vec<f64>; 3],
    k2: Vec<f64>,
    /// Index into `shells` for each mode.
    shell_of: Vec<u32>,
    /// Distinct integer |m|² over retained modes, ascending.
    shells: Vec<i64>,
    pressure: [PressureLaw; 2],
}

impl Model {
    pub fn new(params: PhysicalParams, grid: SpectralGrid, form: Form, dealias: Dealias, nonlinear: bool) -> Result<Self> {
        params.validate()?;
        let len = grid.len();
        let half = grid.n as i64 / 2;
        let mask: Vec<bool> = (0..len)
            .map(|i| match dealias {
                Dealias::TwoThirds => grid.retained(i),
                Dealias::None => grid.mode(i).iter().all(|m| m.abs() < half),
            })
            .collect();
        let mut k: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(len));
        let mut k2 = Vec::with_capacity(len);
        let mut m2 = Vec::with_capacity(len);
        for i in 0..len {
            let w = grid.wavevector(i);
            for d in 0..3 {
                k[d].push(w[d]);
            }
            k2.push(grid.k2(i));
            let m = grid.mode(i);
            m2.push(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
        }
        let mut shells: Vec<i64> = m2.iter().zip(&mask).filter(|(_, &keep)| keep).map(|(&s, _)| s).collect();
        shells.sort_unstable();
        shells.dedup();
        let shell_of = m2
            .iter()
            .map(|s| shells.binary_search(s).map(|p| p as u32).unwrap_or(u32::MAX))
            .collect();
        let pressure = [params.pressure_law(Species::Ion), params.pressure_law(Species::Electron)];
        Ok(Model {
            params,
            grid,
            form,
            nonlinear,
            mask,
            k,
            k2,
            shell_of,
            shells,
            pressure,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn shells(&self) -> &[i64] {
        &self.shells
    }

    pub fn shell_radius(&self, shell: i64) -> f64 {
        self.grid.dk() * (shell as f64).sqrt()
    }

    /// Factor relating the stored momentum slot to m: stored = scale·m.
    fn slot_scale(&self, s: Species) -> f64 {
        match (self.form, s) {
            (Form::Velocity, Species::Ion) => self.params.z,
            _ => 1.0,
        }
    }

    pub fn dealias(&self, state: &mut SpectralState) {
        state.apply_mask(&self.mask);
    }

    /// Linear part: pressure gradients, Poisson coupling, viscosity.
    pub fn linear(&self, state: &SpectralState) -> SpectralState {
        let p = &self.params;
        let z = p.z;
        let mut out = SpectralState {
            n: state.n,
            box_len: state.box_len,
            fields: std::array::from_fn(|_| vec![ZERO; state.len()]),
        };
        let r1 = rho_slot(Species::Ion);
        let r2 = rho_slot(Species::Electron);
        for i in 1..state.len() {
            if !self.mask[i] {
                continue;
            }
            let k = [self.k[0][i], self.k[1][i], self.k[2][i]];
            let k2 = self.k2[i];
            let c = z * state.fields[r1][i] - state.fields[r2][i];
            let g: [Complex64; 3] = std::array::from_fn(|d| -I * k[d] * c / k2);
            for s in Species::BOTH {
                let sc = self.slot_scale(s);
                let vs = p.viscous_scale(s);
                let (mu, nu, pp) = (vs * p.mu(s), vs * p.nu(s), p.p_prime(s));
                let sign = if s == Species::Ion { 1.0 } else { -1.0 };
                let rho = state.fields[rho_slot(s)][i];
                let m: [Complex64; 3] = std::array::from_fn(|d| state.fields[m_slot(s, d)][i] / sc);
                let km = k[0] * m[0] + k[1] * m[1] + k[2] * m[2];
                out.fields[rho_slot(s)][i] = -I * km;
                for d in 0..3 {
                    let dm = -I * k[d] * pp * rho + sign * g[d] - mu * k2 * m[d] - nu * k[d] * km;
                    out.fields[m_slot(s, d)][i] = sc * dm;
                }
            }
        }
        out
    }

    /// Nonlinear part, dealiased; zero when the model is linear.
    pub fn nonlinear(&self, state: &SpectralState) -> Result<SpectralState> {
        let mut out = match (self.nonlinear, self.form) {
            (false, _) => SpectralState {
                n: state.n,
                box_len: state.box_len,
                fields: std::array::from_fn(|_| vec![ZERO; state.len()]),
            },
            (true, Form::Momentum) => self.nonlinear_momentum(state)?,
            (true, Form::Velocity) => self.nonlinear_velocity(state)?,
        };
        self.dealias(&mut out);
        if !out.is_finite() {
            return Err(Error::NonFinite("nonlinear terms".into()));
        }
        Ok(out)
    }

    pub fn rhs(&self, state: &SpectralState) -> Result<SpectralState> {
        let mut out = self.nonlinear(state)?;
        out.axpy(1.0, &self.linear(state));
        Ok(out)
    }

    fn to_physical(&self, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            match pair {
                [a, b] => {
                    let (x, y) = self.grid.inverse_real_pair(a, b);
                    out.push(x);
                    out.push(y);
                }
                [a] => out.push(self.grid.inverse_real(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    fn to_spectral(&self, fields: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            match pair {
                [a, b] => {
                    let (x, y) = self.grid.forward_real_pair(a, b);
                    out.push(x);
                    out.push(y);
                }
                [a] => out.push(self.grid.forward_real(a)),
                _ => unreachable!(),
            }
        }
        out
    }

    fn check_vacuum(&self, s: Species, rho_bar: f64, varrho: &[f64]) -> Result<()> {
        let floor = 0.5 * rho_bar;
        let mut min = f64::INFINITY;
        for &v in varrho {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{} density", s.name())));
            }
            min = min.min(rho_bar + v);
        }
        if min <= floor {
            return Err(Error::Vacuum {
                species: s.name(),
                density: min,
                floor,
            });
        }
        Ok(())
    }

    fn nonlinear_momentum(&self, state: &SpectralState) -> Result<SpectralState> {
        let p = &self.params;
        let g = state.grad_phi(&self.grid, p.z)?;
        let inputs: Vec<&[Complex64]> = vec![
            &state.fields[0],
            &state.fields[4],
            &state.fields[1],
            &state.fields[2],
            &state.fields[3],
            &state.fields[5],
            &state.fields[6],
            &state.fields[7],
            &g[0],
            &g[1],
            &g[2],
        ];
        let phys = self.to_physical(&inputs);
        let len = self.grid.len();
        let gp = [&phys[8], &phys[9], &phys[10]];
        let mut products: Vec<Vec<f64>> = Vec::with_capacity(24);
        for s in Species::BOTH {
            let varrho = &phys[s.index()];
            let m = [&phys[2 + 3 * s.index()], &phys[3 + 3 * s.index()], &phys[4 + 3 * s.index()]];
            let rho_bar = p.equilibrium_density(s);
            self.check_vacuum(s, rho_bar, varrho)?;
            let q = p.charge(s);
            let law = &self.pressure[s.index()];
            // T_xx, T_yy, T_zz, T_xy, T_xz, T_yz, w_x, w_y, w_z, L_x, L_y, L_z
            let mut f: Vec<Vec<f64>> = (0..12).map(|_| Vec::with_capacity(len)).collect();
            for j in 0..len {
                let v = varrho[j];
                let inv = 1.0 / (rho_bar + v);
                let pi = law.remainder(rho_bar, v);
                let (mx, my, mz) = (m[0][j], m[1][j], m[2][j]);
                f[0].push(mx * mx * inv + pi);
                f[1].push(my * my * inv + pi);
                f[2].push(mz * mz * inv + pi);
                f[3].push(mx * my * inv);
                f[4].push(mx * mz * inv);
                f[5].push(my * mz * inv);
                let vi = v * inv;
                f[6].push(vi * mx);
                f[7].push(vi * my);
                f[8].push(vi * mz);
                f[9].push(q * v * gp[0][j]);
                f[10].push(q * v * gp[1][j]);
                f[11].push(q * v * gp[2][j]);
            }
            products.extend(f);
        }
        let spec = self.to_spectral(&products);
        let mut out = SpectralState {
            n: state.n,
            box_len: state.box_len,
            fields: std::array::from_fn(|_| vec![ZERO; len]),
        };
        for s in Species::BOTH {
            let b = &spec[12 * s.index()..12 * (s.index() + 1)];
            let vs = p.viscous_scale(s);
            let (mu, nu) = (vs * p.mu(s), vs * p.nu(s));
            for i in 0..len {
                if !self.mask[i] {
                    continue;
                }
                let k = [self.k[0][i], self.k[1][i], self.k[2][i]];
                let k2 = self.k2[i];
                let t = [
                    [b[0][i], b[3][i], b[4][i]],
                    [b[3][i], b[1][i], b[5][i]],
                    [b[4][i], b[5][i], b[2][i]],
                ];
                let w = [b[6][i], b[7][i], b[8][i]];
                let kw = k[0] * w[0] + k[1] * w[1] + k[2] * w[2];
                for a in 0..3 {
                    let div_t = k[0] * t[0][a] + k[1] * t[1][a] + k[2] * t[2][a];
                    out.fields[m_slot(s, a)][i] = b[9 + a][i] - I * div_t + mu * k2 * w[a] + nu * k[a] * kw;
                }
            }
        }
        Ok(out)
    }

    fn nonlinear_velocity(&self, state: &SpectralState) -> Result<SpectralState> {
        let p = &self.params;
        let len = self.grid.len();
        let mut out = SpectralState {
            n: state.n,
            box_len: state.box_len,
            fields: std::array::from_fn(|_| vec![ZERO; len]),
        };
        for s in Species::BOTH {
            let rho_hat = &state.fields[rho_slot(s)];
            let u_hat: [&[Complex64]; 3] = std::array::from_fn(|d| state.fields[m_slot(s, d)].as_slice());
            // ϱ, u(3), ∇ϱ(3), ∇u(9, row a = component, col b = derivative), Δu(3), ∇div u(3)
            let mut spec: Vec<Vec<Complex64>> = Vec::with_capacity(22);
            spec.push(rho_hat.to_vec());
            for d in 0..3 {
                spec.push(u_hat[d].to_vec());
            }
            for d in 0..3 {
                spec.push((0..len).map(|i| I * self.k[d][i] * rho_hat[i]).collect());
            }
            for a in 0..3 {
                for b in 0..3 {
                    spec.push((0..len).map(|i| I * self.k[b][i] * u_hat[a][i]).collect());
                }
            }
            for a in 0..3 {
                spec.push((0..len).map(|i| -self.k2[i] * u_hat[a][i]).collect());
            }
            for a in 0..3 {
                spec.push(
                    (0..len)
                        .map(|i| {
                            let ku = self.k[0][i] * u_hat[0][i] + self.k[1][i] * u_hat[1][i] + self.k[2][i] * u_hat[2][i];
                            -self.k[a][i] * ku
                        })
                        .collect(),
                );
            }
            let refs: Vec<&[Complex64]> = spec.iter().map(|v| v.as_slice()).collect();
            let f = self.to_physical(&refs);
            let rho_bar = p.equilibrium_density(s);
            self.check_vacuum(s, rho_bar, &f[0])?;
            let law = &self.pressure[s.index()];
            let lin = law.derivative(rho_bar) / rho_bar;
            let vs = p.viscous_scale(s);
            let (mu, nu) = (vs * p.mu(s), vs * p.nu(s));
            // flux ϱu (3) and N^u (3)
            let mut prod: Vec<Vec<f64>> = (0..6).map(|_| Vec::with_capacity(len)).collect();
            for j in 0..len {
                let v = f[0][j];
                let rho = rho_bar + v;
                let u = [f[1][j], f[2][j], f[3][j]];
                let coef = law.derivative(rho) / rho - lin;
                let vr = v / rho;
                for a in 0..3 {
                    prod[a].push(v * u[a]);
                    let adv = u[0] * f[7 + 3 * a][j] + u[1] * f[8 + 3 * a][j] + u[2] * f[9 + 3 * a][j];
                    let n_u = -adv - coef * f[4 + a][j] - mu * vr * f[16 + a][j] - nu * vr * f[19 + a][j];
                    prod[3 + a].push(n_u);
                }
            }
            let ps = self.to_spectral(&prod);
            for i in 0..len {
                if !self.mask[i] {
                    continue;
                }
                let div = self.k[0][i] * ps[0][i] + self.k[1][i] * ps[1][i] + self.k[2][i] * ps[2][i];
                out.fields[rho_slot(s)][i] = -I * div;
                for a in 0..3 {
                    out.fields[m_slot(s, a)][i] = ps[3 + a][i];
                }
            }
        }
        Ok(out)
    }

    /// The symbol block on a shell.
    pub fn symbol_block(&self, shell: i64) -> Result<Matrix4<f64>> {
        Ok(symbol::build_symbol(&self.params, self.shell_radius(shell))?.entries)
    }

    fn heat_rates(&self, shell: i64) -> [f64; 2] {
        let r2 = self.grid.dk().powi(2) * shell as f64;
        [
            self.params.heat_coefficient(Species::Ion) * r2,
            self.params.heat_coefficient(Species::Electron) * r2,
        ]
    }

    /// e^{hL} on every retained shell.
    pub fn exp_ops(&self, h: f64) -> Result<Vec<ShellOp>> {
        self.shells
            .iter()
            .map(|&s| {
                if s == 0 {
                    return Ok(ShellOp { block: Matrix4::identity(), heat: [1.0, 1.0] });
                }
                let a = self.symbol_block(s)?;
                let rates = self.heat_rates(s);
                Ok(ShellOp {
                    block: (a * h).exp(),
                    heat: rates.map(|c| (-c * h).exp()),
                })
            })
            .collect()
    }

    /// (I − hL)⁻¹ on every retained shell.
    pub fn resolvent_ops(&self, h: f64) -> Result<Vec<ShellOp>> {
        self.shells
            .iter()
            .map(|&s| {
                if s == 0 {
                    return Ok(ShellOp { block: Matrix4::identity(), heat: [1.0, 1.0] });
                }
                let a = self.symbol_block(s)?;
                let m = Matrix4::identity() - a * h;
                let block = m
                    .try_inverse()
                    .ok_or_else(|| Error::Config(format!("singular implicit solve on shell {s}")))?;
                let rates = self.heat_rates(s);
                Ok(ShellOp {
                    block,
                    heat: rates.map(|c| 1.0 / (1.0 + c * h)),
                })
            })
            .collect()
    }

    /// Apply per-shell operators mode by mode through the div–curl split.
    pub fn apply_ops(&self, ops: &[ShellOp], state: &SpectralState) -> SpectralState {
        let len = state.len();
        let mut out = SpectralState {
            n: state.n,
            box_len: state.box_len,
            fields: std::array::from_fn(|_| vec![ZERO; len]),
        };
        let scale = [self.slot_scale(Species::Ion), self.slot_scale(Species::Electron)];
        for i in 0..len {
            if !self.mask[i] {
                continue;
            }
            let op = &ops[self.shell_of[i] as usize];
            if self.k2[i] == 0.0 {
                for f in 0..8 {
                    out.fields[f][i] = state.fields[f][i];
                }
                continue;
            }
            let kk = self.k2[i].sqrt();
            let kh = [self.k[0][i] / kk, self.k[1][i] / kk, self.k[2][i] / kk];
            let mut v = Vector4::<Complex64>::zeros();
            let mut perp = [[ZERO; 3]; 2];
            for s in Species::BOTH {
                let si = s.index();
                let m: [Complex64; 3] = std::array::from_fn(|d| state.fields[m_slot(s, d)][i] / scale[si]);
                let km = kh[0] * m[0] + kh[1] * m[1] + kh[2] * m[2];
                v[2 * si] = state.fields[rho_slot(s)][i];
                v[2 * si + 1] = I * km;
                for d in 0..3 {
                    perp[si][d] = m[d] - kh[d] * km;
                }
            }
            let b = &op.block;
            for s in Species::BOTH {
                let si = s.index();
                let mut rho = ZERO;
                let mut n = ZERO;
                for c in 0..4 {
                    rho += b[(2 * si, c)] * v[c];
                    n += b[(2 * si + 1, c)] * v[c];
                }
                out.fields[rho_slot(s)][i] = rho;
                for d in 0..3 {
                    out.fields[m_slot(s, d)][i] = scale[si] * (-I * kh[d] * n + op.heat[si] * perp[si][d]);
                }
            }
        }
        out
    }

    /// Compressible components (ϱ̂₁, n̂₁, ϱ̂₂, n̂₂) of mode `idx` in momentum units.
    pub fn compressible(&self, state: &SpectralState, idx: usize) -> Vector4<Complex64> {
        let kk = self.k2[idx].sqrt();
        let mut v = Vector4::zeros();
        for s in Species::BOTH {
            let si = s.index();
            let sc = self.slot_scale(s);
            v[2 * si] = state.fields[rho_slot(s)][idx];
            if kk > 0.0 {
                let mut km = ZERO;
                for d in 0..3 {
                    km += self.k[d][idx] / kk * state.fields[m_slot(s, d)][idx] / sc;
                }
                v[2 * si + 1] = I * km;
            }
        }
        v
    }

    /// Physical samples of the fields, paired through complex transforms.
    pub fn physical(&self, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
        self.to_physical(fields)
    }

    pub fn spectral(&self, fields: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
        self.to_spectral(fields)
    }
}

/// Convert a momentum-form state to velocity unknowns uᵢ = mᵢ/ρᵢ.
pub fn momentum_to_velocity(model: &Model, state: &SpectralState) -> SpectralState {
    convert(model, state, true)
}

/// Convert velocity unknowns back to momenta mᵢ = ρᵢuᵢ.
pub fn velocity_to_momentum(model: &Model, state: &SpectralState) -> SpectralState {
    convert(model, state, false)
}

fn convert(model: &Model, state: &SpectralState, divide: bool) -> SpectralState {
    let mut out = state.clone();
    for s in Species::BOTH {
        let rho_bar = model.params.equilibrium_density(s);
        let refs: Vec<&[Complex64]> = vec![
            &state.fields[rho_slot(s)],
            &state.fields[m_slot(s, 0)],
            &state.fields[m_slot(s, 1)],
            &state.fields[m_slot(s, 2)],
        ];
        let f = model.physical(&refs);
        let prods: Vec<Vec<f64>> = (1..4)
            .map(|c| {
                f[0].iter()
                    .zip(&f[c])
                    .map(|(&v, &x)| if divide { x / (rho_bar + v) } else { x * (rho_bar + v) })
                    .collect()
            })
            .collect();
        let back = model.spectral(&prods);
        for (d, b) in back.into_iter().enumerate() {
            out.fields[m_slot(s, d)] = b;
        }
    }
    out.apply_mask(model.mask());
    out
}
