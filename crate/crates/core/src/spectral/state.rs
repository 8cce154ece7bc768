use num_complex::Complex64;

use super::grid::SpectralGrid;
use super::ops::poisson_gradient;
use crate::error::Result;
use crate::params::Species;

pub const FIELD_NAMES: [&str; 8] = ["rho1", "m1x", "m1y", "m1z", "rho2", "m2x", "m2y", "m2z"];

/// Fourier coefficients of (ϱ₁, m₁, ϱ₂, m₂) on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub n: usize,
    pub box_len: f64,
    pub fields: [Vec<Complex64>; 8],
}

#[inline]
pub fn rho_slot(s: Species) -> usize {
    4 * s.index()
}

#[inline]
pub fn m_slot(s: Species, c: usize) -> usize {
    4 * s.index() + 1 + c
}

impl SpectralState {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        SpectralState {
            n: grid.n,
            box_len: grid.box_len,
            fields: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); grid.len()]),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rho(&self, s: Species) -> &[Complex64] {
        &self.fields[rho_slot(s)]
    }

    pub fn momentum(&self, s: Species) -> [&[Complex64]; 3] {
        std::array::from_fn(|c| self.fields[m_slot(s, c)].as_slice())
    }

    /// self += a·other
    pub fn axpy(&mut self, a: f64, other: &SpectralState) {
        for (f, g) in self.fields.iter_mut().zip(&other.fields) {
            for (x, y) in f.iter_mut().zip(g) {
                *x += a * y;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for f in self.fields.iter_mut() {
            for x in f.iter_mut() {
                *x *= a;
            }
        }
    }

    pub fn fill_zero(&mut self) {
        for f in self.fields.iter_mut() {
            f.fill(Complex64::new(0.0, 0.0));
        }
    }

    /// L² norm of the full state via Plancherel.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.fields.iter().flatten().map(|z| z.norm_sqr()).sum();
        (self.box_len.powi(3) * s).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.fields.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.fields.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest |f̂(−k) − conj f̂(k)| over all fields.
    pub fn hermitian_defect(&self, grid: &SpectralGrid) -> f64 {
        let mut d = 0.0f64;
        for f in &self.fields {
            for i in 0..f.len() {
                d = d.max((f[grid.conj_index(i)] - f[i].conj()).norm());
            }
        }
        d
    }

    /// |mean of Z·ϱ₁ − ϱ₂|.
    pub fn neutrality_residual(&self, z: f64) -> f64 {
        (z * self.fields[0][0] - self.fields[4][0]).norm()
    }

    /// ∫ ϱᵢ dx over the box.
    pub fn mass(&self, s: Species) -> f64 {
        self.box_len.powi(3) * self.rho(s)[0].re
    }

    pub fn grad_phi(&self, grid: &SpectralGrid, z: f64) -> Result<[Vec<Complex64>; 3]> {
        poisson_gradient(grid, self.rho(Species::Ion), self.rho(Species::Electron), z)
    }

    pub fn apply_mask(&mut self, mask: &[bool]) {
        for f in self.fields.iter_mut() {
            for (x, &keep) in f.iter_mut().zip(mask) {
                if !keep {
                    *x = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}
