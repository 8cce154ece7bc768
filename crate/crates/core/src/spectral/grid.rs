use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Cubic periodic grid of N³ points on [0, L)³ with its FFT plans.
///
/// Coefficients are stored row-major with z fastest, at index
/// `(ix·N + iy)·N + iz`, and normalised so f(x) = Σ f̂(k) e^{ik·x}.
#[derive(Clone)]
pub struct SpectralGrid {
    pub n: usize,
    pub box_len: f64,
    k1d: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.n)
            .field("box_len", &self.box_len)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size {n} must be a power of two ≥ 4")));
        }
        if !(box_len > 0.0 && box_len.is_finite()) {
            return Err(Error::Config(format!("box length {box_len} must be positive")));
        }
        let dk = 2.0 * PI / box_len;
        let k1d = (0..n).map(|i| dk * signed_index(i, n) as f64).collect();
        let mut planner = FftPlanner::new();
        Ok(SpectralGrid {
            n,
            box_len,
            k1d,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_len
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    #[inline]
    pub fn split_index(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer wavevector in units of 2π/L.
    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let (ix, iy, iz) = self.split_index(idx);
        [
            signed_index(ix, self.n),
            signed_index(iy, self.n),
            signed_index(iz, self.n),
        ]
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.split_index(idx);
        [self.k1d[ix], self.k1d[iy], self.k1d[iz]]
    }

    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Index of the mode −k.
    #[inline]
    pub fn conj_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (ix, iy, iz) = self.split_index(idx);
        self.index((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }

    /// Largest retained |kᵢ| (in grid units) under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n as f64 / 3.0 - 0.5).floor() as i64
    }

    /// Whether a mode survives 2/3-rule truncation.
    #[inline]
    pub fn retained(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff();
        self.mode(idx).iter().all(|m| m.abs() <= c)
    }

    pub fn dealias_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.retained(i)).collect()
    }

    /// Physical samples to coefficients, in place.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Coefficients to physical samples, in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "field length does not match grid");
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for ix in 0..n {
            let slab = &mut data[ix * n * n..(ix + 1) * n * n];
            for iy in 0..n {
                for iz in 0..n {
                    buf[iz * n + iy] = slab[iy * n + iz];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for iy in 0..n {
                for iz in 0..n {
                    slab[iy * n + iz] = buf[iz * n + iy];
                }
            }
        }
        for iy in 0..n {
            for ix in 0..n {
                for iz in 0..n {
                    buf[iz * n + ix] = data[(ix * n + iy) * n + iz];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for ix in 0..n {
                for iz in 0..n {
                    data[(ix * n + iy) * n + iz] = buf[iz * n + ix];
                }
            }
        }
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut c: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut c);
        symmetrize(self, &mut c);
        c
    }

    /// Coefficients of two real fields from one complex transform.
    pub fn forward_real_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut c: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.forward_in_place(&mut c);
        let mut fa = vec![Complex64::new(0.0, 0.0); c.len()];
        let mut fb = vec![Complex64::new(0.0, 0.0); c.len()];
        for i in 0..c.len() {
            let cj = c[self.conj_index(i)].conj();
            fa[i] = 0.5 * (c[i] + cj);
            let d = 0.5 * (c[i] - cj);
            fb[i] = Complex64::new(d.im, -d.re);
        }
        (fa, fb)
    }

    pub fn inverse_real(&self, f: &[Complex64]) -> Vec<f64> {
        let mut c = f.to_vec();
        self.inverse_in_place(&mut c);
        c.iter().map(|z| z.re).collect()
    }

    /// Physical samples of two Hermitian coefficient sets from one transform.
    pub fn inverse_real_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let mut c: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x + Complex64::new(-y.im, y.re))
            .collect();
        self.inverse_in_place(&mut c);
        (c.iter().map(|z| z.re).collect(), c.iter().map(|z| z.im).collect())
    }

    /// Physical coordinates of sample `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.split_index(idx);
        let h = self.box_len / self.n as f64;
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }
}

/// Enforce f̂(−k) = conj f̂(k) exactly by averaging.
pub fn symmetrize(grid: &SpectralGrid, c: &mut [Complex64]) {
    for i in 0..c.len() {
        let j = grid.conj_index(i);
        if j < i {
            continue;
        }
        let avg = 0.5 * (c[i] + c[j].conj());
        c[i] = avg;
        c[j] = avg.conj();
    }
}

#[inline]
fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}
