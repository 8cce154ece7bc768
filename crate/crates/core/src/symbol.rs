//! The 4×4 Fourier symbol of the compressible subsystem in the variables
//! (ϱ₁, n₁, ϱ₂, n₂), its characteristic quartic, spectrum and semigroup.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

pub type CMat4 = Matrix4<Complex64>;
pub type CVec4 = Vector4<Complex64>;

/// Eigenvalue pairs closer than this are treated as coincident.
pub const DEGENERACY_GAP: f64 = 1e-8;

const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolMatrix {
    pub r: f64,
    pub entries: Matrix4<f64>,
}

impl SymbolMatrix {
    pub fn complex(&self) -> CMat4 {
        self.entries.map(|x| Complex64::new(x, 0.0))
    }
}

pub fn build_symbol(params: &PhysicalParams, r: f64) -> Result<SymbolMatrix> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain { r });
    }
    let z = params.z;
    let a1 = params.mu1 + params.nu1;
    let a2 = params.mu2 + params.nu2;
    #[rustfmt::skip]
    let entries = Matrix4::new(
        0.0,                          -r,                0.0,                               0.0,
        z / r + params.p1_prime * r,  -a1 * z * r * r,  -1.0 / r,                           0.0,
        0.0,                           0.0,              0.0,                              -r,
        -z / r,                        0.0,              1.0 / r + params.p2_prime * r,    -a2 * r * r,
    );
    Ok(SymbolMatrix { r, entries })
}

/// Monic quartic λ⁴ + c3 λ³ + c2 λ² + c1 λ + c0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn eval_deriv(&self, x: Complex64) -> Complex64 {
        ((4.0 * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1
    }

    fn companion(&self) -> Matrix4<f64> {
        #[rustfmt::skip]
        let m = Matrix4::new(
            -self.c3, -self.c2, -self.c1, -self.c0,
            1.0,       0.0,      0.0,      0.0,
            0.0,       1.0,      0.0,      0.0,
            0.0,       0.0,      1.0,      0.0,
        );
        m
    }
}

pub fn char_poly(params: &PhysicalParams, r: f64) -> Result<QuarticCoeffs> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain { r });
    }
    let z = params.z;
    let a1 = params.mu1 + params.nu1;
    let a2 = params.mu2 + params.nu2;
    let (p1, p2) = (params.p1_prime, params.p2_prime);
    let r2 = r * r;
    let r4 = r2 * r2;
    Ok(QuarticCoeffs {
        c3: (z * a1 + a2) * r2,
        c2: z * a1 * a2 * r4 + (p1 + p2) * r2 + 1.0 + z,
        c1: (z * a1 * p2 + a2 * p1) * r4 + z * (a1 + a2) * r2,
        c0: p1 * p2 * r4 + (p1 + z * p2) * r2,
    })
}

/// Four ordered roots of the characteristic quartic.
///
/// Order: fast pair (+Im, −Im), then acoustic pair (+Im, −Im). The pair
/// with the larger imaginary magnitude is the fast one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub lambdas: [Complex64; 4],
    pub min_gap: f64,
    pub well_separated: bool,
}

pub fn eigenvalues(coeffs: &QuarticCoeffs) -> Result<Spectrum> {
    let raw = coeffs.companion().complex_eigenvalues();
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (i, z) in raw.iter().enumerate() {
        roots[i] = polish(coeffs, *z);
    }
    for &l in &roots {
        let residual = coeffs.eval(l).norm();
        let bound = ROOT_TOL * l.norm().powi(4).max(1.0);
        if !(residual <= bound) {
            return Err(Error::RootCheck { residual, bound });
        }
    }
    let mut lambdas = order_branches(roots);
    resolve_clusters(coeffs, &mut lambdas);
    let min_gap = min_gap(&lambdas);
    Ok(Spectrum {
        lambdas,
        min_gap,
        well_separated: min_gap >= DEGENERACY_GAP,
    })
}

/// Newton polishing, kept only while the residual decreases.
fn polish(coeffs: &QuarticCoeffs, mut x: Complex64) -> Complex64 {
    let mut res = coeffs.eval(x).norm();
    for _ in 0..4 {
        let d = coeffs.eval_deriv(x);
        if d.norm() == 0.0 {
            break;
        }
        let next = x - coeffs.eval(x) / d;
        let next_res = coeffs.eval(next).norm();
        if !next.re.is_finite() || !next.im.is_finite() || next_res >= res {
            break;
        }
        x = next;
        res = next_res;
    }
    x
}

/// Pairs closer than this are tested for a numerically double root.
const CLUSTER_GAP: f64 = 1e-6;

/// Companion eigenvalues split a double root by O(√ε). For a close pair,
/// locate the critical point m of p between them and estimate the true
/// separation 2√(2|p(m)|/|p″(m)|), counting |p(m)| below the rounding level
/// of the evaluation as zero. Pairs estimated below the degeneracy gap are
/// collapsed onto m.
fn resolve_clusters(coeffs: &QuarticCoeffs, l: &mut [Complex64; 4]) {
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (l[i] - l[j]).norm();
            if d == 0.0 || d >= CLUSTER_GAP {
                continue;
            }
            let mut m = 0.5 * (l[i] + l[j]);
            for _ in 0..8 {
                let dd = second_deriv(coeffs, m);
                if dd.norm() == 0.0 {
                    break;
                }
                let step = coeffs.eval_deriv(m) / dd;
                m -= step;
                if step.norm() <= 1e-17 * m.norm().max(1.0) {
                    break;
                }
            }
            if (m - 0.5 * (l[i] + l[j])).norm() > d {
                continue;
            }
            let pm = coeffs.eval(m).norm();
            let noise = 8.0 * f64::EPSILON * eval_scale(coeffs, m.norm());
            let pm = if pm <= noise { 0.0 } else { pm };
            let dd = second_deriv(coeffs, m).norm();
            if dd == 0.0 {
                continue;
            }
            let est = 2.0 * (2.0 * pm / dd).sqrt();
            if est < DEGENERACY_GAP {
                l[i] = m;
                l[j] = m;
            }
        }
    }
}

fn second_deriv(c: &QuarticCoeffs, x: Complex64) -> Complex64 {
    (12.0 * x + 6.0 * c.c3) * x + 2.0 * c.c2
}

/// Σ |cₖ| |x|^k, the magnitude scale of a Horner evaluation.
fn eval_scale(c: &QuarticCoeffs, x: f64) -> f64 {
    (((x + c.c3.abs()) * x + c.c2.abs()) * x + c.c1.abs()) * x + c.c0.abs()
}

fn order_branches(mut roots: [Complex64; 4]) -> [Complex64; 4] {
    roots.sort_by(|a, b| {
        b.im.abs()
            .total_cmp(&a.im.abs())
            .then(b.re.total_cmp(&a.re))
    });
    let (mut fast, mut slow) = ([roots[0], roots[1]], [roots[2], roots[3]]);
    let by_im = |p: &mut [Complex64; 2]| {
        if p[1].im > p[0].im || (p[1].im == p[0].im && p[1].re > p[0].re) {
            p.swap(0, 1);
        }
    };
    by_im(&mut fast);
    by_im(&mut slow);
    [fast[0], fast[1], slow[0], slow[1]]
}

fn min_gap(l: &[Complex64; 4]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            gap = gap.min((l[i] - l[j]).norm());
        }
    }
    gap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub r: f64,
    pub lambdas: [Complex64; 4],
    pub projectors: [CMat4; 4],
    pub min_gap: f64,
    pub well_separated: bool,
}

/// Spectral projectors Pᵢ with Σ Pᵢ = I and A = Σ λᵢ Pᵢ.
///
/// For simple eigenvalues Pᵢ = Π_{j≠i}(A − λⱼ)/(λᵢ − λⱼ) equals the rank-one
/// matrix vᵢwᵢᵀ/(wᵢᵀvᵢ). The rank-one form is used: with right and left
/// eigenvectors written in closed form it avoids the O(ε/r²) cancellation
/// the product form suffers at small r.
pub fn projectors(a: &SymbolMatrix, lambdas: &[Complex64; 4]) -> Result<EigenSystem> {
    let gap = min_gap(lambdas);
    if !(gap >= DEGENERACY_GAP) {
        return Err(Error::Degenerate { r: a.r, gap });
    }
    let e = &a.entries;
    let r = a.r;
    // recover the parameter combinations from the entries
    let z = -e[(3, 0)] * r;
    let d1 = -e[(1, 1)];
    let d2 = -e[(3, 3)];
    let zp1 = e[(1, 0)] * r;
    let projectors = std::array::from_fn(|i| {
        let l = lambdas[i];
        let q = (l + d1) * l + zp1;
        let v = CVec4::new(Complex64::new(r, 0.0), -l, q * r, -l * q);
        let w = CVec4::new(-(l + d1), Complex64::new(r, 0.0), -(l + d2) * q / z, q * (r / z));
        let norm = w.dot(&v);
        v * w.transpose() / norm
    });
    Ok(EigenSystem {
        r,
        lambdas: *lambdas,
        projectors,
        min_gap: gap,
        well_separated: true,
    })
}

/// The product form Π_{j≠i}(A − λⱼ)/(λᵢ − λⱼ), kept as a cross-check.
pub fn projectors_lagrange(a: &SymbolMatrix, lambdas: &[Complex64; 4]) -> Result<[CMat4; 4]> {
    let gap = min_gap(lambdas);
    if !(gap >= DEGENERACY_GAP) {
        return Err(Error::Degenerate { r: a.r, gap });
    }
    let ac = a.complex();
    let id = CMat4::identity();
    let shifted: [CMat4; 4] = std::array::from_fn(|j| ac - id * lambdas[j]);
    Ok(std::array::from_fn(|i| {
        let mut p = id;
        for j in 0..4 {
            if j != i {
                p = p * shifted[j] / (lambdas[i] - lambdas[j]);
            }
        }
        p
    }))
}

/// Spectrum and projectors at one radial frequency.
pub fn eigensystem(params: &PhysicalParams, r: f64) -> Result<EigenSystem> {
    let a = build_symbol(params, r)?;
    let spec = eigenvalues(&char_poly(params, r)?)?;
    projectors(&a, &spec.lambdas)
}

pub fn semigroup(eig: &EigenSystem, t: f64) -> Result<CMat4> {
    if !eig.well_separated {
        return Err(Error::Degenerate {
            r: eig.r,
            gap: eig.min_gap,
        });
    }
    Ok(eig.semigroup(t))
}

impl EigenSystem {
    pub fn semigroup(&self, t: f64) -> CMat4 {
        let mut s = CMat4::zeros();
        for (l, p) in self.lambdas.iter().zip(&self.projectors) {
            s += p * (l * t).exp();
        }
        s
    }

    pub fn apply(&self, t: f64, u0: &CVec4) -> CVec4 {
        let mut out = CVec4::zeros();
        for (l, p) in self.lambdas.iter().zip(&self.projectors) {
            out += (p * u0) * (l * t).exp();
        }
        out
    }

    pub fn residuals(&self, a: &SymbolMatrix) -> ProjectorResiduals {
        let id = CMat4::identity();
        let max_abs = |m: &CMat4| m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let sum: CMat4 = self.projectors.iter().sum();
        let mut idempotence = 0.0f64;
        let mut orthogonality = 0.0f64;
        for i in 0..4 {
            let pi = &self.projectors[i];
            idempotence = idempotence.max(max_abs(&(pi * pi - pi)));
            for j in 0..4 {
                if i != j {
                    orthogonality = orthogonality.max(max_abs(&(pi * self.projectors[j])));
                }
            }
        }
        let mut recon = a.complex();
        for (l, p) in self.lambdas.iter().zip(&self.projectors) {
            recon -= p * *l;
        }
        ProjectorResiduals {
            identity: max_abs(&(sum - id)),
            idempotence,
            orthogonality,
            reconstruction: max_abs(&recon),
        }
    }
}

/// Max-norm residuals of the projector identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorResiduals {
    pub identity: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    pub reconstruction: f64,
}

impl ProjectorResiduals {
    pub fn max(&self) -> f64 {
        self.identity
            .max(self.idempotence)
            .max(self.orthogonality)
            .max(self.reconstruction)
    }
}

/// e^{tA} by projectors when the spectrum is separated, otherwise by a
/// direct matrix exponential.
pub fn propagator(params: &PhysicalParams, r: f64, t: f64) -> Result<CMat4> {
    let a = build_symbol(params, r)?;
    let spec = eigenvalues(&char_poly(params, r)?)?;
    if spec.well_separated {
        Ok(projectors(&a, &spec.lambdas)?.semigroup(t))
    } else {
        Ok((a.entries * t).exp().map(|x| Complex64::new(x, 0.0)))
    }
}

/// Fitted small-r expansion constants with remainder diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaFit {
    pub kappa1: f64,
    pub kappa2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Limit of Im λ₁ as r → 0.
    pub omega0: f64,
    /// Log-log slope of the remainder; `None` when the remainder is below
    /// rounding level at every node (the expansion is exact there).
    pub exponent_re_fast: Option<f64>,
    pub exponent_re_acoustic: Option<f64>,
    pub exponent_im_acoustic: Option<f64>,
    pub exponent_im_fast: Option<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl KappaFit {
    pub fn min_real_exponent(&self) -> f64 {
        let e = |x: Option<f64>| x.unwrap_or(f64::INFINITY);
        e(self.exponent_re_fast).min(e(self.exponent_re_acoustic))
    }

    pub fn im_acoustic_exponent(&self) -> f64 {
        self.exponent_im_acoustic.unwrap_or(f64::INFINITY)
    }
}

pub const KAPPA_FIT_RMIN: f64 = 1e-3;
pub const KAPPA_FIT_RMAX: f64 = 5e-2;
pub const KAPPA_FIT_POINTS: usize = 40;

pub fn derive_kappas(params: &PhysicalParams) -> Result<KappaFit> {
    derive_kappas_on(params, KAPPA_FIT_RMIN, KAPPA_FIT_RMAX, KAPPA_FIT_POINTS)
}

pub fn derive_kappas_on(
    params: &PhysicalParams,
    r_min: f64,
    r_max: f64,
    points: usize,
) -> Result<KappaFit> {
    let rs = log_space(r_min, r_max, points);
    let mut fast = Vec::with_capacity(points);
    let mut slow = Vec::with_capacity(points);
    for &r in &rs {
        let spec = eigenvalues(&char_poly(params, r)?)?;
        fast.push(spec.lambdas[0]);
        slow.push(spec.lambdas[2]);
    }
    let even = |p: i32| rs.iter().map(move |r| r.powi(p));
    let cols_r2: Vec<Vec<f64>> = [2, 4, 6, 8].iter().map(|&p| even(p).collect()).collect();
    let cols_1: Vec<Vec<f64>> = [0, 2, 4, 6].iter().map(|&p| even(p).collect()).collect();

    let y: Vec<f64> = fast.iter().map(|l| -l.re).collect();
    let kappa1 = lstsq(&cols_r2, &y)[0];
    let rem: Vec<f64> = y.iter().zip(&rs).map(|(y, r)| y - kappa1 * r * r).collect();
    let exponent_re_fast = log_slope(&rs, &rem, &y);

    let y: Vec<f64> = slow.iter().map(|l| -l.re).collect();
    let kappa2 = lstsq(&cols_r2, &y)[0];
    let rem: Vec<f64> = y.iter().zip(&rs).map(|(y, r)| y - kappa2 * r * r).collect();
    let exponent_re_acoustic = log_slope(&rs, &rem, &y);

    let y: Vec<f64> = slow.iter().zip(&rs).map(|(l, r)| l.im / r).collect();
    let sigma2 = lstsq(&cols_1, &y)[0];
    let rem: Vec<f64> = slow.iter().zip(&rs).map(|(l, r)| l.im - sigma2 * r).collect();
    let im: Vec<f64> = slow.iter().map(|l| l.im).collect();
    let exponent_im_acoustic = log_slope(&rs, &rem, &im);

    let y: Vec<f64> = fast.iter().map(|l| l.im).collect();
    let c = lstsq(&cols_1, &y);
    let (omega0, curv) = (c[0], c[1]);
    let sigma1 = (2.0 * omega0 * curv).max(0.0).sqrt();
    let rem: Vec<f64> = y.iter().map(|y| y - omega0).collect();
    let exponent_im_fast = log_slope(&rs, &rem, &y);

    let fit = KappaFit {
        kappa1,
        kappa2,
        sigma1,
        sigma2,
        omega0,
        exponent_re_fast,
        exponent_re_acoustic,
        exponent_im_acoustic,
        exponent_im_fast,
        r_min,
        r_max,
        points,
    };
    for (branch, e, min) in [
        ("Re λ fast", exponent_re_fast, 3.0),
        ("Re λ acoustic", exponent_re_acoustic, 3.0),
        ("Im λ acoustic", exponent_im_acoustic, 2.0),
    ] {
        if e.is_some_and(|e| !(e >= min)) {
            return Err(Error::FitQuality {
                branch,
                exponent: e.unwrap_or(f64::NAN),
                min,
            });
        }
    }
    Ok(fit)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Least squares with unit-scaled columns.
fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let m = y.len();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(m, cols.len(), |i, j| cols[j][i] / scale[j]);
    let b = DVector::from_column_slice(y);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .expect("SVD computed with both factors");
    x.iter().zip(&scale).map(|(x, s)| x / s).collect()
}

/// Slope of log|y| against log x, over nodes where |y| rises above the
/// rounding level of the quantity it was subtracted from.
fn log_slope(x: &[f64], y: &[f64], reference: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .zip(reference)
        .filter(|((_, y), r)| y.abs() > 1e-13 * r.abs())
        .map(|((x, y), _)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params_sets() -> Vec<PhysicalParams> {
        let s = PhysicalParams::standard();
        vec![
            s,
            PhysicalParams::symmetric(1.0, 0.5, 1.0),
            PhysicalParams { z: 2.0, p1_prime: 1.5, p2_prime: 0.5, ..s },
            PhysicalParams { z: 0.5, mu1: 0.3, nu1: -0.1, mu2: 3.0, nu2: 0.2, p1_prime: 4.0, p2_prime: 0.7, ..s },
            PhysicalParams { z: 3.0, mu1: 0.1, nu1: 0.0, mu2: 0.05, nu2: 0.5, p1_prime: 10.0, p2_prime: 10.0, ..s },
        ]
    }

    /// Leibniz determinant over permutations, independent of nalgebra.
    fn det4(m: &CMat4) -> Complex64 {
        let mut perm = [0usize, 1, 2, 3];
        let mut total = Complex64::new(0.0, 0.0);
        fn permutations(k: usize, p: &mut [usize; 4], out: &mut Vec<[usize; 4]>) {
            if k == 4 {
                out.push(*p);
                return;
            }
            for i in k..4 {
                p.swap(k, i);
                permutations(k + 1, p, out);
                p.swap(k, i);
            }
        }
        let mut all = Vec::new();
        permutations(0, &mut perm, &mut all);
        for p in all {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            let mut prod = Complex64::new(sign, 0.0);
            for i in 0..4 {
                prod *= m[(i, p[i])];
            }
            total += prod;
        }
        total
    }

    #[test]
    fn printed_entries() {
        let p = PhysicalParams::standard();
        let a = build_symbol(&p, 1.0).unwrap().entries;
        assert_eq!(a[(1, 0)], 2.0);
        assert_eq!(a[(0, 1)], -1.0);
        assert_eq!(a[(1, 3)], 0.0);
        assert_eq!(a[(3, 1)], 0.0);
        assert!(matches!(build_symbol(&p, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(build_symbol(&p, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn quartic_examples() {
        let p = PhysicalParams::standard();
        let c = char_poly(&p, 1.0).unwrap();
        assert_relative_eq!(c.c3, 4.5, epsilon = 1e-15);
        assert_relative_eq!(c.c0, 3.0, epsilon = 1e-15);
        let c = char_poly(&p, 1e-9).unwrap();
        assert_relative_eq!(c.c2, 1.0 + p.z, epsilon = 1e-12);
        assert!(char_poly(&p, 0.0).is_err());
    }

    #[test]
    fn quartic_matches_determinant() {
        let probes = [
            Complex64::new(0.3, -1.1),
            Complex64::new(-2.0, 0.5),
            Complex64::new(1.7, 0.0),
            Complex64::new(-0.01, 3.0),
            Complex64::new(0.0, -0.4),
        ];
        for p in params_sets() {
            for r in [1e-3, 0.05, 0.7, 3.0] {
                let a = build_symbol(&p, r).unwrap().complex();
                let c = char_poly(&p, r).unwrap();
                for &l in &probes {
                    let d = det4(&(a - CMat4::identity() * l));
                    let q = c.eval(l);
                    assert!((d - q).norm() <= 1e-9 * q.norm().max(1.0), "{r} {l}");
                }
            }
        }
    }

    #[test]
    fn small_r_branches() {
        let p = PhysicalParams::standard();
        let s = eigenvalues(&char_poly(&p, 1e-3).unwrap()).unwrap();
        let sq2 = 2f64.sqrt();
        assert!((s.lambdas[0].im - sq2).abs() < 1e-5);
        assert!((s.lambdas[1].im + sq2).abs() < 1e-5);
        assert!((s.lambdas[2].im - 1e-3).abs() < 1e-7);
        assert!((s.lambdas[3].im + 1e-3).abs() < 1e-7);
        let sum: Complex64 = s.lambdas.iter().sum();
        let c = char_poly(&p, 1e-3).unwrap();
        assert!((sum.re + c.c3).abs() < 1e-14 && sum.im.abs() < 1e-12);
    }

    #[test]
    fn projector_identities() {
        for p in params_sets() {
            for r in log_space(1e-3, 0.1, 50) {
                let a = build_symbol(&p, r).unwrap();
                let e = eigensystem(&p, r).unwrap();
                let res = e.residuals(&a);
                assert!(res.max() <= 1e-10, "r={r} {res:?}");
            }
        }
    }

    #[test]
    fn rank_one_form_matches_product_form() {
        for p in params_sets() {
            for r in [0.02, 0.1, 0.5, 2.0] {
                let a = build_symbol(&p, r).unwrap();
                let e = eigensystem(&p, r).unwrap();
                let lag = projectors_lagrange(&a, &e.lambdas).unwrap();
                for i in 0..4 {
                    let d = (e.projectors[i] - lag[i]).iter().fold(0.0f64, |m, z| m.max(z.norm()));
                    assert!(d < 1e-9, "r={r} i={i} d={d}");
                }
            }
        }
    }

    #[test]
    fn semigroup_at_zero_is_identity() {
        let e = eigensystem(&PhysicalParams::standard(), 0.01).unwrap();
        let s = semigroup(&e, 0.0).unwrap();
        let err = (s - CMat4::identity()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(err <= 1e-10);
    }

    #[test]
    fn semigroup_matches_nalgebra_expm() {
        let p = PhysicalParams::standard();
        let e = eigensystem(&p, 0.01).unwrap();
        let a = build_symbol(&p, 0.01).unwrap().entries;
        let s = e.semigroup(1.0);
        let x = a.exp();
        for i in 0..4 {
            for j in 0..4 {
                assert!((s[(i, j)] - x[(i, j)]).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn entry_42_limit() {
        // Z(g₊^{3,4} − g₊^{1,2}) / (2(1+Z)) is the leading form of the (n₂, n₁) entry.
        let p = PhysicalParams::standard();
        let t = 1.0;
        let mut prev = f64::INFINITY;
        for r in [1e-2, 1e-3, 1e-4] {
            let e = eigensystem(&p, r).unwrap();
            let s = e.semigroup(t);
            let g = |i: usize, j: usize| (e.lambdas[i] * t).exp() + (e.lambdas[j] * t).exp();
            let lead = (g(2, 3) - g(0, 1)) * p.z / (2.0 * (1.0 + p.z));
            let d = (s[(3, 1)] - lead).norm();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn degenerate_double_root_is_flagged() {
        // the sum block λ² + 2r²λ + r² has a double root λ = −1 at r = 1
        let p = PhysicalParams::symmetric(1.0, 1.0, 1.0);
        let s = eigenvalues(&char_poly(&p, 1.0).unwrap()).unwrap();
        assert!(!s.well_separated, "gap {}", s.min_gap);
        let a = build_symbol(&p, 1.0).unwrap();
        assert!(matches!(projectors(&a, &s.lambdas), Err(Error::Degenerate { .. })));
        // fallback still produces the exponential
        let g = propagator(&p, 1.0, 0.5).unwrap();
        let x = (a.entries * 0.5).exp();
        for i in 0..4 {
            for j in 0..4 {
                assert!((g[(i, j)].re - x[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kappa_fit_adjudicates_reading() {
        let p = PhysicalParams::standard();
        let f = derive_kappas(&p).unwrap();
        let (k1m, k2m) = p.kappas_matched();
        let (_, k2p) = p.kappas_as_printed();
        assert!((f.kappa2 - k2m).abs() / k2m < 1e-6, "{} vs {k2m}", f.kappa2);
        assert!((f.kappa2 - k2p).abs() > 0.1);
        assert!((f.kappa1 - k1m).abs() / k1m < 1e-6);
        assert!(f.min_real_exponent() >= 3.5, "{f:?}");
        assert!(f.im_acoustic_exponent() >= 2.5);
        assert_relative_eq!(f.sigma2, p.sigma2(), max_relative = 1e-6);
        assert_relative_eq!(f.sigma1, p.sigma1(), max_relative = 1e-4);
        assert_relative_eq!(f.omega0, p.sqrt_1pz(), max_relative = 1e-8);
    }

    #[test]
    fn symmetric_case_matches_both_readings() {
        let p = PhysicalParams::symmetric(1.3, 0.4, 2.0);
        let f = derive_kappas(&p).unwrap();
        let (k1, k2) = p.kappas_as_printed();
        assert!((f.kappa1 - k1).abs() / k1 < 1e-4);
        assert!((f.kappa2 - k2).abs() / k2 < 1e-4);
    }

    #[test]
    fn branch_labels_continuous_under_refinement() {
        for p in params_sets() {
            let rs = log_space(1e-3, 0.1, 400);
            let mut prev = eigenvalues(&char_poly(&p, rs[0]).unwrap()).unwrap().lambdas;
            for &r in &rs[1..] {
                let cur = eigenvalues(&char_poly(&p, r).unwrap()).unwrap().lambdas;
                for i in 0..4 {
                    let nearest = (0..4)
                        .min_by(|&a, &b| (cur[a] - prev[i]).norm().total_cmp(&(cur[b] - prev[i]).norm()))
                        .unwrap();
                    assert_eq!(nearest, i, "branch swap at r = {r}");
                }
                prev = cur;
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn stable_spectrum(
            z in 0.2f64..5.0, mu1 in 0.05f64..3.0, mu2 in 0.05f64..3.0,
            f1 in -0.6f64..2.0, f2 in -0.6f64..2.0,
            p1 in 0.1f64..10.0, p2 in 0.1f64..10.0, r in 1e-3f64..0.1,
        ) {
            let p = PhysicalParams { z, mu1, nu1: f1 * mu1, mu2, nu2: f2 * mu2, p1_prime: p1, p2_prime: p2, gamma1: None, gamma2: None };
            proptest::prop_assume!(p.validate().is_ok());
            let s = eigenvalues(&char_poly(&p, r).unwrap()).unwrap();
            for l in s.lambdas {
                proptest::prop_assert!(l.re < 0.0);
            }
        }

        #[test]
        fn pointwise_density_bound(r in 1e-3f64..0.1, t in 0.0f64..1e4) {
            // |ϱ rows of e^{tA}| ≤ C (e^{−κ₁r²t/2} + e^{−κ₂r²t/2})
            let p = PhysicalParams::standard();
            let (k1, k2) = p.kappas_matched();
            let e = eigensystem(&p, r).unwrap();
            let s = e.semigroup(t);
            let env = (-k1 * r * r * t / 2.0).exp() + (-k2 * r * r * t / 2.0).exp();
            for row in [0usize, 2] {
                let mag: f64 = (0..4).map(|j| s[(row, j)].norm_sqr()).sum::<f64>().sqrt();
                proptest::prop_assert!(mag <= 4.0 * env, "row {row}: {mag} vs {env}");
            }
        }
    }
}
