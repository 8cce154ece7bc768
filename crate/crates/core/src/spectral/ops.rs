use num_complex::Complex64;

use super::cutoff::CutoffSpec;
use super::grid::SpectralGrid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest tolerated |Z·ϱ̂₁(0) − ϱ̂₂(0)|.
pub const NEUTRALITY_TOL: f64 = 1e-12;

#[inline]
fn cross(a: [Complex64; 3], b: [Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Split one mode into n̂ = i k̂·m̂ and M̂ = i k̂ × m̂.
///
/// The zero mode goes entirely to M̂.
#[inline]
pub fn helmholtz_mode(k: [f64; 3], m: [Complex64; 3]) -> (Complex64, [Complex64; 3]) {
    let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kk == 0.0 {
        return (Complex64::new(0.0, 0.0), m);
    }
    let kh = [
        Complex64::new(k[0] / kk, 0.0),
        Complex64::new(k[1] / kk, 0.0),
        Complex64::new(k[2] / kk, 0.0),
    ];
    let n = I * (kh[0] * m[0] + kh[1] * m[1] + kh[2] * m[2]);
    let c = cross(kh, m);
    (n, [I * c[0], I * c[1], I * c[2]])
}

/// Inverse of [`helmholtz_mode`]: m̂ = −i k̂ n̂ + i k̂ × M̂.
#[inline]
pub fn reconstruct_mode(k: [f64; 3], n: Complex64, big_m: [Complex64; 3]) -> [Complex64; 3] {
    let kk = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kk == 0.0 {
        return big_m;
    }
    let kh = [
        Complex64::new(k[0] / kk, 0.0),
        Complex64::new(k[1] / kk, 0.0),
        Complex64::new(k[2] / kk, 0.0),
    ];
    let c = cross(kh, big_m);
    std::array::from_fn(|j| -I * kh[j] * n + I * c[j])
}

pub fn helmholtz_split(
    grid: &SpectralGrid,
    m: [&[Complex64]; 3],
) -> (Vec<Complex64>, [Vec<Complex64>; 3]) {
    let len = grid.len();
    let mut n = vec![Complex64::new(0.0, 0.0); len];
    let mut big_m: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]);
    for i in 0..len {
        let (ni, mi) = helmholtz_mode(grid.wavevector(i), [m[0][i], m[1][i], m[2][i]]);
        n[i] = ni;
        for c in 0..3 {
            big_m[c][i] = mi[c];
        }
    }
    (n, big_m)
}

pub fn helmholtz_reconstruct(
    grid: &SpectralGrid,
    n: &[Complex64],
    big_m: [&[Complex64]; 3],
) -> [Vec<Complex64>; 3] {
    let len = grid.len();
    let mut m: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]);
    for i in 0..len {
        let mi = reconstruct_mode(grid.wavevector(i), n[i], [big_m[0][i], big_m[1][i], big_m[2][i]]);
        for c in 0..3 {
            m[c][i] = mi[c];
        }
    }
    m
}

/// f̂^L = cutoff(|k|/scale)·f̂ and f̂^H = f̂ − f̂^L.
pub fn freq_split(
    grid: &SpectralGrid,
    f: &[Complex64],
    cutoff: &CutoffSpec,
    scale: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut low = Vec::with_capacity(f.len());
    let mut high = Vec::with_capacity(f.len());
    for (i, &v) in f.iter().enumerate() {
        let l = v * cutoff.value(grid.k2(i).sqrt() / scale);
        low.push(l);
        high.push(v - l);
    }
    (low, high)
}

/// ∇φ̂ = −i k (Z ϱ̂₁ − ϱ̂₂)/|k|², zero at k = 0.
pub fn poisson_gradient(
    grid: &SpectralGrid,
    rho1: &[Complex64],
    rho2: &[Complex64],
    z: f64,
) -> Result<[Vec<Complex64>; 3]> {
    let residual = (z * rho1[0] - rho2[0]).norm();
    if residual > NEUTRALITY_TOL {
        return Err(Error::Neutrality { residual });
    }
    let len = grid.len();
    let mut g: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]);
    for i in 1..len {
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let c = (z * rho1[i] - rho2[i]) / k2;
        for d in 0..3 {
            g[d][i] = -I * k[d] * c;
        }
    }
    Ok(g)
}

/// ‖∇^k f‖ on the periodic box: (L³ Σ |k|^{2k} |f̂|²)^{1/2}.
pub fn sobolev_norm(grid: &SpectralGrid, f: &[Complex64], order: u32) -> f64 {
    let mut s = 0.0;
    for (i, v) in f.iter().enumerate() {
        let w = if order == 0 { 1.0 } else { grid.k2(i).powi(order as i32) };
        s += w * v.norm_sqr();
    }
    (grid.volume() * s).sqrt()
}

/// Joint norm of several fields.
pub fn sobolev_norm_joint(grid: &SpectralGrid, fields: &[&[Complex64]], order: u32) -> f64 {
    fields
        .iter()
        .map(|f| sobolev_norm(grid, f, order).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::cutoff::Transition;
    use crate::spectral::grid::symmetrize;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn longitudinal_and_transverse_modes() {
        let k = [0.7, 0.0, 0.0];
        let (n, m) = helmholtz_mode(k, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert!(m.iter().all(|z| z.norm() < 1e-15));
        let (n, m) = helmholtz_mode(k, [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(n.norm() < 1e-15);
        let mm: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((mm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn poisson_examples() {
        let g = SpectralGrid::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let len = g.len();
        let mut r1 = vec![c(0.0, 0.0); len];
        let mut r2 = vec![c(0.0, 0.0); len];
        let at = g.index(2, 0, 0);
        r1[at] = c(1.0, 0.0);
        r1[g.conj_index(at)] = c(1.0, 0.0);
        let grad = poisson_gradient(&g, &r1, &r2, 1.0).unwrap();
        let mag: f64 = (0..3).map(|d| grad[d][at].norm_sqr()).sum::<f64>().sqrt();
        assert!((mag - 0.5).abs() < 1e-15);
        // divergence returns the charge
        for i in 0..len {
            let k = g.wavevector(i);
            let div: Complex64 = (0..3).map(|d| I * k[d] * grad[d][i]).sum();
            let q = r1[i] - r2[i];
            if i != 0 {
                assert!((div - q).norm() < 1e-12);
            }
        }
        r2.copy_from_slice(&r1);
        let grad = poisson_gradient(&g, &r1, &r2, 1.0).unwrap();
        assert!(grad.iter().flatten().all(|z| z.norm() == 0.0));
        r1[0] = c(1e-9, 0.0);
        r2[0] = c(0.0, 0.0);
        assert!(matches!(poisson_gradient(&g, &r1, &r2, 1.0), Err(Error::Neutrality { .. })));
    }

    #[test]
    fn radial_split_examples() {
        let g = SpectralGrid::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let cut = CutoffSpec::default();
        let mut f = vec![c(0.0, 0.0); g.len()];
        let inside = g.index(1, 0, 0);
        let outside = g.index(6, 0, 0);
        f[inside] = c(2.0, 1.0);
        f[outside] = c(-1.0, 3.0);
        let (low, high) = freq_split(&g, &f, &cut, 2.0);
        assert_eq!(high[inside], c(0.0, 0.0));
        assert_eq!(low[outside], c(0.0, 0.0));
    }

    #[test]
    fn grid_norm_matches_physical_l2() {
        let g = SpectralGrid::new(8, 3.0).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|i| ((i * 7 % 31) as f64 * 0.3).sin()).collect();
        let fh = g.forward_real(&f);
        let h3 = (g.box_len / g.n as f64).powi(3);
        let phys = (f.iter().map(|x| x * x).sum::<f64>() * h3).sqrt();
        assert!((sobolev_norm(&g, &fh, 0) - phys).abs() < 1e-12 * phys);
    }

    fn random_field(g: &SpectralGrid, seed: &[f64]) -> Vec<Complex64> {
        let mut f: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let a = seed[i % seed.len()];
                let b = seed[(i * 7 + 3) % seed.len()];
                c((a * (i as f64 + 1.0)).sin(), (b * (i as f64 + 2.0)).cos())
            })
            .collect();
        symmetrize(g, &mut f);
        f
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn helmholtz_round_trip(seed in proptest::collection::vec(-3.0f64..3.0, 8)) {
            let g = SpectralGrid::new(4, 2.5).unwrap();
            let m: [Vec<Complex64>; 3] = std::array::from_fn(|d| random_field(&g, &seed[d..]));
            let (n, big_m) = helmholtz_split(&g, [&m[0], &m[1], &m[2]]);
            let back = helmholtz_reconstruct(&g, &n, [&big_m[0], &big_m[1], &big_m[2]]);
            let scale = m.iter().flatten().fold(0.0f64, |a, z| a.max(z.norm()));
            for d in 0..3 {
                for i in 0..g.len() {
                    prop_assert!((back[d][i] - m[d][i]).norm() <= 1e-12 * scale);
                }
            }
            let total: f64 = m.iter().map(|f| sobolev_norm(&g, f, 0).powi(2)).sum();
            let split = sobolev_norm(&g, &n, 0).powi(2)
                + big_m.iter().map(|f| sobolev_norm(&g, f, 0).powi(2)).sum::<f64>();
            prop_assert!((total - split).abs() <= 1e-12 * total);
        }

        #[test]
        fn split_never_gains_energy(seed in proptest::collection::vec(-3.0f64..3.0, 4), scale in 0.3f64..4.0) {
            let g = SpectralGrid::new(8, 2.0 * std::f64::consts::PI).unwrap();
            let f = random_field(&g, &seed);
            let whole = sobolev_norm(&g, &f, 0).powi(2);
            for tr in [Transition::Smooth, Transition::Indicator] {
                let cut = CutoffSpec::new(1.0, 2.0, tr);
                let (lo, hi) = freq_split(&g, &f, &cut, scale);
                for i in 0..f.len() {
                    prop_assert!((lo[i] + hi[i] - f[i]).norm() <= 2.0 * f64::EPSILON * f[i].norm());
                }
                let parts = sobolev_norm(&g, &lo, 0).powi(2) + sobolev_norm(&g, &hi, 0).powi(2);
                prop_assert!(parts <= whole * (1.0 + 1e-12));
                if tr == Transition::Indicator {
                    prop_assert!((parts - whole).abs() <= 1e-12 * whole);
                }
            }
        }
    }
}
