//! Gauss–Legendre rules and composite panel grids.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_n(x) and P_n′(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite rule: the same Gauss–Legendre rule on each panel.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub breakpoints: Vec<f64>,
}

impl CompositeRule {
    pub fn new(breakpoints: &[f64], points_per_panel: usize) -> Self {
        let (x, w) = gauss_legendre(points_per_panel);
        let panels = breakpoints.len().saturating_sub(1);
        let mut nodes = Vec::with_capacity(panels * points_per_panel);
        let mut weights = Vec::with_capacity(panels * points_per_panel);
        for p in breakpoints.windows(2) {
            let (a, b) = (p[0], p[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        CompositeRule {
            nodes,
            weights,
            breakpoints: breakpoints.to_vec(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Halve every panel.
    pub fn refined(&self, points_per_panel: usize) -> Self {
        let mut bp = Vec::with_capacity(2 * self.breakpoints.len());
        for p in self.breakpoints.windows(2) {
            bp.push(p[0]);
            bp.push(0.5 * (p[0] + p[1]));
        }
        if let Some(&last) = self.breakpoints.last() {
            bp.push(last);
        }
        CompositeRule::new(&bp, points_per_panel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32, 64] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14, "{n}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let n = 8;
        let (x, w) = gauss_legendre(n);
        for deg in 0..(2 * n) {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn five_point_nodes() {
        let (x, _) = gauss_legendre(5);
        let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        assert!((x[3] - a).abs() < 1e-15);
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn composite_r_squared() {
        let rule = CompositeRule::new(&[0.0, 0.5, 1.0, 3.0, 8.0], 32);
        let q = rule.integrate(|r| r * r);
        assert!((q - 512.0 / 3.0).abs() / (512.0 / 3.0) < 1e-14);
        let q = rule.refined(32).integrate(|r| (3.0 * r).sin());
        assert!((q - (1.0 - 24f64.cos()) / 3.0).abs() < 1e-13);
    }
}
