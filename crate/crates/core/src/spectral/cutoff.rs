use serde::{Deserialize, Serialize};

/// Shape of the descent from 1 to 0 on the transition band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Transition {
    /// e^{−1/x} / (e^{−1/x} + e^{−1/(1−x)}), infinitely differentiable.
    Smooth,
    /// Polynomial smoothstep with `order` vanishing derivatives at both ends.
    Polynomial { order: u32 },
    /// Sharp step at the inner radius.
    Indicator,
}

impl Transition {
    /// Rises from 0 at x = 0 to 1 at x = 1.
    pub fn rise(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match *self {
            Transition::Smooth => {
                let a = (-1.0 / x).exp();
                let b = (-1.0 / (1.0 - x)).exp();
                a / (a + b)
            }
            Transition::Polynomial { order } => smoothstep(order, x),
            Transition::Indicator => 1.0,
        }
    }
}

/// Generic smoothstep S_N(x) = x^{N+1} Σ_{k=0}^{N} C(N+k, k) C(2N+1, N−k) (−x)^k.
pub fn smoothstep(order: u32, x: f64) -> f64 {
    let n = order as i64;
    let mut sum = 0.0;
    for k in 0..=n {
        sum += binom(n + k, k) * binom(2 * n + 1, n - k) * (-x).powi(k as i32);
    }
    sum * x.powi(order as i32 + 1)
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Radial cutoff equal to 1 inside `inner` and 0 outside `outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
    pub transition: Transition,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            inner: 1.0,
            outer: 2.0,
            transition: Transition::Smooth,
        }
    }
}

impl CutoffSpec {
    pub fn new(inner: f64, outer: f64, transition: Transition) -> Self {
        assert!(0.0 <= inner && inner <= outer, "cutoff radii out of order");
        CutoffSpec {
            inner,
            outer,
            transition,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner {
            return 1.0;
        }
        if r >= self.outer || matches!(self.transition, Transition::Indicator) {
            return 0.0;
        }
        1.0 - self.transition.rise((r - self.inner) / (self.outer - self.inner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_four_smoothstep_coefficients() {
        for x in [0.1f64, 0.37, 0.5, 0.9] {
            let p = 126.0 * x.powi(5) - 420.0 * x.powi(6) + 540.0 * x.powi(7) - 315.0 * x.powi(8)
                + 70.0 * x.powi(9);
            assert!((smoothstep(4, x) - p).abs() < 1e-12);
        }
        assert!((smoothstep(4, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cutoff_limits() {
        for tr in [Transition::Smooth, Transition::Polynomial { order: 4 }] {
            let c = CutoffSpec::new(1.0, 2.0, tr);
            assert_eq!(c.value(0.0), 1.0);
            assert_eq!(c.value(1.0), 1.0);
            assert_eq!(c.value(2.0), 0.0);
            assert_eq!(c.value(5.0), 0.0);
            let mut prev = 1.0;
            for i in 0..=1000 {
                let v = c.value(1.0 + i as f64 / 1000.0);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }
}
