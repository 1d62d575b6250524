use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// `points`-point rule, exact for polynomials of degree `2 * points - 1`.
    pub(crate) fn new(points: usize) -> Self {
        let points = points.max(1);
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        let nf = points as f64;
        for i in 0..points {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 1.0;
            for _ in 0..100 {
                let (value, d) = legendre(points, x);
                deriv = d;
                let dx = value / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(points, x);
            if d.is_finite() && d != 0.0 {
                deriv = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * deriv * deriv));
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub(crate) fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub(crate) fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Mean of `f` over `[a, b]`. Returns the common sample value exactly when
    /// every node sees the same value, so averaging a constant is lossless.
    pub(crate) fn average(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut first = None;
        let mut uniform = true;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (x, w) in self.mapped(a, b) {
            let v = f(x);
            match first {
                None => first = Some(v),
                Some(f0) => uniform &= v == f0,
            }
            acc += w * v;
            wsum += w;
        }
        match first {
            Some(v) if uniform => v,
            _ => acc / wsum,
        }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in 1..=12 {
            let rule = GaussRule::new(n);
            let s: f64 = rule.integrate(0.0, 3.0, |_| 1.0);
            assert!((s - 3.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_degree_two_n_minus_one() {
        let rule = GaussRule::new(4);
        // x^7 on [0, 1] integrates to 1/8
        let v = rule.integrate(0.0, 1.0, |x| x.powi(7));
        assert!((v - 0.125).abs() < 1e-15);
        let v = rule.integrate(-1.0, 2.0, |x| 3.0 * x * x - x);
        // [x^3 - x^2/2] from -1 to 2 = (8 - 2) - (-1 - 0.5) = 7.5
        assert!((v - 7.5).abs() < 1e-13);
    }

    #[test]
    fn average_of_constant_is_exact() {
        let rule = GaussRule::new(8);
        let c = 0.1 + 0.2;
        assert_eq!(rule.average(0.3, 0.7, |_| c), c);
    }
}
