//! Continuum graphon kernels `K(x, y)` on `[0, 1]²` and their integral norms.

use alloc::sync::Arc;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::DiscreteKernel;
use crate::quadrature::GaussRule;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `K(x, y) = ½(1-β)(2-β) |x - y|^{-β}` with `β ∈ (0, 1)`. Singular on the
    /// diagonal, unit `L¹` mass on `[0, 1]²`.
    ConvolutionPowerLaw { beta: f64 },
    /// `K ≡ c`.
    Constant { c: f64 },
    /// `K(x, y) = a(x) a(y)` with `a(x) = Σ_k coeffs[k] x^k`, positive on `[0, 1]`.
    SeparableSmooth { coeffs: Vec<f64> },
    /// Piecewise-constant kernel `I_n K` of a discrete kernel.
    Tabulated(Arc<DiscreteKernel>),
}

impl KernelSpec {
    pub fn power_law(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(
                "power-law exponent beta must lie in (0, 1)",
            ));
        }
        Ok(Self::ConvolutionPowerLaw { beta })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(
                "constant kernel must be finite and nonnegative",
            ));
        }
        Ok(Self::Constant { c })
    }

    pub fn separable(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "separable factor needs finite coefficients",
            ));
        }
        let spec = Self::SeparableSmooth { coeffs };
        let positive = (0..=1000).all(|k| spec.factor(k as f64 / 1000.0) > 0.0);
        if !positive {
            return Err(Error::InvalidParameter(
                "separable factor must be positive on [0, 1]",
            ));
        }
        Ok(spec)
    }

    pub fn tabulated(kernel: DiscreteKernel) -> Self {
        Self::Tabulated(Arc::new(kernel))
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self, Self::ConvolutionPowerLaw { .. })
    }

    /// `K(x, y)`; `+∞` on the diagonal of the power-law kernel.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::ConvolutionPowerLaw { beta } => {
                let z = (x - y).abs();
                if z == 0.0 {
                    f64::INFINITY
                } else {
                    power_law_scale(*beta) * z.powf(-beta)
                }
            }
            Self::Constant { c } => *c,
            Self::SeparableSmooth { .. } => self.factor(x) * self.factor(y),
            Self::Tabulated(kd) => {
                let m = kd.mesh();
                kd.get(m.locate(x), m.locate(y))
            }
        }
    }

    /// The factor `a(x)` of a separable kernel; zero for other variants.
    pub(crate) fn factor(&self, x: f64) -> f64 {
        match self {
            Self::SeparableSmooth { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            _ => 0.0,
        }
    }

    /// `sup_x (∫ |K(x, y)|^q dy)^{1/q}` for `q ∈ {1, 2, ∞}`.
    ///
    /// Closed form for the power-law and constant kernels, exact for tabulated
    /// kernels. Separable kernels sample `sup |a|` on `resolution + 1` grid
    /// points and integrate `|a|^q` with composite Gauss quadrature.
    pub fn norm_linf_q(&self, q: f64, resolution: usize) -> Result<f64> {
        check_exponent(q)?;
        match self {
            Self::ConvolutionPowerLaw { beta } => {
                let product = q * beta;
                if product >= 1.0 {
                    return Err(Error::DivergentNorm { q, product });
                }
                let c = power_law_scale(*beta);
                // the row integral is symmetric and concave, maximal at x = 1/2
                let e = 1.0 - q * beta;
                let row = c.powf(q) * 2.0 * 0.5f64.powf(e) / e;
                Ok(row.powf(1.0 / q))
            }
            Self::Constant { c } => Ok(*c),
            Self::SeparableSmooth { .. } => {
                let r = resolution.max(1);
                let sup = (0..=r)
                    .map(|k| self.factor(k as f64 / r as f64).abs())
                    .fold(0.0, f64::max);
                let norm = if q.is_infinite() {
                    sup
                } else {
                    composite_gauss(r, |x| self.factor(x).abs().powf(q)).powf(1.0 / q)
                };
                Ok(sup * norm)
            }
            Self::Tabulated(kd) => Ok(kd.norm_linf_q(q)),
        }
    }

    /// `∫∫ K` over `[0, 1]²`.
    pub fn norm_l1(&self, resolution: usize) -> Result<f64> {
        match self {
            Self::ConvolutionPowerLaw { .. } => Ok(1.0),
            Self::Constant { c } => Ok(*c),
            Self::SeparableSmooth { .. } => {
                let m = composite_gauss(resolution.max(1), |x| self.factor(x));
                Ok(m * m)
            }
            Self::Tabulated(kd) => Ok(kd.norm_l1()),
        }
    }
}

/// Normalizing constant `½(1-β)(2-β)` of the power-law kernel.
pub fn power_law_scale(beta: f64) -> f64 {
    0.5 * (1.0 - beta) * (2.0 - beta)
}

fn check_exponent(q: f64) -> Result<()> {
    if q == 1.0 || q == 2.0 || q == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(q))
    }
}

fn composite_gauss(panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = GaussRule::new(8);
    let dx = 1.0 / panels as f64;
    (0..panels)
        .map(|m| {
            let a = m as f64 * dx;
            rule.integrate(a, a + dx, &f)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        assert_eq!(KernelSpec::constant(1.0).unwrap().eval(0.3, 0.7), 1.0);
        let k = KernelSpec::power_law(0.5).unwrap();
        assert_eq!(k.eval(0.4, 0.4), f64::INFINITY);
        assert_relative_eq!(k.eval(0.0, 1.0), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn constructors_validate() {
        assert!(KernelSpec::power_law(1.0).is_err());
        assert!(KernelSpec::power_law(0.0).is_err());
        assert!(KernelSpec::constant(-1.0).is_err());
        assert!(KernelSpec::separable(vec![-0.5, 1.0]).is_err());
        assert!(KernelSpec::separable(vec![]).is_err());
    }

    #[test]
    fn linf_norm_examples() {
        for &beta in &[0.1, 0.5, 0.75, 0.9] {
            let k = KernelSpec::power_law(beta).unwrap();
            let expected = 0.5 * (2.0 - beta) * 2f64.powf(beta);
            assert_relative_eq!(
                k.norm_linf_q(1.0, 100).unwrap(),
                expected,
                max_relative = 1e-14
            );
        }
        assert_eq!(
            KernelSpec::constant(3.0)
                .unwrap()
                .norm_linf_q(1.0, 10)
                .unwrap(),
            3.0
        );
        let k = KernelSpec::power_law(0.6).unwrap();
        assert!(matches!(
            k.norm_linf_q(2.0, 10),
            Err(Error::DivergentNorm { .. })
        ));
        assert!(matches!(
            k.norm_linf_q(f64::INFINITY, 10),
            Err(Error::DivergentNorm { .. })
        ));
        assert_eq!(k.norm_linf_q(3.0, 10), Err(Error::UnsupportedExponent(3.0)));
    }

    #[test]
    fn l1_norm_examples() {
        assert_eq!(KernelSpec::power_law(0.3).unwrap().norm_l1(1).unwrap(), 1.0);
        assert_eq!(KernelSpec::constant(0.4).unwrap().norm_l1(1).unwrap(), 0.4);
        let k = KernelSpec::separable(vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(k.norm_l1(4).unwrap(), 2.25, epsilon = 1e-14);
        // sup_x a(x) = 2, ||a||_1 = 1.5
        assert_relative_eq!(k.norm_linf_q(1.0, 100).unwrap(), 3.0, epsilon = 1e-14);
    }

    /// Power-law row integral `∫ K(x, y) dy` by composite Gauss on panels
    /// geometrically graded toward the singularity at `y = x`.
    fn graded_row_integral(beta: f64, q: f64, x: f64) -> f64 {
        let rule = GaussRule::new(10);
        let c = power_law_scale(beta);
        // integrand in the distance s = |x - y|
        let f = |s: f64| (c * s.powf(-beta)).powf(q);
        let side = |len: f64| -> f64 {
            if len <= 0.0 {
                return 0.0;
            }
            // panels [len r^{k+1}, len r^k] shrinking toward the singular point
            let ratio: f64 = 0.5;
            let mut total = 0.0;
            let mut hi = len;
            for _ in 0..200 {
                let lo = hi * ratio;
                total += rule.integrate(lo, hi, f);
                hi = lo;
            }
            // remaining [0, hi] is below 1e-60 in length; add its exact contribution
            total + c.powf(q) * hi.powf(1.0 - q * beta) / (1.0 - q * beta)
        };
        side(1.0 - x) + side(x)
    }

    #[test]
    fn power_law_closed_form_matches_graded_quadrature() {
        let resolution = 10_000;
        for &beta in &[0.2, 0.5, 0.75] {
            let k = KernelSpec::power_law(beta).unwrap();
            let brute = (0..=resolution)
                .map(|i| graded_row_integral(beta, 1.0, i as f64 / resolution as f64))
                .fold(0.0, f64::max);
            let closed = k.norm_linf_q(1.0, resolution).unwrap();
            assert_relative_eq!(closed, brute, max_relative = 1e-6);
        }
        let k = KernelSpec::power_law(0.3).unwrap();
        let brute = graded_row_integral(0.3, 2.0, 0.5).sqrt();
        assert_relative_eq!(k.norm_linf_q(2.0, 10).unwrap(), brute, max_relative = 1e-9);
    }

    proptest! {
        #[test]
        fn eval_is_symmetric(x in 0.0..=1.0f64, y in 0.0..=1.0f64, beta in 0.05..0.95f64,
                             a0 in 0.1..2.0f64, a1 in 0.0..2.0f64) {
            for k in [
                KernelSpec::power_law(beta).unwrap(),
                KernelSpec::constant(a0).unwrap(),
                KernelSpec::separable(vec![a0, a1]).unwrap(),
            ] {
                let (kxy, kyx) = (k.eval(x, y), k.eval(y, x));
                prop_assert!(kxy == kyx);
                prop_assert!(kxy >= 0.0);
            }
        }

        #[test]
        fn l1_bounded_by_linf1(beta in 0.05..0.95f64, a0 in 0.1..2.0f64, a1 in -0.09..2.0f64) {
            for k in [
                KernelSpec::power_law(beta).unwrap(),
                KernelSpec::constant(a0).unwrap(),
                KernelSpec::separable(vec![a0, a1]).unwrap(),
            ] {
                let l1 = k.norm_l1(64).unwrap();
                let linf = k.norm_linf_q(1.0, 64).unwrap();
                prop_assert!(l1 <= linf + 1e-9, "{l1} > {linf}");
            }
        }
    }
}
