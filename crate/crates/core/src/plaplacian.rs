//! The nonlinearity `Ψ(x) = sign(x)|x|^{p-1}`, the discrete p-Laplacian and
//! 1-Laplacian, the convex energy behind them, and the resolvent
//! `(Id + λΔ_p)^{-1}`.
//!
//! Operators act through [`Coupling`], a row-wise view of the weights
//! `w_ij = h_j K_ij`. Dense cell-averaged kernels and sparse random graphs both
//! implement it, so every scheme runs unchanged on either.

use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::mesh::{weighted_norm, DiscreteKernel, GridFunction};

/// Exponent `p ∈ [1, ∞)`. Schemes check their own admissible sub-ranges.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 && p.is_finite() {
            Ok(Self(p))
        } else {
            Err(Error::InvalidP {
                p,
                allowed: "[1, inf)",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

/// Row-wise access to symmetric interaction weights.
///
/// Row `i` visits every `j` with a nonzero weight `w_ij = h_j K_ij`, in
/// increasing `j`. The products `h_i w_ij` must be symmetric.
pub trait Coupling {
    fn n(&self) -> usize;

    /// Cell sizes `h_i`.
    fn sizes(&self) -> &[f64];

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, visit: F);

    /// `max_i Σ_j w_ij`, the `L^{∞,1}` norm of the injected weights.
    fn linf1(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let mut s = 0.0;
                self.for_each_in_row(i, |_, w| s += w);
                s
            })
            .fold(0.0, f64::max)
    }
}

impl Coupling for DiscreteKernel {
    fn n(&self) -> usize {
        DiscreteKernel::n(self)
    }

    fn sizes(&self) -> &[f64] {
        self.mesh().sizes()
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut visit: F) {
        let h = self.mesh().sizes();
        for (j, (&k, &hj)) in self.row(i).iter().zip(h).enumerate() {
            let w = hj * k;
            if w != 0.0 {
                visit(j, w);
            }
        }
    }
}

/// `|x|^e` for `x >= 0`, exact on the exponents the schemes hit most.
#[inline]
pub(crate) fn pow_abs(a: f64, e: f64) -> f64 {
    if e == 1.0 {
        a
    } else if e == 2.0 {
        a * a
    } else if e == 0.0 {
        1.0
    } else if e == 0.5 {
        a.sqrt()
    } else if e == -0.5 {
        1.0 / a.sqrt()
    } else if e == 3.0 {
        a * a * a
    } else {
        a.powf(e)
    }
}

/// `Ψ(x) = sign(x)|x|^{p-1}` with `sign(0) = 0`.
#[inline]
pub fn psi(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if p == 2.0 {
        x
    } else if x > 0.0 {
        pow_abs(x, p - 1.0)
    } else {
        -pow_abs(-x, p - 1.0)
    }
}

/// `Ψ'(x) = (p-1)|x|^{p-2}`, with `|x|` floored at `tie` (only matters for `p < 2`).
#[inline]
fn psi_prime(p: f64, x: f64, tie: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        (p - 1.0) * pow_abs(x.abs().max(tie), p - 2.0)
    }
}

fn check_mesh(kd: &DiscreteKernel, u: &GridFunction) -> Result<()> {
    if crate::mesh::same_mesh(kd.mesh(), u.mesh()) {
        Ok(())
    } else {
        Err(Error::MeshMismatch)
    }
}

fn require_p_above_one(p: PExponent) -> Result<f64> {
    if p.get() > 1.0 {
        Ok(p.get())
    } else {
        Err(Error::InvalidP {
            p: p.get(),
            allowed: "(1, inf)",
        })
    }
}

/// `(Δ_p u)_i = -Σ_j w_ij Ψ(u_j - u_i)` into `out`.
pub fn apply_coupling<C: Coupling>(c: &C, p: f64, u: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let ui = u[i];
        let mut s = 0.0;
        c.for_each_in_row(i, |j, w| s += w * psi(p, u[j] - ui));
        *o = -s;
    }
}

/// Discrete p-Laplacian `Δ_p^K u` for `p > 1`.
pub fn apply(kd: &DiscreteKernel, p: PExponent, u: &GridFunction) -> Result<GridFunction> {
    check_mesh(kd, u)?;
    let p = require_p_above_one(p)?;
    let mut out = vec![0.0; u.len()];
    apply_coupling(kd, p, u.values(), &mut out);
    Ok(GridFunction::from_parts_unchecked(u.mesh().clone(), out))
}

/// The selection `w_ij = sign(u_j - u_i)` from the subdifferential of `|·|`,
/// with `sign(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientSelection {
    n: usize,
    signs: Vec<i8>,
}

impl SubgradientSelection {
    pub fn from_state(u: &[f64]) -> Self {
        let n = u.len();
        let mut signs = vec![0i8; n * n];
        for i in 0..n {
            for j in 0..n {
                signs[i * n + j] = sign(u[j] - u[i]) as i8;
            }
        }
        Self { n, signs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.signs[i * self.n + j] as f64
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `η_i = -Σ_j w_ij sign(u_j - u_i)` into `out`.
pub fn eta_coupling<C: Coupling>(c: &C, u: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let ui = u[i];
        let mut s = 0.0;
        c.for_each_in_row(i, |j, w| s += w * sign(u[j] - ui));
        *o = -s;
    }
}

/// The 1-Laplacian element `η` together with the selection that produced it.
pub fn one_lap_select(
    kd: &DiscreteKernel,
    u: &GridFunction,
) -> Result<(GridFunction, SubgradientSelection)> {
    check_mesh(kd, u)?;
    let mut eta = vec![0.0; u.len()];
    eta_coupling(kd, u.values(), &mut eta);
    Ok((
        GridFunction::from_parts_unchecked(u.mesh().clone(), eta),
        SubgradientSelection::from_state(u.values()),
    ))
}

/// `E(u) = (2p)^{-1} Σ_i h_i Σ_j w_ij |u_j - u_i|^p`.
pub fn energy_coupling<C: Coupling>(c: &C, p: f64, u: &[f64]) -> f64 {
    let h = c.sizes();
    let mut total = 0.0;
    for i in 0..c.n() {
        let ui = u[i];
        let mut s = 0.0;
        c.for_each_in_row(i, |j, w| s += w * pow_abs((u[j] - ui).abs(), p));
        total += h[i] * s;
    }
    total / (2.0 * p)
}

/// Convex energy whose `h`-weighted gradient is `Δ_p u` (for `p = 1`, the
/// weighted total variation).
pub fn energy(kd: &DiscreteKernel, p: PExponent, u: &GridFunction) -> Result<f64> {
    check_mesh(kd, u)?;
    Ok(energy_coupling(kd, p.get(), u.values()))
}

/// Stopping rule and iteration budget of a resolvent solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventOptions {
    /// Absolute bound on `‖u + λΔ_p u - b‖_{h,2}`; `None` uses
    /// `1e-10 · max(1, ‖b‖_{h,2})`.
    pub tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for ResolventOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iters: 500,
        }
    }
}

impl ResolventOptions {
    pub fn tolerance_for(&self, b_norm: f64) -> f64 {
        self.tol.unwrap_or(1e-10 * b_norm.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventReport {
    pub iterations: usize,
    pub residual: f64,
}

/// `J_{λΔ_p}(b)`: the unique minimizer of `½‖u - b‖²_h + λE(u)`.
pub fn resolvent(
    kd: &DiscreteKernel,
    p: PExponent,
    lambda: f64,
    b: &GridFunction,
    opts: ResolventOptions,
) -> Result<(GridFunction, ResolventReport)> {
    check_mesh(kd, b)?;
    let (u, report) = resolvent_coupling(kd, p, lambda, b.values(), opts)?;
    Ok((
        GridFunction::from_parts_unchecked(b.mesh().clone(), u),
        report,
    ))
}

/// Resolvent on an arbitrary coupling.
///
/// Minimizes the 1-strongly convex `F(u) = ½‖u - b‖²_h + λE(u)` by a damped
/// Newton method warm-started at `b`. Newton systems `(I + λ∇²E) d = -∇F` are
/// solved by Jacobi-preconditioned conjugate gradients in the `h` inner
/// product, and steps are globalized with Armijo backtracking on `F`. For
/// `p < 2` the curvature `Ψ'` is singular at ties, so differences are floored
/// at `1e-12 · (1 + max|b|)` when building the Newton matrix; the step is
/// still a descent direction and the line search still runs on the exact `F`.
///
/// Near-tied neighbours put a floor under the attainable residual when
/// `p < 2`. The solve also stops once the residual is below that floor.
pub fn resolvent_coupling<C: Coupling>(
    c: &C,
    p: PExponent,
    lambda: f64,
    b: &[f64],
    opts: ResolventOptions,
) -> Result<(Vec<f64>, ResolventReport)> {
    let p = require_p_above_one(p)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(
            "resolvent parameter lambda must be positive",
        ));
    }
    let n = c.n();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let h = c.sizes();
    let tol = opts.tolerance_for(weighted_norm(h, b, 2.0));
    let tie = 1e-12 * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));

    let mut u = b.to_vec();
    let mut lap = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let objective = |u: &[f64]| -> f64 {
        let fit: f64 = h
            .iter()
            .zip(u.iter().zip(b))
            .map(|(hi, (ui, bi))| hi * (ui - bi) * (ui - bi))
            .sum();
        0.5 * fit + lambda * energy_coupling(c, p, u)
    };
    let gradient = |u: &[f64], lap: &mut [f64], grad: &mut [f64]| -> f64 {
        apply_coupling(c, p, u, lap);
        for i in 0..n {
            grad[i] = u[i] - b[i] + lambda * lap[i];
        }
        weighted_norm(h, grad, 2.0)
    };

    let mut residual = gradient(&u, &mut lap, &mut grad);
    let mut iterations = 0;
    let mut hess = Vec::new();
    let mut direction = vec![0.0; n];
    loop {
        if residual <= tol || residual <= rounding_floor(c, p, lambda, &u, b) {
            return Ok((
                u,
                ResolventReport {
                    iterations,
                    residual,
                },
            ));
        }
        if iterations == opts.max_iters {
            return Err(Error::NoConvergence {
                step: None,
                iterations,
                residual,
            });
        }
        iterations += 1;

        hess.clear();
        let mut diag = vec![1.0; n];
        for i in 0..n {
            let ui = u[i];
            c.for_each_in_row(i, |j, w| {
                let hw = w * psi_prime(p, u[j] - ui, tie);
                hess.push(hw);
                if j != i {
                    diag[i] += lambda * hw;
                }
            });
        }
        let forcing = residual.min(1e-2);
        newton_direction(c, lambda, &hess, &diag, &grad, forcing, &mut direction);

        let f0 = objective(&u);
        let slope: f64 = (0..n).map(|i| h[i] * grad[i] * direction[i]).sum();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = u[i] + step * direction[i];
            }
            let f1 = objective(&trial);
            if f1 <= f0 + 1e-4 * step * slope {
                accepted = true;
            } else if (f1 - f0).abs() <= 1e-13 * f0.abs().max(f64::MIN_POSITIVE) {
                // objective differences are at rounding level; fall back to the residual
                let mut g2 = vec![0.0; n];
                let mut l2 = vec![0.0; n];
                if gradient(&trial, &mut l2, &mut g2) < residual {
                    accepted = true;
                }
            }
            if accepted {
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                step: None,
                iterations,
                residual,
            });
        }
        core::mem::swap(&mut u, &mut trial);
        residual = gradient(&u, &mut lap, &mut grad);
    }
}

/// `‖e‖_{h,2}` where `e_i` bounds how much the gradient `u - b + λΔ_p u` at
/// cell `i` moves when the state moves by a few ulps. For `p < 2` and nearly
/// tied neighbours this is about `λ Σ_j w_ij ulp^{p-1}`, far above machine
/// precision, and no floating-point state has a smaller residual.
fn rounding_floor<C: Coupling>(c: &C, p: f64, lambda: f64, u: &[f64], b: &[f64]) -> f64 {
    let n = c.n();
    let mut e = vec![0.0; n];
    for i in 0..n {
        let ui = u[i];
        let mut s = 4.0 * f64::EPSILON * (ui.abs() + b[i].abs());
        c.for_each_in_row(i, |j, w| {
            let d = (u[j] - ui).abs();
            let delta = 4.0 * f64::EPSILON * ui.abs().max(u[j].abs());
            s += lambda * w * (psi(p, d + delta) - psi(p, d));
        });
        e[i] = s;
    }
    weighted_norm(c.sizes(), &e, 2.0)
}

/// Approximately solves `(I + λL) d = -g`, where `(L v)_i = Σ_j m_ij (v_i - v_j)`
/// and `m_ij` are stored in `hess` in row-visit order.
fn newton_direction<C: Coupling>(
    c: &C,
    lambda: f64,
    hess: &[f64],
    diag: &[f64],
    g: &[f64],
    forcing: f64,
    d: &mut [f64],
) {
    let n = c.n();
    let h = c.sizes();
    let dot = |x: &[f64], y: &[f64]| -> f64 { (0..n).map(|i| h[i] * x[i] * y[i]).sum() };
    let matvec = |v: &[f64], out: &mut [f64]| {
        let mut k = 0;
        for i in 0..n {
            let vi = v[i];
            let mut s = 0.0;
            c.for_each_in_row(i, |j, _| {
                s += hess[k] * (vi - v[j]);
                k += 1;
            });
            out[i] = vi + lambda * s;
        }
    };

    d.fill(0.0);
    let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
    let rhs_norm = dot(&r, &r).sqrt();
    if rhs_norm == 0.0 {
        return;
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, m)| a / m).collect();
    let mut dir = z.clone();
    let mut a_dir = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_cg = (10 * n).clamp(50, 5000);
    for _ in 0..max_cg {
        matvec(&dir, &mut a_dir);
        let curvature = dot(&dir, &a_dir);
        if !(curvature > 0.0) {
            break;
        }
        let alpha = rz / curvature;
        for i in 0..n {
            d[i] += alpha * dir[i];
            r[i] -= alpha * a_dir[i];
        }
        if dot(&r, &r).sqrt() <= forcing * rhs_norm {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            dir[i] = z[i] + beta * dir[i];
        }
    }
}

/// Sharp monotonicity constant `C₁ = 2^{2-p} min(1, p-1)`.
pub fn monotonicity_constant(p: f64) -> f64 {
    2f64.powf(2.0 - p) * (p - 1.0).min(1.0)
}

/// Sharp continuity constant `C₂ = max(2^{2-p}, (p-1) 2^{2-p}, 1)`.
pub fn continuity_constant(p: f64) -> f64 {
    let t = 2f64.powf(2.0 - p);
    t.max((p - 1.0) * t).max(1.0)
}

/// Constant `C` of the Hölder co-coercivity of `Δ_p` on `L²` for `p ∈ (1, 2]`:
/// `C = 2^{(p-2)/(2(p-1))} (C₂^{1/2} k)^{1/(1-p)} (1 - 1/p)` with
/// `k = ‖K‖_{L^{∞,1}}`. Forward Euler steps are bounded by `2C r^{(2-p)/(p-1)}`.
pub fn cfl_constant(p: f64, k_inf1: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidP {
            p,
            allowed: "(1, 2]",
        });
    }
    if !(k_inf1 > 0.0 && k_inf1.is_finite()) {
        return Err(Error::InvalidParameter(
            "kernel L^(inf,1) norm must be positive",
        ));
    }
    let c2 = continuity_constant(p);
    Ok(2f64.powf((p - 2.0) / (2.0 * (p - 1.0)))
        * (c2.sqrt() * k_inf1).powf(1.0 / (1.0 - p))
        * (1.0 - 1.0 / p))
}

/// `(lhs, rhs)` of `(Ψ(y) - Ψ(x))(y - x) >= C₁ |y - x|^β (|y| + |x|)^{p-β}`,
/// for `p > 1` and `β >= max(p, 2)`.
pub fn check_monotonicity(p: f64, beta_exp: f64, x: f64, y: f64) -> (f64, f64) {
    debug_assert!(p > 1.0 && beta_exp >= p.max(2.0));
    if x == y {
        return (0.0, 0.0);
    }
    let lhs = (psi(p, y) - psi(p, x)) * (y - x);
    let rhs = monotonicity_constant(p)
        * (y - x).abs().powf(beta_exp)
        * (y.abs() + x.abs()).powf(p - beta_exp);
    (lhs, rhs)
}

/// `(lhs, rhs)` of `|Ψ(y) - Ψ(x)| <= C₂ |y - x|^α (|y| + |x|)^{p-1-α}`,
/// for `p > 1` and `α ∈ [0, min(1, p-1)]`.
pub fn check_continuity(p: f64, alpha_exp: f64, x: f64, y: f64) -> (f64, f64) {
    debug_assert!(p > 1.0 && (0.0..=(p - 1.0).min(1.0)).contains(&alpha_exp));
    if x == y {
        return (0.0, 0.0);
    }
    let lhs = (psi(p, y) - psi(p, x)).abs();
    let rhs = continuity_constant(p)
        * (y - x).abs().powf(alpha_exp)
        * (y.abs() + x.abs()).powf(p - 1.0 - alpha_exp);
    (lhs, rhs)
}
