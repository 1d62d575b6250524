//! Time stepping for `∂u/∂t = -Δ_p u + f` on a discrete kernel or a sampled
//! graph.
//!
//! Three schemes are provided:
//! - [`forward_euler`] for `p ∈ (1, 2]`, with the state-dependent step bound
//!   `τ ≤ 2C r^{(2-p)/(p-1)}`;
//! - [`subgradient_p1`] for `p = 1`, with diminishing steps;
//! - [`backward_euler`] for `p > 1`, one resolvent solve per step.
//!
//! A [`Trajectory`] keeps the time partition and the states and can be
//! evaluated through its piecewise-linear and piecewise-constant time
//! extensions.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::graph::{GraphCoupling, GraphSample};
use crate::mesh::{same_mesh, weighted_norm, DiscreteKernel, GridFunction, Mesh};
use crate::plaplacian::{
    apply_coupling, cfl_constant, eta_coupling, resolvent_coupling, Coupling, PExponent,
    ResolventOptions,
};
use crate::quadrature::GaussRule;

/// Right-hand side `f(x, t)`, given cellwise on the problem mesh.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    Zero,
    TimeConstant(GridFunction),
    /// `f(x, t) = a(x) b(t)` with `b(t) = Σ_k c_k t^k`.
    Separable {
        space: GridFunction,
        time: Vec<f64>,
    },
    /// Snapshots at increasing times, linearly interpolated in between and
    /// held constant outside the table.
    Tabulated {
        times: Vec<f64>,
        values: Vec<GridFunction>,
    },
}

impl SourceTerm {
    pub fn is_time_independent(&self) -> bool {
        matches!(self, SourceTerm::Zero | SourceTerm::TimeConstant(_))
    }

    fn validate(&self, mesh: &Arc<Mesh>) -> Result<()> {
        match self {
            SourceTerm::Zero => Ok(()),
            SourceTerm::TimeConstant(f) | SourceTerm::Separable { space: f, .. } => {
                if !same_mesh(f.mesh(), mesh) {
                    return Err(Error::MeshMismatch);
                }
                if let SourceTerm::Separable { time, .. } = self {
                    if time.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidParameter(
                            "source time coefficients must be finite",
                        ));
                    }
                }
                Ok(())
            }
            SourceTerm::Tabulated { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated source needs one snapshot per time",
                    ));
                }
                if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite())
                {
                    return Err(Error::InvalidParameter(
                        "tabulated source times must increase strictly",
                    ));
                }
                if values.iter().any(|v| !same_mesh(v.mesh(), mesh)) {
                    return Err(Error::MeshMismatch);
                }
                Ok(())
            }
        }
    }

    /// `f(·, t)` into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        match self {
            SourceTerm::Zero => out.fill(0.0),
            SourceTerm::TimeConstant(f) => out.copy_from_slice(f.values()),
            SourceTerm::Separable { space, time } => {
                let b = horner(time, t);
                for (o, a) in out.iter_mut().zip(space.values()) {
                    *o = a * b;
                }
            }
            SourceTerm::Tabulated { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    out.copy_from_slice(values[0].values());
                } else if k == times.len() {
                    out.copy_from_slice(values[k - 1].values());
                } else {
                    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                    for ((o, a), b) in out
                        .iter_mut()
                        .zip(values[k - 1].values())
                        .zip(values[k].values())
                    {
                        *o = (1.0 - w) * a + w * b;
                    }
                }
            }
        }
    }

    /// `τ^{-1} ∫_{t0}^{t1} f(·, t) dt` into `out`.
    pub fn step_average_into(&self, t0: f64, t1: f64, out: &mut [f64]) {
        match self {
            SourceTerm::Zero | SourceTerm::TimeConstant(_) => self.eval_into(t0, out),
            SourceTerm::Separable { space, time } => {
                let mean = (antiderivative(time, t1) - antiderivative(time, t0)) / (t1 - t0);
                for (o, a) in out.iter_mut().zip(space.values()) {
                    *o = a * mean;
                }
            }
            SourceTerm::Tabulated { times, .. } => {
                // the interpolant is linear between knots, so a Gauss rule on each
                // knot-free piece is exact
                let rule = GaussRule::new(4);
                let mut knots = vec![t0];
                knots.extend(times.iter().copied().filter(|&s| s > t0 && s < t1));
                knots.push(t1);
                let mut sample = vec![0.0; out.len()];
                out.fill(0.0);
                for piece in knots.windows(2) {
                    for (t, w) in rule.mapped(piece[0], piece[1]) {
                        self.eval_into(t, &mut sample);
                        for (o, s) in out.iter_mut().zip(&sample) {
                            *o += w * s;
                        }
                    }
                }
                let inv = 1.0 / (t1 - t0);
                out.iter_mut().for_each(|o| *o *= inv);
            }
        }
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn antiderivative(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &c)| acc * t + c / (k + 1) as f64)
        * t
}

/// Where the interaction weights come from.
#[derive(Debug, Clone)]
pub enum Operator {
    Kernelized(Arc<DiscreteKernel>),
    Graph(Arc<GraphSample>),
}

#[derive(Debug, Clone)]
pub struct Problem {
    operator: Operator,
    p: PExponent,
    initial: GridFunction,
    source: SourceTerm,
    horizon: f64,
}

impl Problem {
    /// Checks that every field lives on the mesh of `initial`. A graph needs a
    /// uniform mesh with one cell per vertex.
    pub fn new(
        operator: Operator,
        p: PExponent,
        initial: GridFunction,
        source: SourceTerm,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter("horizon T must be positive"));
        }
        match &operator {
            Operator::Kernelized(kd) => {
                if !same_mesh(kd.mesh(), initial.mesh()) {
                    return Err(Error::MeshMismatch);
                }
            }
            Operator::Graph(g) => {
                if g.n() != initial.len() || !initial.mesh().is_uniform() {
                    return Err(Error::MeshMismatch);
                }
            }
        }
        source.validate(initial.mesh())?;
        Ok(Self {
            operator,
            p,
            initial,
            source,
            horizon,
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn p(&self) -> PExponent {
        self.p
    }

    pub fn initial(&self) -> &GridFunction {
        &self.initial
    }

    pub fn source(&self) -> &SourceTerm {
        &self.source
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.initial.mesh()
    }

    fn coupling(&self) -> ProblemCoupling<'_> {
        match &self.operator {
            Operator::Kernelized(kd) => ProblemCoupling::Dense(kd),
            Operator::Graph(g) => ProblemCoupling::Graph(
                g.coupling(self.initial.mesh())
                    .expect("graph size checked at construction"),
            ),
        }
    }
}

enum ProblemCoupling<'a> {
    Dense(&'a DiscreteKernel),
    Graph(GraphCoupling<'a>),
}

impl Coupling for ProblemCoupling<'_> {
    fn n(&self) -> usize {
        match self {
            ProblemCoupling::Dense(k) => Coupling::n(*k),
            ProblemCoupling::Graph(g) => g.n(),
        }
    }

    fn sizes(&self) -> &[f64] {
        match self {
            ProblemCoupling::Dense(k) => Coupling::sizes(*k),
            ProblemCoupling::Graph(g) => g.sizes(),
        }
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, visit: F) {
        match self {
            ProblemCoupling::Dense(k) => k.for_each_in_row(i, visit),
            ProblemCoupling::Graph(g) => g.for_each_in_row(i, visit),
        }
    }
}

/// `Δ_p u` for the problem's operator; for `p = 1` the element of the
/// 1-Laplacian selected with `sign(0) = 0`.
pub fn apply_operator(prob: &Problem, u: &GridFunction) -> Result<GridFunction> {
    if !same_mesh(u.mesh(), prob.mesh()) {
        return Err(Error::MeshMismatch);
    }
    let c = prob.coupling();
    let mut out = vec![0.0; u.len()];
    if prob.p.is_one() {
        eta_coupling(&c, u.values(), &mut out);
    } else {
        apply_coupling(&c, prob.p.get(), u.values(), &mut out);
    }
    GridFunction::new(u.mesh().clone(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ForwardEuler,
    SubgradientP1,
    BackwardEuler,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ForwardEuler => "forward_euler",
            Scheme::SubgradientP1 => "subgradient_p1",
            Scheme::BackwardEuler => "backward_euler",
        }
    }

    /// Whether the piecewise-constant extension on `(t_{k-1}, t_k]` takes `u^k`
    /// rather than `u^{k-1}`.
    pub fn is_implicit(self) -> bool {
        matches!(self, Scheme::BackwardEuler)
    }
}

/// Which states a trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Storage {
    #[default]
    Full,
    /// `u^0`, every `k`-th state and the final one. Extensions then interpolate
    /// between the kept states.
    Every(usize),
}

impl Storage {
    fn keeps(self, step: usize) -> bool {
        match self {
            Storage::Full => true,
            Storage::Every(k) => k <= 1 || step.is_multiple_of(k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub tau: f64,
    /// Inner solver iterations; zero for explicit schemes.
    pub iterations: usize,
    /// Final resolvent residual for implicit steps, else the operator
    /// residual `‖Δu - f‖_{h,2}` that set the step.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    scheme: Scheme,
    mesh: Arc<Mesh>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Times of the stored states, starting at 0 and ending at `T`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> GridFunction {
        GridFunction::from_parts_unchecked(self.mesh.clone(), self.states[k].clone())
    }

    pub fn final_state(&self) -> GridFunction {
        self.state(self.states.len() - 1)
    }

    /// One record per time step, stored or not.
    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn horizon(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds the initial state")
    }

    /// Index `k` with `t ∈ (t_{k-1}, t_k]`, or 0 for `t <= 0`.
    fn interval(&self, t: f64) -> usize {
        self.times
            .partition_point(|&s| s < t)
            .min(self.times.len() - 1)
    }

    /// `ǔ(·, t)`: linear interpolation between consecutive states.
    pub fn linear_state_into(&self, t: f64, out: &mut [f64]) {
        let k = self.interval(t);
        if k == 0 {
            out.copy_from_slice(&self.states[0]);
            return;
        }
        let (a, b) = (self.times[k - 1], self.times[k]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        for ((o, x), y) in out.iter_mut().zip(&self.states[k - 1]).zip(&self.states[k]) {
            *o = (1.0 - w) * x + w * y;
        }
    }

    /// `ū(·, t)`: `u^{k-1}` on `(t_{k-1}, t_k]` for explicit schemes, `u^k` for
    /// backward Euler; `g` at `t = 0`.
    pub fn const_state(&self, t: f64) -> &[f64] {
        let k = self.interval(t);
        if k == 0 {
            &self.states[0]
        } else if self.scheme.is_implicit() {
            &self.states[k]
        } else {
            &self.states[k - 1]
        }
    }

    /// `ū(·, t⁺)`, the right limit of the constant extension.
    pub fn const_state_right(&self, t: f64) -> &[f64] {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return &self.states[0];
        }
        if k >= self.times.len() {
            return self.states.last().expect("nonempty");
        }
        if self.scheme.is_implicit() {
            &self.states[k]
        } else {
            &self.states[k - 1]
        }
    }

    /// `ǔ(x, t)`.
    pub fn extend_linear(&self, x: f64, t: f64) -> f64 {
        let cell = self.mesh.locate(x);
        let k = self.interval(t);
        if k == 0 {
            return self.states[0][cell];
        }
        let (a, b) = (self.times[k - 1], self.times[k]);
        let w = ((t - a) / (b - a)).clamp(0.0, 1.0);
        (1.0 - w) * self.states[k - 1][cell] + w * self.states[k][cell]
    }

    /// `ū(x, t)`.
    pub fn extend_const(&self, x: f64, t: f64) -> f64 {
        self.const_state(t)[self.mesh.locate(x)]
    }

    /// `max_k ‖u^k - u^{k-1}‖_{h,2}` over consecutive stored states.
    pub fn max_increment(&self) -> f64 {
        let h = self.mesh.sizes();
        self.states
            .windows(2)
            .map(|w| {
                let d: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
                weighted_norm(h, &d, 2.0)
            })
            .fold(0.0, f64::max)
    }
}

struct Recorder {
    storage: Storage,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    steps: Vec<StepRecord>,
}

impl Recorder {
    fn new(storage: Storage, g: &[f64]) -> Self {
        Self {
            storage,
            times: vec![0.0],
            states: vec![g.to_vec()],
            steps: Vec::new(),
        }
    }

    fn push(&mut self, t: f64, u: &[f64], record: StepRecord, last: bool) {
        self.steps.push(record);
        if last || self.storage.keeps(self.steps.len()) {
            self.times.push(t);
            self.states.push(u.to_vec());
        }
    }

    fn finish(self, scheme: Scheme, mesh: Arc<Mesh>) -> Trajectory {
        Trajectory {
            scheme,
            mesh,
            times: self.times,
            states: self.states,
            steps: self.steps,
        }
    }
}

/// Settings of [`forward_euler`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardOptions {
    pub tau_max: f64,
    /// Fraction of the step bound actually taken, in `(0, 1]`.
    pub safety: f64,
    /// For `p < 2`, a state whose residual is at or below this value counts as
    /// stationary: it is kept and the step bound is switched off.
    pub residual_floor: f64,
    pub max_steps: usize,
    pub storage: Storage,
}

impl ForwardOptions {
    pub fn new(tau_max: f64) -> Self {
        Self {
            tau_max,
            safety: 0.9,
            residual_floor: 1e-8,
            max_steps: 100_000_000,
            storage: Storage::Full,
        }
    }
}

/// Smallest step the explicit schemes accept.
pub const MIN_STEP: f64 = 1e-14;

/// A final step shorter than this fraction of `T` is merged into the one
/// before it.
const MERGE_FRACTION: f64 = 1e-12;

fn next_step(t: f64, horizon: f64, tau: f64) -> (f64, bool) {
    let remaining = horizon - t;
    if tau >= remaining || remaining - tau < MERGE_FRACTION * horizon {
        (remaining, true)
    } else {
        (tau, false)
    }
}

/// Explicit Euler `u^k = u^{k-1} + τ_k(-Δ_p u^{k-1} + f)` for `p ∈ (1, 2]`.
///
/// The step is `τ_k = min(tau_max, safety · 2C · r^{(2-p)/(p-1)}, T - t_{k-1})`
/// with `r = ‖Δ_p u^{k-1} - f‖_{h,2}` and `C` from [`cfl_constant`] at the
/// `L^{∞,1}` norm of the weights. At `p = 2` the bound is the constant
/// `safety · 2C`.
pub fn forward_euler(prob: &Problem, opts: &ForwardOptions) -> Result<Trajectory> {
    let p = prob.p.get();
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidP {
            p,
            allowed: "(1, 2]",
        });
    }
    if !prob.source.is_time_independent() {
        return Err(Error::TimeDependentSource);
    }
    if !(opts.tau_max > 0.0
        && opts.safety > 0.0
        && opts.safety <= 1.0
        && opts.residual_floor >= 0.0)
    {
        return Err(Error::InvalidParameter(
            "forward Euler needs tau_max > 0, safety in (0, 1] and residual_floor >= 0",
        ));
    }
    let c = prob.coupling();
    let n = c.n();
    let h = c.sizes();
    let k_inf1 = c.linf1();
    let bound = if k_inf1 > 0.0 {
        Some(opts.safety * 2.0 * cfl_constant(p, k_inf1)?)
    } else {
        None
    };
    let exponent = (2.0 - p) / (p - 1.0);
    let horizon = prob.horizon;

    let mut f = vec![0.0; n];
    prob.source.eval_into(0.0, &mut f);
    let mut u = prob.initial.values().to_vec();
    let mut lap = vec![0.0; n];
    let mut rate = vec![0.0; n];
    let mut rec = Recorder::new(opts.storage, &u);
    let mut t = 0.0;
    loop {
        if rec.steps.len() >= opts.max_steps {
            return Err(Error::HorizonUnreachable {
                covered: t,
                steps: rec.steps.len(),
            });
        }
        apply_coupling(&c, p, &u, &mut lap);
        for i in 0..n {
            rate[i] = f[i] - lap[i];
        }
        let r = weighted_norm(h, &rate, 2.0);
        let mut stationary = exponent > 0.0 && r <= opts.residual_floor;
        let mut tau = opts.tau_max;
        if let Some(b) = bound {
            if exponent == 0.0 {
                tau = tau.min(b);
            } else if !stationary {
                let cfl = b * r.powf(exponent);
                if cfl < MIN_STEP {
                    return Err(Error::StepUnderflow { t, tau: cfl });
                }
                tau = tau.min(cfl);
            }
        }
        let (mut tau, mut last) = next_step(t, horizon, tau);
        if !stationary && tau < opts.tau_max && (0..n).all(|i| u[i] + tau * rate[i] == u[i]) {
            // the bounded step is below the resolution of the state
            stationary = true;
            (tau, last) = next_step(t, horizon, opts.tau_max);
        }
        // a full step from a tie would overshoot it, Ψ being steeper than
        // linear at 0, so a stationary state is kept as is
        if !stationary {
            for i in 0..n {
                u[i] += tau * rate[i];
            }
        }
        t = if last { horizon } else { t + tau };
        rec.push(
            t,
            &u,
            StepRecord {
                tau,
                iterations: 0,
                residual: r,
            },
            last,
        );
        if last {
            break;
        }
    }
    Ok(rec.finish(Scheme::ForwardEuler, prob.mesh().clone()))
}

/// Step sizes `α_k` of [`subgradient_p1`], `k = 0, 1, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepDecay {
    /// `α_k = α₀ / (k + 1)`.
    Harmonic,
    /// `α_k = α₀ (k + 1)^{-γ}`, square-summable for `γ > 1/2`.
    Power(f64),
}

impl StepDecay {
    pub fn alpha(self, alpha0: f64, k: usize) -> f64 {
        match self {
            StepDecay::Harmonic => alpha0 / (k + 1) as f64,
            StepDecay::Power(gamma) => alpha0 * ((k + 1) as f64).powf(-gamma),
        }
    }
}

/// Settings of [`subgradient_p1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientOptions {
    pub alpha0: f64,
    pub decay: StepDecay,
    pub max_steps: usize,
    pub storage: Storage,
}

impl SubgradientOptions {
    pub fn new(alpha0: f64) -> Self {
        Self {
            alpha0,
            decay: StepDecay::Harmonic,
            max_steps: 10_000_000,
            storage: Storage::Full,
        }
    }
}

/// Subgradient steps for the 1-Laplacian flow:
/// `u^k = u^{k-1} + τ_k(-η^{k-1} + f)` with `τ_k = α_k / max(‖η^{k-1} - f‖_{h,2}, 1)`,
/// the last step cut at `T`.
pub fn subgradient_p1(prob: &Problem, opts: &SubgradientOptions) -> Result<Trajectory> {
    if !prob.p.is_one() {
        return Err(Error::InvalidP {
            p: prob.p.get(),
            allowed: "{1}",
        });
    }
    if !prob.source.is_time_independent() {
        return Err(Error::TimeDependentSource);
    }
    let gamma_ok = match opts.decay {
        StepDecay::Harmonic => true,
        StepDecay::Power(g) => g > 0.5 && g <= 1.0,
    };
    if !(opts.alpha0 > 0.0 && opts.alpha0.is_finite() && gamma_ok) {
        return Err(Error::InvalidParameter(
            "subgradient steps need alpha0 > 0 and a decay exponent in (1/2, 1]",
        ));
    }
    let c = prob.coupling();
    let n = c.n();
    let h = c.sizes();
    let horizon = prob.horizon;
    let mut f = vec![0.0; n];
    prob.source.eval_into(0.0, &mut f);
    let mut u = prob.initial.values().to_vec();
    let mut eta = vec![0.0; n];
    let mut rate = vec![0.0; n];
    let mut rec = Recorder::new(opts.storage, &u);
    let mut t = 0.0;
    loop {
        let k = rec.steps.len();
        if k >= opts.max_steps {
            return Err(Error::HorizonUnreachable {
                covered: t,
                steps: k,
            });
        }
        eta_coupling(&c, &u, &mut eta);
        for i in 0..n {
            rate[i] = f[i] - eta[i];
        }
        let r = weighted_norm(h, &rate, 2.0);
        let (tau, last) = next_step(t, horizon, opts.decay.alpha(opts.alpha0, k) / r.max(1.0));
        for i in 0..n {
            u[i] += tau * rate[i];
        }
        t = if last { horizon } else { t + tau };
        rec.push(
            t,
            &u,
            StepRecord {
                tau,
                iterations: 0,
                residual: r,
            },
            last,
        );
        if last {
            break;
        }
    }
    Ok(rec.finish(Scheme::SubgradientP1, prob.mesh().clone()))
}

/// `t_k = kT/N`, `k = 0..=N`, with `t_N = T` exactly.
pub fn uniform_partition(horizon: f64, steps: usize) -> Vec<f64> {
    let mut times: Vec<f64> = (0..=steps)
        .map(|k| horizon * k as f64 / steps as f64)
        .collect();
    if let Some(last) = times.last_mut() {
        *last = horizon;
    }
    times
}

/// Settings of [`backward_euler`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BackwardOptions {
    pub solve: ResolventOptions,
    pub storage: Storage,
}

/// Implicit Euler `u^k = J_{τ_k Δ_p}(u^{k-1} + τ_k f^k)` on the partition
/// `times`, where `f^k` is the mean of `f` over `(t_{k-1}, t_k)`.
pub fn backward_euler(prob: &Problem, times: &[f64], opts: &BackwardOptions) -> Result<Trajectory> {
    let p = prob.p;
    if !(p.get() > 1.0) {
        return Err(Error::InvalidP {
            p: p.get(),
            allowed: "(1, inf)",
        });
    }
    let horizon = prob.horizon;
    if times.len() < 2
        || times[0] != 0.0
        || times.windows(2).any(|w| !(w[0] < w[1]))
        || (times[times.len() - 1] - horizon).abs() > 1e-12 * horizon.max(1.0)
    {
        return Err(Error::InvalidParameter(
            "time partition must increase strictly from 0 to T",
        ));
    }
    let c = prob.coupling();
    let n = c.n();
    let mut u = prob.initial.values().to_vec();
    let mut f = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut rec = Recorder::new(opts.storage, &u);
    let steps = times.len() - 1;
    for k in 1..=steps {
        let (t0, t1) = (times[k - 1], times[k]);
        let tau = t1 - t0;
        prob.source.step_average_into(t0, t1, &mut f);
        for i in 0..n {
            b[i] = u[i] + tau * f[i];
        }
        let (next, report) =
            resolvent_coupling(&c, p, tau, &b, opts.solve).map_err(|e| match e {
                Error::NoConvergence {
                    iterations,
                    residual,
                    ..
                } => Error::NoConvergence {
                    step: Some(k),
                    iterations,
                    residual,
                },
                other => other,
            })?;
        u = next;
        let t = if k == steps { horizon } else { t1 };
        rec.push(
            t,
            &u,
            StepRecord {
                tau,
                iterations: report.iterations,
                residual: report.residual,
            },
            k == steps,
        );
    }
    Ok(rec.finish(Scheme::BackwardEuler, prob.mesh().clone()))
}
