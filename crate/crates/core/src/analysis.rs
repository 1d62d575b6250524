//! Reference solutions, distances between evolutions and convergence-rate
//! studies.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::evolve::{
    backward_euler, forward_euler, subgradient_p1, uniform_partition, BackwardOptions,
    ForwardOptions, Operator, Problem, Scheme, SourceTerm, SubgradientOptions, Trajectory,
};
use crate::exec::Executor;
use crate::graph::{sample, truncate};
use crate::kernel::KernelSpec;
use crate::mesh::{
    project_function, project_kernel_with, same_mesh, DiscreteKernel, GridFunction,
    KernelProjection, Mesh, DEFAULT_QUADRATURE_ORDER,
};
use crate::plaplacian::{psi, PExponent};

/// Anything that assigns a state to each time in `[0, horizon]`.
pub trait Evolution {
    fn mesh(&self) -> &Arc<Mesh>;

    /// `f64::INFINITY` for exact solutions defined for all times.
    fn horizon(&self) -> f64;

    /// Times where the state may jump.
    fn breakpoints(&self) -> &[f64];

    /// State at `t`. At a breakpoint, `right` selects the right limit.
    fn state_into(&self, t: f64, right: bool, out: &mut [f64]);
}

impl Evolution for Trajectory {
    fn mesh(&self) -> &Arc<Mesh> {
        Trajectory::mesh(self)
    }

    fn horizon(&self) -> f64 {
        Trajectory::horizon(self)
    }

    fn breakpoints(&self) -> &[f64] {
        self.times()
    }

    fn state_into(&self, t: f64, right: bool, out: &mut [f64]) {
        let s = if right {
            self.const_state_right(t)
        } else {
            self.const_state(t)
        };
        out.copy_from_slice(s);
    }
}

/// Exact solution of the linear flow `u' = -Lu + f` with
/// `(Lu)_i = Σ_j h_j K_ij (u_i - u_j)` and `f` constant in time.
///
/// `L` is self-adjoint in the `h` inner product, so `H^{1/2} L H^{-1/2}` is
/// symmetric and is diagonalized once.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    mesh: Arc<Mesh>,
    sqrt_h: Vec<f64>,
    eigenvalues: Vec<f64>,
    basis: DMatrix<f64>,
    initial: DVector<f64>,
    source: DVector<f64>,
}

impl LinearOracle {
    pub fn new(kd: &DiscreteKernel, g: &GridFunction, f: Option<&GridFunction>) -> Result<Self> {
        if !same_mesh(kd.mesh(), g.mesh()) || f.is_some_and(|f| !same_mesh(f.mesh(), g.mesh())) {
            return Err(Error::MeshMismatch);
        }
        let n = kd.n();
        let h = kd.mesh().sizes();
        let sqrt_h: Vec<f64> = h.iter().map(|v| v.sqrt()).collect();
        let mut sym = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if j != i {
                    let k = kd.get(i, j);
                    diag += h[j] * k;
                    sym[(i, j)] = -sqrt_h[i] * sqrt_h[j] * k;
                }
            }
            sym[(i, i)] = diag;
        }
        let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailure);
        }
        let weighted =
            |v: &[f64]| DVector::from_iterator(n, v.iter().zip(&sqrt_h).map(|(a, s)| a * s));
        let initial = eig.eigenvectors.tr_mul(&weighted(g.values()));
        let source = match f {
            Some(f) => eig.eigenvectors.tr_mul(&weighted(f.values())),
            None => DVector::zeros(n),
        };
        Ok(Self {
            mesh: kd.mesh().clone(),
            sqrt_h,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            basis: eig.eigenvectors,
            initial,
            source,
        })
    }

    /// `u(t)`.
    pub fn state(&self, t: f64) -> GridFunction {
        let mut out = vec![0.0; self.sqrt_h.len()];
        self.state_into(t, false, &mut out);
        GridFunction::from_parts_unchecked(self.mesh.clone(), out)
    }
}

impl Evolution for LinearOracle {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn horizon(&self) -> f64 {
        f64::INFINITY
    }

    fn breakpoints(&self) -> &[f64] {
        &[]
    }

    fn state_into(&self, t: f64, _right: bool, out: &mut [f64]) {
        if t == 0.0 {
            // exact initial data rather than its round trip through the basis
            for (i, o) in out.iter_mut().enumerate() {
                let v: f64 = self.basis.row(i).dot(&self.initial.transpose());
                *o = v / self.sqrt_h[i];
            }
            return;
        }
        let coeffs = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().enumerate().map(|(k, &lam)| {
                let lam = lam.max(0.0);
                let decay = (-lam * t).exp();
                // (1 - e^{-λt}) / λ, continuous at λ = 0
                let phi = if lam * t < 1e-300 {
                    t
                } else {
                    -(-lam * t).exp_m1() / lam
                };
                decay * self.initial[k] + phi * self.source[k]
            }),
        );
        let v = &self.basis * coeffs;
        for (i, o) in out.iter_mut().enumerate() {
            *o = v[i] / self.sqrt_h[i];
        }
    }
}

/// Linear flow at time `t` from `g` with constant source `f`.
pub fn linear_oracle_p2(
    kd: &DiscreteKernel,
    g: &GridFunction,
    f: Option<&GridFunction>,
    t: f64,
) -> Result<GridFunction> {
    let oracle = LinearOracle::new(kd, g, f)?;
    if t == 0.0 {
        return Ok(g.clone());
    }
    Ok(oracle.state(t))
}

/// Gap `w(t)` solving `w' = -KΨ(w)`, `w(0) = w0`.
///
/// For `p < 2` the gap dies at `t = |w0|^{2-p} / ((2-p)K)` and stays zero.
pub fn two_node_closed_form(p: f64, k: f64, w0: f64, t: f64) -> f64 {
    if w0 == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return w0 * (-k * t).exp();
    }
    let e = 2.0 - p;
    let base = w0.abs().powf(e) - e * k * t;
    if base <= 0.0 {
        return 0.0;
    }
    w0.signum() * base.powf(1.0 / e)
}

/// Two cells of width 1/2 coupled by a constant kernel `K`: the mean is fixed
/// and the gap follows [`two_node_closed_form`].
#[derive(Debug, Clone)]
pub struct TwoNodeOracle {
    mesh: Arc<Mesh>,
    p: f64,
    k: f64,
    mean: f64,
    gap: f64,
}

impl TwoNodeOracle {
    pub fn new(p: f64, k: f64, initial: [f64; 2]) -> Result<Self> {
        if !(p > 1.0 && k > 0.0) {
            return Err(Error::InvalidParameter(
                "two-node oracle needs p > 1 and K > 0",
            ));
        }
        Ok(Self {
            mesh: Arc::new(Mesh::uniform(2)?),
            p,
            k,
            mean: 0.5 * (initial[0] + initial[1]),
            gap: initial[1] - initial[0],
        })
    }

    pub fn gap(&self, t: f64) -> f64 {
        two_node_closed_form(self.p, self.k, self.gap, t)
    }
}

impl Evolution for TwoNodeOracle {
    fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    fn horizon(&self) -> f64 {
        f64::INFINITY
    }

    fn breakpoints(&self) -> &[f64] {
        &[]
    }

    fn state_into(&self, t: f64, _right: bool, out: &mut [f64]) {
        let w = self.gap(t);
        out[0] = self.mean - 0.5 * w;
        out[1] = self.mean + 0.5 * w;
    }
}

/// `sup_t ‖a(t) - b(t)‖_{L²}` on the uniform mesh of `n_common` cells.
///
/// The supremum runs over `[0, min(T_a, T_b)]` at every breakpoint of either
/// side, taking left and right limits, plus `time_samples` interior points.
/// Both meshes must be refined by the common mesh.
pub fn traj_error_c0l2<A, B>(a: &A, b: &B, n_common: usize, time_samples: usize) -> Result<f64>
where
    A: Evolution + ?Sized,
    B: Evolution + ?Sized,
{
    let common = Mesh::uniform(n_common).map_err(|_| Error::NonNestedMeshes { n_common })?;
    if !common.refines(a.mesh()) || !common.refines(b.mesh()) {
        return Err(Error::NonNestedMeshes { n_common });
    }
    let horizon = a.horizon().min(b.horizon());
    if !horizon.is_finite() {
        return Err(Error::InvalidParameter(
            "at least one evolution needs a finite horizon",
        ));
    }
    let lookup = |m: &Mesh| -> Vec<usize> {
        (0..n_common)
            .map(|c| {
                let (l, r) = common.cell(c);
                m.locate(0.5 * (l + r))
            })
            .collect()
    };
    let (ia, ib) = (lookup(a.mesh()), lookup(b.mesh()));

    let mut times: Vec<f64> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints())
        .copied()
        .filter(|&t| (0.0..=horizon).contains(&t))
        .collect();
    times.push(0.0);
    times.push(horizon);
    times.extend((0..time_samples).map(|k| horizon * (k + 1) as f64 / (time_samples + 1) as f64));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let h = common.sizes();
    let mut ua = vec![0.0; a.mesh().n()];
    let mut ub = vec![0.0; b.mesh().n()];
    let mut worst: f64 = 0.0;
    for &t in &times {
        for right in [false, true] {
            if right && t == horizon {
                continue;
            }
            a.state_into(t, right, &mut ua);
            b.state_into(t, right, &mut ub);
            let mut s = 0.0;
            for c in 0..n_common {
                let d = ua[ia[c]] - ub[ib[c]];
                s += h[c] * d * d;
            }
            worst = worst.max(s.sqrt());
        }
    }
    Ok(worst)
}

/// Least-squares line through `(log x, log e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    if points
        .iter()
        .any(|&(x, e)| !(x > 0.0 && e > 0.0 && x.is_finite() && e.is_finite()))
    {
        return Err(Error::NonPositive);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, e)| (x.ln(), e.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx <= 1e-300 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        max_residual,
    })
}

pub type ScalarField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuum problem to be discretized at several resolutions.
#[derive(Clone)]
pub struct StudyProblem {
    pub kernel: KernelSpec,
    pub initial: ScalarField,
    /// Time-independent source; `None` for `f = 0`.
    pub source: Option<ScalarField>,
    pub p: PExponent,
    pub horizon: f64,
    pub projection: KernelProjection,
}

impl StudyProblem {
    pub fn new(kernel: KernelSpec, initial: ScalarField, p: PExponent, horizon: f64) -> Self {
        Self {
            kernel,
            initial,
            source: None,
            p,
            horizon,
            projection: KernelProjection::default(),
        }
    }

    fn data(&self, mesh: &Arc<Mesh>) -> Result<(GridFunction, SourceTerm)> {
        let g = project_function(&*self.initial, mesh, DEFAULT_QUADRATURE_ORDER)?;
        let f = match &self.source {
            Some(f) => {
                SourceTerm::TimeConstant(project_function(&**f, mesh, DEFAULT_QUADRATURE_ORDER)?)
            }
            None => SourceTerm::Zero,
        };
        Ok((g, f))
    }

    /// The kernelized problem on `n` uniform cells.
    pub fn discretize(&self, n: usize) -> Result<Problem> {
        let mesh = Arc::new(Mesh::uniform(n)?);
        let kd = project_kernel_with(&self.kernel, &mesh, self.projection)?;
        let (g, f) = self.data(&mesh)?;
        Problem::new(
            Operator::Kernelized(Arc::new(kd)),
            self.p,
            g,
            f,
            self.horizon,
        )
    }
}

/// A scheme together with its time-step parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    Forward(ForwardOptions),
    Subgradient(SubgradientOptions),
    Backward {
        steps: usize,
        options: BackwardOptions,
    },
}

impl TimeScheme {
    pub fn scheme(&self) -> Scheme {
        match self {
            TimeScheme::Forward(_) => Scheme::ForwardEuler,
            TimeScheme::Subgradient(_) => Scheme::SubgradientP1,
            TimeScheme::Backward { .. } => Scheme::BackwardEuler,
        }
    }

    /// `tau_max`, `α₀`, or the uniform step `T/N`.
    pub fn step_parameter(&self, horizon: f64) -> f64 {
        match self {
            TimeScheme::Forward(o) => o.tau_max,
            TimeScheme::Subgradient(o) => o.alpha0,
            TimeScheme::Backward { steps, .. } => horizon / *steps as f64,
        }
    }

    /// The same scheme with the step parameter divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let f = factor as f64;
        match *self {
            TimeScheme::Forward(o) => TimeScheme::Forward(ForwardOptions {
                tau_max: o.tau_max / f,
                ..o
            }),
            TimeScheme::Subgradient(o) => TimeScheme::Subgradient(SubgradientOptions {
                alpha0: o.alpha0 / f,
                ..o
            }),
            TimeScheme::Backward { steps, options } => TimeScheme::Backward {
                steps: steps * factor,
                options,
            },
        }
    }

    pub fn run(&self, prob: &Problem) -> Result<Trajectory> {
        match self {
            TimeScheme::Forward(o) => forward_euler(prob, o),
            TimeScheme::Subgradient(o) => subgradient_p1(prob, o),
            TimeScheme::Backward { steps, options } => {
                backward_euler(prob, &uniform_partition(prob.horizon(), *steps), options)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Space,
    Time,
    Graph,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Space => "space",
            StudyKind::Time => "time",
            StudyKind::Graph => "graph",
        }
    }

    /// What the fitted parameter is.
    pub fn parameter_name(self) -> &'static str {
        match self {
            StudyKind::Space => "h",
            StudyKind::Time => "tau",
            StudyKind::Graph => "rho_n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyResult {
    pub kind: StudyKind,
    /// Mesh size `1/n`, time step, or expected degree `ρ n`.
    pub parameters: Vec<f64>,
    /// Sizes `n` behind each parameter.
    pub sizes: Vec<usize>,
    /// Error per parameter; the mean over seeds for graph studies.
    pub errors: Vec<f64>,
    /// Largest error per parameter over seeds; equal to `errors` otherwise.
    pub max_errors: Vec<f64>,
    /// Per-seed errors of graph studies, one row per parameter.
    pub samples: Vec<Vec<f64>>,
    /// Parameter of the reference solution.
    pub reference: f64,
    /// `None` when the errors do not admit a log-log fit.
    pub fit: Option<RateFit>,
    /// Largest change of an error under halving of the time step, relative to
    /// the smallest error (space studies only).
    pub time_stability: Option<f64>,
}

impl RateStudyResult {
    fn new(
        kind: StudyKind,
        parameters: Vec<f64>,
        sizes: Vec<usize>,
        errors: Vec<f64>,
        reference: f64,
    ) -> Self {
        let points: Vec<(f64, f64)> = parameters
            .iter()
            .copied()
            .zip(errors.iter().copied())
            .collect();
        Self {
            kind,
            fit: fit_rate(&points).ok(),
            max_errors: errors.clone(),
            samples: errors.iter().map(|&e| vec![e]).collect(),
            parameters,
            sizes,
            errors,
            reference,
            time_stability: None,
        }
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

/// Shared settings of the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    /// Extra sample times of the error functional.
    pub time_samples: usize,
    /// Space studies: repeat with half the time step and report the change.
    pub check_time_stability: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            time_samples: 64,
            check_time_stability: false,
        }
    }
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn space_errors<E: Executor>(
    sp: &StudyProblem,
    scheme: &TimeScheme,
    n_list: &[usize],
    n_ref: usize,
    samples: usize,
    exec: &E,
) -> Result<Vec<f64>> {
    let mut sizes = n_list.to_vec();
    sizes.push(n_ref);
    let runs = collect(exec.map(sizes.len(), |k| scheme.run(&sp.discretize(sizes[k])?)))?;
    let (reference, coarse) = runs.split_last().expect("reference run present");
    collect(exec.map(coarse.len(), |k| {
        traj_error_c0l2(&coarse[k], reference, n_ref, samples)
    }))
}

/// Errors of `scheme` at each `n` against the same scheme at `n_ref`, fitted
/// against the mesh size `1/n`.
pub fn study_space<E: Executor>(
    sp: &StudyProblem,
    scheme: &TimeScheme,
    n_list: &[usize],
    n_ref: usize,
    opts: &StudyOptions,
    exec: &E,
) -> Result<RateStudyResult> {
    if n_list.iter().any(|&n| n == 0 || !n_ref.is_multiple_of(n)) {
        return Err(Error::NonNestedMeshes { n_common: n_ref });
    }
    let errors = space_errors(sp, scheme, n_list, n_ref, opts.time_samples, exec)?;
    let params = n_list.iter().map(|&n| 1.0 / n as f64).collect();
    let mut result = RateStudyResult::new(
        StudyKind::Space,
        params,
        n_list.to_vec(),
        errors,
        1.0 / n_ref as f64,
    );
    if opts.check_time_stability {
        let halved = space_errors(
            sp,
            &scheme.refined(2),
            n_list,
            n_ref,
            opts.time_samples,
            exec,
        )?;
        let smallest = result.errors.iter().copied().fold(f64::INFINITY, f64::min);
        let change = result
            .errors
            .iter()
            .zip(&halved)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        result.time_stability = Some(change / smallest);
    }
    Ok(result)
}

/// Errors of `scheme.refined(f)` for each `f` in `factors` against
/// `scheme.refined(max(factors) · ref_factor)`, all on `n` cells, fitted
/// against the step parameter.
pub fn study_time<E: Executor>(
    sp: &StudyProblem,
    scheme: &TimeScheme,
    n: usize,
    factors: &[usize],
    ref_factor: usize,
    opts: &StudyOptions,
    exec: &E,
) -> Result<RateStudyResult> {
    if factors.is_empty() || factors.contains(&0) || ref_factor < 2 {
        return Err(Error::InvalidParameter(
            "time study needs positive refinement factors and a reference factor of at least 2",
        ));
    }
    let prob = sp.discretize(n)?;
    let finest = factors.iter().copied().max().unwrap_or(1) * ref_factor;
    let mut schemes: Vec<TimeScheme> = factors.iter().map(|&f| scheme.refined(f)).collect();
    schemes.push(scheme.refined(finest));
    let runs = collect(exec.map(schemes.len(), |k| schemes[k].run(&prob)))?;
    let (reference, coarse) = runs.split_last().expect("reference run present");
    let errors = collect(exec.map(coarse.len(), |k| {
        traj_error_c0l2(&coarse[k], reference, n, opts.time_samples)
    }))?;
    let horizon = sp.horizon;
    let params = schemes[..factors.len()]
        .iter()
        .map(|s| s.step_parameter(horizon))
        .collect();
    Ok(RateStudyResult::new(
        StudyKind::Time,
        params,
        vec![n; factors.len()],
        errors,
        schemes[factors.len()].step_parameter(horizon),
    ))
}

/// How the graph density shrinks with `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoSchedule {
    /// `ρ_n = n^{-a}`.
    Power(f64),
    Constant(f64),
}

impl RhoSchedule {
    pub fn rho(self, n: usize) -> f64 {
        match self {
            RhoSchedule::Power(a) => (n as f64).powf(-a),
            RhoSchedule::Constant(r) => r,
        }
    }
}

/// Backward Euler on sampled graphs against backward Euler with the truncated
/// kernel `min(K, ρ_n^{-1})` at the same `n`, so only the sampling error is
/// measured. Errors are averaged over `seeds` and fitted against `ρ_n n`.
#[allow(clippy::too_many_arguments)]
pub fn study_graph<E: Executor>(
    sp: &StudyProblem,
    n_list: &[usize],
    schedule: RhoSchedule,
    seeds: &[u64],
    steps: usize,
    options: &BackwardOptions,
    opts: &StudyOptions,
    exec: &E,
) -> Result<RateStudyResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "graph study needs at least one seed",
        ));
    }
    let scheme = TimeScheme::Backward {
        steps,
        options: *options,
    };
    let setups = collect(exec.map(n_list.len(), |k| -> Result<_> {
        let n = n_list[k];
        let mesh = Arc::new(Mesh::uniform(n)?);
        let kd = project_kernel_with(&sp.kernel, &mesh, sp.projection)?;
        let weights = truncate(&kd, schedule.rho(n))?;
        let (g, f) = sp.data(&mesh)?;
        let prob = Problem::new(
            Operator::Kernelized(Arc::new(weights.to_kernel())),
            sp.p,
            g,
            f,
            sp.horizon,
        )?;
        let reference = scheme.run(&prob)?;
        Ok((weights, prob, reference))
    }))?;
    let jobs: Vec<(usize, u64)> = (0..n_list.len())
        .flat_map(|k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let errors = collect(exec.map(jobs.len(), |j| -> Result<f64> {
        let (k, seed) = jobs[j];
        let (weights, prob, reference) = &setups[k];
        let graph = sample(weights, seed);
        let on_graph = Problem::new(
            Operator::Graph(Arc::new(graph)),
            sp.p,
            prob.initial().clone(),
            prob.source().clone(),
            sp.horizon,
        )?;
        let traj = scheme.run(&on_graph)?;
        traj_error_c0l2(&traj, reference, n_list[k], opts.time_samples)
    }))?;
    let per_n: Vec<Vec<f64>> = errors.chunks(seeds.len()).map(<[f64]>::to_vec).collect();
    let means: Vec<f64> = per_n
        .iter()
        .map(|e| e.iter().sum::<f64>() / e.len() as f64)
        .collect();
    let params: Vec<f64> = n_list.iter().map(|&n| schedule.rho(n) * n as f64).collect();
    let mut result = RateStudyResult::new(StudyKind::Graph, params, n_list.to_vec(), means, 0.0);
    result.max_errors = per_n
        .iter()
        .map(|e| e.iter().copied().fold(0.0, f64::max))
        .collect();
    result.samples = per_n;
    Ok(result)
}

/// `|w'(t) + KΨ(w(t))|` by central differences with step `dt`.
pub fn two_node_ode_residual(p: f64, k: f64, w0: f64, t: f64, dt: f64) -> f64 {
    let w = |s| two_node_closed_form(p, k, w0, s);
    let derivative = (w(t + dt) - w(t - dt)) / (2.0 * dt);
    (derivative + k * psi(p, w(t))).abs()
}
