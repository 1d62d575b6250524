//! Randomized property suites behind `verify-properties`.

use std::sync::Arc;

use plap_core::evolve::{
    backward_euler, forward_euler, subgradient_p1, uniform_partition, BackwardOptions,
    ForwardOptions, Operator, Problem, SourceTerm, StepDecay, Storage, SubgradientOptions,
    Trajectory,
};
use plap_core::graph::{sample_with, truncate};
use plap_core::mesh::{project_kernel, weighted_norm};
use plap_core::plaplacian::{check_continuity, check_monotonicity, resolvent, ResolventOptions};
use plap_core::{DiscreteKernel, Executor, GridFunction, KernelSpec, Mesh, PExponent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest violation seen, in the suite's own units; nonpositive when
    /// every case holds.
    pub worst_violation: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            worst_violation: f64::NEG_INFINITY,
            detail: String::new(),
        }
    }

    /// Records `excess = observed - allowed`; positive means a failure.
    fn record(&mut self, excess: f64) {
        self.cases += 1;
        if !(excess <= 0.0) {
            self.failures += 1;
        }
        if excess > self.worst_violation || excess.is_nan() {
            self.worst_violation = excess;
        }
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

/// Case counts of every suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSizes {
    pub psi_triples: usize,
    pub projector_functions: usize,
    pub resolvent_pairs: usize,
    pub mass_runs: usize,
    pub graph_n: usize,
    pub graph_seeds: usize,
}

impl SuiteSizes {
    /// Sizes scaled from a single sample budget.
    pub fn from_budget(samples: usize) -> Self {
        let samples = samples.max(100);
        Self {
            psi_triples: samples,
            projector_functions: (samples / 100).max(1),
            resolvent_pairs: (samples / 500).max(1),
            mass_runs: (samples / 5000).max(1),
            graph_n: 512,
            graph_seeds: 20,
        }
    }
}

pub fn run_all<E: Executor>(sizes: &SuiteSizes, seed: u64, exec: &E) -> anyhow::Result<Vec<Check>> {
    Ok(vec![
        psi_inequalities(sizes.psi_triples, seed),
        projector_contraction(sizes.projector_functions, seed),
        resolvent_nonexpansive(sizes.resolvent_pairs, seed, exec)?,
        mass_conservation(sizes.mass_runs, seed)?,
        graph_calibration(sizes.graph_n, sizes.graph_seeds, seed, exec)?,
    ])
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sharp monotonicity and continuity of `Ψ` on random triples, with relative
/// slack `1e-9`.
pub fn psi_inequalities(triples: usize, seed: u64) -> Check {
    let mut check = Check::new("psi_inequalities");
    let mut rng = rng_for(seed, 1);
    for _ in 0..triples {
        let p = rng.random_range(1.1..=6.0);
        let x = rng.random_range(-10.0..=10.0);
        let y = rng.random_range(-10.0..=10.0);
        let (lhs, rhs) = check_monotonicity(p, p.max(2.0), x, y);
        check.record((rhs - lhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE) - 1e-9);
        let (lhs, rhs) = check_continuity(p, (p - 1.0).min(1.0), x, y);
        check.record((lhs - rhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE) - 1e-9);
    }
    check.detail = format!("{triples} triples, p in [1.1, 6], x, y in [-10, 10]");
    check
}

/// Cubic pieces `Σ c_k (x - start)^k` on a partition of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PiecewiseCubic {
    breaks: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn antiderivative(c: &[f64], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, &a)| acc * s + a / (k + 1) as f64)
        * s
}

impl PiecewiseCubic {
    pub fn random(rng: &mut impl Rng) -> Self {
        let pieces = rng.random_range(1..=6);
        let mut breaks: Vec<f64> = (0..pieces - 1)
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        breaks.push(0.0);
        breaks.push(1.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let scale = 10f64.powf(rng.random_range(-2.0..2.0));
        let coeffs = (0..breaks.len() - 1)
            .map(|_| {
                let degree = rng.random_range(0..=3);
                let mut c = [0.0; 4];
                for ck in c.iter_mut().take(degree + 1) {
                    *ck = scale * rng.random_range(-1.0..=1.0);
                }
                c
            })
            .collect();
        Self { breaks, coeffs }
    }

    fn pieces(&self, lo: f64, hi: f64) -> impl Iterator<Item = (&[f64; 4], f64, f64, f64)> + '_ {
        self.coeffs.iter().enumerate().filter_map(move |(k, c)| {
            let (a, b) = (self.breaks[k], self.breaks[k + 1]);
            let (l, r) = (a.max(lo), b.min(hi));
            (l < r).then_some((c, a, l, r))
        })
    }

    /// Exact `∫_lo^hi u`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.pieces(lo, hi)
            .map(|(c, a, l, r)| antiderivative(c, r - a) - antiderivative(c, l - a))
            .sum()
    }

    /// `‖u‖_q` on `[0, 1]` for `q ∈ {1, 2, ∞}`.
    pub fn norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self
                .pieces(0.0, 1.0)
                .map(|(c, a, l, r)| max_abs_cubic(c, l - a, r - a))
                .fold(0.0, f64::max);
        }
        if q == 2.0 {
            let s: f64 = self
                .pieces(0.0, 1.0)
                .map(|(c, a, l, r)| {
                    let mut sq = [0.0; 7];
                    for i in 0..4 {
                        for j in 0..4 {
                            sq[i + j] += c[i] * c[j];
                        }
                    }
                    antiderivative(&sq, r - a) - antiderivative(&sq, l - a)
                })
                .sum();
            return s.sqrt();
        }
        assert_eq!(q, 1.0, "unsupported exponent");
        self.pieces(0.0, 1.0)
            .map(|(c, a, l, r)| abs_integral_cubic(c, l - a, r - a))
            .sum()
    }

    /// Exact cell averages on `mesh`.
    pub fn project(&self, mesh: &Arc<Mesh>) -> GridFunction {
        let values = (0..mesh.n())
            .map(|i| {
                let (a, b) = mesh.cell(i);
                self.integral(a, b) / (b - a)
            })
            .collect();
        GridFunction::new(mesh.clone(), values).expect("one value per cell")
    }
}

fn max_abs_cubic(c: &[f64; 4], l: f64, r: f64) -> f64 {
    let mut best = poly_eval(c, l).abs().max(poly_eval(c, r).abs());
    // Critical points of c0 + c1 s + c2 s² + c3 s³.
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let mut crit = Vec::new();
    if qa != 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            crit.push((-qb + sq) / (2.0 * qa));
            crit.push((-qb - sq) / (2.0 * qa));
        }
    } else if qb != 0.0 {
        crit.push(-qc / qb);
    }
    for s in crit {
        if s > l && s < r {
            best = best.max(poly_eval(c, s).abs());
        }
    }
    best
}

fn abs_integral_cubic(c: &[f64; 4], l: f64, r: f64) -> f64 {
    let samples = 256;
    let mut cuts = vec![l];
    let (mut prev_s, mut prev) = (l, poly_eval(c, l));
    for k in 1..=samples {
        let s = l + (r - l) * k as f64 / samples as f64;
        let v = poly_eval(c, s);
        if prev * v < 0.0 {
            let (mut lo, mut hi) = (prev_s, s);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if poly_eval(c, mid) * prev > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        if v != 0.0 {
            (prev_s, prev) = (s, v);
        }
    }
    cuts.push(r);
    cuts.windows(2)
        .map(|w| (antiderivative(c, w[1]) - antiderivative(c, w[0])).abs())
        .sum()
}

/// `‖I_n P_n u‖_q ≤ ‖u‖_q + 1e-9` for random piecewise cubics.
pub fn projector_contraction(functions: usize, seed: u64) -> Check {
    let mut check = Check::new("projector_contraction");
    let mut rng = rng_for(seed, 2);
    let meshes: Vec<Arc<Mesh>> = [8, 64, 512]
        .iter()
        .map(|&n| Arc::new(Mesh::uniform(n).expect("positive size")))
        .collect();
    for _ in 0..functions {
        let u = PiecewiseCubic::random(&mut rng);
        for mesh in &meshes {
            let pu = u.project(mesh);
            for q in [1.0, 2.0, f64::INFINITY] {
                check.record(pu.norm(q) - u.norm(q) - 1e-9);
            }
        }
    }
    check.detail = format!("{functions} piecewise cubics, n in {{8, 64, 512}}, q in {{1, 2, inf}}");
    check
}

fn random_state(rng: &mut impl Rng, mesh: &Arc<Mesh>) -> GridFunction {
    let amp = 10f64.powf(rng.random_range(-1.0..1.0));
    let freq = rng.random_range(0.0..6.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let noise = rng.random_range(0.0..1.0);
    let values = (0..mesh.n())
        .map(|i| {
            let (a, b) = mesh.cell(i);
            let x = 0.5 * (a + b);
            amp * ((freq * std::f64::consts::PI * x + phase).sin()
                + noise * rng.random_range(-1.0..=1.0))
        })
        .collect();
    GridFunction::new(mesh.clone(), values).expect("one value per cell")
}

fn singular_kernel(n: usize) -> anyhow::Result<DiscreteKernel> {
    let mesh = Arc::new(Mesh::uniform(n)?);
    Ok(project_kernel(&KernelSpec::power_law(0.5)?, &mesh)?)
}

/// `‖J(b₁) - J(b₂)‖_q ≤ ‖b₁ - b₂‖_q + 10 tol` on `n = 64` cells, for every
/// combination of `p ∈ {1.5, 2, 3}` and `λ ∈ {0.01, 0.1, 1}`.
pub fn resolvent_nonexpansive<E: Executor>(
    pairs: usize,
    seed: u64,
    exec: &E,
) -> anyhow::Result<Check> {
    let kd = singular_kernel(64)?;
    let opts = ResolventOptions::default();
    let mut rng = rng_for(seed, 3);
    let mut jobs = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        for lambda in [0.01, 0.1, 1.0] {
            for _ in 0..pairs {
                let b1 = random_state(&mut rng, kd.mesh());
                let delta = 10f64.powf(rng.random_range(-6.0..0.0));
                let pert = random_state(&mut rng, kd.mesh());
                let b2: Vec<f64> = b1
                    .values()
                    .iter()
                    .zip(pert.values())
                    .map(|(a, d)| a + delta * d)
                    .collect();
                let b2 = GridFunction::new(kd.mesh().clone(), b2)?;
                jobs.push((p, lambda, b1, b2));
            }
        }
    }
    let results = exec.map(jobs.len(), |k| -> anyhow::Result<Vec<f64>> {
        let (p, lambda, b1, b2) = &jobs[k];
        let p = PExponent::new(*p)?;
        let (u1, _) = resolvent(&kd, p, *lambda, b1, opts)?;
        let (u2, _) = resolvent(&kd, p, *lambda, b2, opts)?;
        let tol = opts
            .tolerance_for(b1.norm(2.0))
            .max(opts.tolerance_for(b2.norm(2.0)));
        let sizes = kd.mesh().sizes();
        let du: Vec<f64> = u1
            .values()
            .iter()
            .zip(u2.values())
            .map(|(a, b)| a - b)
            .collect();
        let db: Vec<f64> = b1
            .values()
            .iter()
            .zip(b2.values())
            .map(|(a, b)| a - b)
            .collect();
        Ok([1.0, 2.0, f64::INFINITY]
            .iter()
            .map(|&q| weighted_norm(sizes, &du, q) - weighted_norm(sizes, &db, q) - 10.0 * tol)
            .collect())
    });
    let mut check = Check::new("resolvent_nonexpansive");
    for r in results {
        for excess in r? {
            check.record(excess);
        }
    }
    check.detail = format!(
        "{pairs} pairs per (p, lambda), p in {{1.5, 2, 3}}, lambda in {{0.01, 0.1, 1}}, n = 64"
    );
    Ok(check)
}

fn max_mass_drift(traj: &Trajectory) -> f64 {
    let sizes = traj.mesh().sizes();
    let masses: Vec<f64> = traj
        .states()
        .iter()
        .map(|s| sizes.iter().zip(s).map(|(h, v)| h * v).sum())
        .collect();
    masses
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Per-step mass drift with zero source: `1e-12 ‖g‖₁` for the explicit
/// schemes, `10 tol` for backward Euler.
pub fn mass_conservation(runs: usize, seed: u64) -> anyhow::Result<Check> {
    let kd = Arc::new(singular_kernel(64)?);
    let mut rng = rng_for(seed, 4);
    let mut check = Check::new("mass_conservation");
    let backward = BackwardOptions::default();
    for _ in 0..runs {
        for p in [1.25, 1.5, 2.0] {
            let g = random_state(&mut rng, kd.mesh());
            let allowed = 1e-12 * g.norm(1.0);
            let prob = Problem::new(
                Operator::Kernelized(kd.clone()),
                PExponent::new(p)?,
                g,
                SourceTerm::Zero,
                0.25,
            )?;
            let traj = forward_euler(&prob, &ForwardOptions::new(0.01))?;
            check.record(max_mass_drift(&traj) - allowed);
        }
        let g = random_state(&mut rng, kd.mesh());
        let allowed = 1e-12 * g.norm(1.0);
        let prob = Problem::new(
            Operator::Kernelized(kd.clone()),
            PExponent::new(1.0)?,
            g,
            SourceTerm::Zero,
            0.02,
        )?;
        let opts = SubgradientOptions {
            alpha0: 0.002,
            decay: StepDecay::Power(0.6),
            max_steps: 10_000_000,
            storage: Storage::Full,
        };
        let traj = subgradient_p1(&prob, &opts)?;
        check.record(max_mass_drift(&traj) - allowed);
        for p in [1.5, 2.0, 3.0] {
            let g = random_state(&mut rng, kd.mesh());
            let prob = Problem::new(
                Operator::Kernelized(kd.clone()),
                PExponent::new(p)?,
                g,
                SourceTerm::Zero,
                0.5,
            )?;
            let traj = backward_euler(&prob, &uniform_partition(0.5, 20), &backward)?;
            let tol = traj
                .states()
                .iter()
                .map(|s| {
                    backward
                        .solve
                        .tolerance_for(weighted_norm(kd.mesh().sizes(), s, 2.0))
                })
                .fold(0.0, f64::max);
            check.record(max_mass_drift(&traj) - 10.0 * tol);
        }
    }
    check.detail = format!("{runs} rounds of forward p in {{1.25, 1.5, 2}}, subgradient p = 1, backward p in {{1.5, 2, 3}}");
    Ok(check)
}

/// Mean normalized degree of sampled graphs against its exact expectation,
/// within four standard errors.
pub fn graph_calibration<E: Executor>(
    n: usize,
    seeds: usize,
    seed: u64,
    exec: &E,
) -> anyhow::Result<Check> {
    let mesh = Arc::new(Mesh::uniform(n)?);
    let kd = project_kernel(&KernelSpec::power_law(0.75)?, &mesh)?;
    let rho = (n as f64).powf(-0.25);
    let w = truncate(&kd, rho)?;
    let mut mean_edges = 0.0;
    let mut var_edges = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let q = rho * w.get(i, j);
            mean_edges += q;
            var_edges += q * (1.0 - q);
        }
    }
    let scale = 2.0 / (rho * (n * n) as f64);
    let expected = mean_edges * scale;
    let se = var_edges.sqrt() * scale / (seeds as f64).sqrt();
    let observed = (0..seeds as u64)
        .map(|k| {
            sample_with(&w, seed.wrapping_add(k), exec)
                .stats()
                .mean_degree
                / (rho * n as f64)
        })
        .sum::<f64>()
        / seeds as f64;
    let mut check = Check::new("graph_calibration");
    check.record((observed - expected).abs() - 4.0 * se);
    check.detail = format!(
        "n = {n}, rho = {rho}, {seeds} seeds: normalized mean degree {observed} vs expected {expected} (se {se})"
    );
    Ok(check)
}
