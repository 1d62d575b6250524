//! Partitions of `[0, 1]`, piecewise-constant grid functions, cell-averaged
//! kernels and the projector/injector pair between them.
//!
//! Cells are left-open and right-closed, `(x_{i-1}, x_i]`, with the point
//! `x = 0` assigned to the first cell.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::GaussRule;

/// Default cap on the number of cells for dense kernel storage.
pub const DEFAULT_MAX_CELLS: usize = 4096;
/// Default Gauss-Legendre points per cell.
pub const DEFAULT_QUADRATURE_ORDER: usize = 8;

#[derive(Debug, Clone)]
pub struct Mesh {
    boundaries: Vec<f64>,
    sizes: Vec<f64>,
    max_size: f64,
    uniform: bool,
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.boundaries == other.boundaries
    }
}

impl Mesh {
    /// Equispaced partition `x_i = i / n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("a mesh needs at least one cell"));
        }
        let nf = n as f64;
        let boundaries = (0..=n).map(|i| i as f64 / nf).collect();
        let h = 1.0 / nf;
        Ok(Self {
            boundaries,
            sizes: vec![h; n],
            max_size: h,
            uniform: true,
        })
    }

    pub fn from_boundaries(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidMesh("a mesh needs at least one cell"));
        }
        if boundaries[0] != 0.0 || *boundaries.last().unwrap() != 1.0 {
            return Err(Error::InvalidMesh(
                "boundaries must start at 0 and end at 1",
            ));
        }
        let sizes: Vec<f64> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        if sizes.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidMesh("boundaries must be strictly increasing"));
        }
        let max_size = sizes.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            boundaries,
            sizes,
            max_size,
            uniform: false,
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    /// `δ_n = max_i h_i`.
    pub fn max_size(&self) -> f64 {
        self.max_size
    }

    /// True for meshes built by [`Mesh::uniform`].
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.boundaries[i], self.boundaries[i + 1])
    }

    /// Index of the cell `(x_{i-1}, x_i]` containing `x`; `x <= 0` maps to the
    /// first cell and `x >= 1` to the last.
    pub fn locate(&self, x: f64) -> usize {
        let idx = self.boundaries.partition_point(|&b| b < x);
        idx.clamp(1, self.n()) - 1
    }

    /// True when every boundary of `coarse` is also a boundary of `self`.
    pub fn refines(&self, coarse: &Mesh) -> bool {
        let mut k = 0;
        for &b in &coarse.boundaries {
            while k < self.boundaries.len() && self.boundaries[k] < b {
                k += 1;
            }
            if k == self.boundaries.len() || self.boundaries[k] != b {
                return false;
            }
        }
        true
    }
}

/// For each cell of `target`, the source cells it overlaps together with the
/// overlapped fraction of the target cell. A target cell that lies inside a
/// single source cell gets the exact weight `1.0`.
pub(crate) fn overlap_weights(target: &Mesh, source: &Mesh) -> Vec<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(target.n());
    let mut start = 0;
    for i in 0..target.n() {
        let (a, b) = target.cell(i);
        while start + 1 < source.n() && source.boundaries[start + 1] <= a {
            start += 1;
        }
        let mut row = Vec::new();
        let mut j = start;
        while j < source.n() {
            let (c, d) = source.cell(j);
            if c >= b {
                break;
            }
            if c <= a && b <= d {
                row.clear();
                row.push((j, 1.0));
                break;
            }
            let len = b.min(d) - a.max(c);
            if len > 0.0 {
                row.push((j, len / (b - a)));
            }
            j += 1;
        }
        out.push(row);
    }
    out
}

pub(crate) fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Values attached to the cells of a mesh; the injected function is
/// piecewise constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n() {
            return Err(Error::LengthMismatch {
                expected: mesh.n(),
                got: values.len(),
            });
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { cell });
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh>, c: f64) -> Self {
        let n = mesh.n();
        Self {
            mesh,
            values: vec![c; n],
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(I_n u)(x)`.
    pub fn inject_eval(&self, x: f64) -> f64 {
        self.values[self.mesh.locate(x)]
    }

    /// `L^q` norm of the injected function; `q = f64::INFINITY` gives the max.
    pub fn norm(&self, q: f64) -> f64 {
        weighted_norm(self.mesh.sizes(), &self.values, q)
    }

    /// `∫ I_n u`.
    pub fn mass(&self) -> f64 {
        self.mesh
            .sizes()
            .iter()
            .zip(&self.values)
            .map(|(h, v)| h * v)
            .sum()
    }

    /// `P_m I_n u` onto another mesh, computed from exact cell overlaps.
    pub fn project_onto(&self, target: &Arc<Mesh>) -> GridFunction {
        if Arc::ptr_eq(&self.mesh, target) || *self.mesh == **target {
            return GridFunction {
                mesh: target.clone(),
                values: self.values.clone(),
            };
        }
        let weights = overlap_weights(target, &self.mesh);
        let values = weights
            .iter()
            .map(|row| match row.as_slice() {
                [(j, w)] if *w == 1.0 => self.values[*j],
                _ => row.iter().map(|&(j, w)| w * self.values[j]).sum(),
            })
            .collect();
        GridFunction {
            mesh: target.clone(),
            values,
        }
    }

    pub(crate) fn from_parts_unchecked(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        debug_assert_eq!(mesh.n(), values.len());
        Self { mesh, values }
    }
}

/// `(Σ h_i |u_i|^q)^{1/q}`, or `max |u_i|` for `q = ∞`.
pub fn weighted_norm(sizes: &[f64], values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if q == 1.0 {
        return sizes.iter().zip(values).map(|(h, v)| h * v.abs()).sum();
    }
    if q == 2.0 {
        let s: f64 = sizes.iter().zip(values).map(|(h, v)| h * v * v).sum();
        return s.sqrt();
    }
    let s: f64 = sizes
        .iter()
        .zip(values)
        .map(|(h, v)| h * v.abs().powf(q))
        .sum();
    s.powf(1.0 / q)
}

/// `P_n f`: cell averages by `order`-point Gauss-Legendre quadrature.
pub fn project_function(
    f: impl Fn(f64) -> f64,
    mesh: &Arc<Mesh>,
    order: usize,
) -> Result<GridFunction> {
    let rule = GaussRule::new(order);
    let mut values = Vec::with_capacity(mesh.n());
    for i in 0..mesh.n() {
        let (a, b) = mesh.cell(i);
        let v = rule.average(a, b, &f);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { cell: i });
        }
        values.push(v);
    }
    Ok(GridFunction {
        mesh: mesh.clone(),
        values,
    })
}

/// Symmetric, nonnegative `n × n` matrix of cell-averaged kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    mesh: Arc<Mesh>,
    entries: Vec<f64>,
}

impl DiscreteKernel {
    /// Validates shape, finiteness, nonnegativity and exact symmetry.
    pub fn from_entries(mesh: Arc<Mesh>, entries: Vec<f64>) -> Result<Self> {
        let n = mesh.n();
        if entries.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NonFiniteValue { cell: i });
                }
                if j > i && v != entries[j * n + i] {
                    return Err(Error::AsymmetricKernel { i, j });
                }
            }
        }
        Ok(Self { mesh, entries })
    }

    pub(crate) fn from_parts_unchecked(mesh: Arc<Mesh>, entries: Vec<f64>) -> Self {
        Self { mesh, entries }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.mesh.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `L^{∞,q}` norm of the injected kernel: `max_i (Σ_j h_j K_ij^q)^{1/q}`.
    pub fn norm_linf_q(&self, q: f64) -> f64 {
        (0..self.n())
            .map(|i| weighted_norm(self.mesh.sizes(), self.row(i), q))
            .fold(0.0, f64::max)
    }

    /// `Σ_ij h_i h_j K_ij`, the `L¹([0,1]²)` norm of the injected kernel.
    pub fn norm_l1(&self) -> f64 {
        let h = self.mesh.sizes();
        (0..self.n())
            .map(|i| h[i] * h.iter().zip(self.row(i)).map(|(hj, k)| hj * k).sum::<f64>())
            .sum()
    }
}

/// Options for [`project_kernel_with`].
#[derive(Debug, Clone, Copy)]
pub struct KernelProjection {
    pub max_cells: usize,
    pub order: usize,
}

impl Default for KernelProjection {
    fn default() -> Self {
        Self {
            max_cells: DEFAULT_MAX_CELLS,
            order: DEFAULT_QUADRATURE_ORDER,
        }
    }
}

/// `P_n K` with default options.
pub fn project_kernel(kernel: &KernelSpec, mesh: &Arc<Mesh>) -> Result<DiscreteKernel> {
    project_kernel_with(kernel, mesh, KernelProjection::default())
}

/// `K_ij = (h_i h_j)^{-1} ∫∫_{cell i × cell j} K`.
///
/// Power-law kernels use exact double antiderivatives, so diagonal cells are
/// finite. Separable kernels average the factor per cell; tabulated kernels
/// are integrated exactly through cell overlaps. Only the upper triangle is
/// computed and mirrored.
pub fn project_kernel_with(
    kernel: &KernelSpec,
    mesh: &Arc<Mesh>,
    opts: KernelProjection,
) -> Result<DiscreteKernel> {
    let n = mesh.n();
    if n > opts.max_cells {
        return Err(Error::MeshTooLarge {
            n,
            cap: opts.max_cells,
        });
    }
    let mut entries = vec![0.0; n * n];
    match kernel {
        KernelSpec::Constant { c } => entries.fill(*c),
        KernelSpec::ConvolutionPowerLaw { beta } => {
            let h = mesh.sizes();
            for i in 0..n {
                let ci = mesh.cell(i);
                for j in i..n {
                    let v = power_law_cell_integral(*beta, ci, mesh.cell(j)) / (h[i] * h[j]);
                    entries[i * n + j] = v;
                    entries[j * n + i] = v;
                }
            }
        }
        KernelSpec::SeparableSmooth { .. } => {
            let rule = GaussRule::new(opts.order);
            let avg: Vec<f64> = (0..n)
                .map(|i| {
                    let (a, b) = mesh.cell(i);
                    rule.average(a, b, |x| kernel.factor(x))
                })
                .collect();
            for i in 0..n {
                for j in i..n {
                    let v = avg[i] * avg[j];
                    entries[i * n + j] = v;
                    entries[j * n + i] = v;
                }
            }
        }
        KernelSpec::Tabulated(src) => {
            if **src.mesh() == **mesh {
                entries.copy_from_slice(src.entries());
            } else {
                let w = overlap_weights(mesh, src.mesh());
                for i in 0..n {
                    for j in i..n {
                        let v = match (w[i].as_slice(), w[j].as_slice()) {
                            ([(a, wa)], [(b, wb)]) if *wa == 1.0 && *wb == 1.0 => src.get(*a, *b),
                            _ => w[i]
                                .iter()
                                .flat_map(|&(a, wa)| {
                                    w[j].iter().map(move |&(b, wb)| wa * wb * src.get(a, b))
                                })
                                .sum(),
                        };
                        entries[i * n + j] = v;
                        entries[j * n + i] = v;
                    }
                }
            }
        }
    }
    if !kernel.is_power_law() {
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos / n, pos % n);
            let (a, b) = mesh.cell(i);
            let (c, d) = mesh.cell(j);
            return Err(Error::UnsupportedSingularity {
                x: 0.5 * (a + b),
                y: 0.5 * (c + d),
            });
        }
    }
    Ok(DiscreteKernel {
        mesh: mesh.clone(),
        entries,
    })
}

/// `∫_a^b ∫_c^d c_β |x - y|^{-β} dy dx` for two cells of an ordered mesh
/// (identical, or disjoint interiors), with `c_β = (1-β)(2-β)/2`.
///
/// With `Φ(z) = |z|^{2-β}` the integral is `½ [Φ(b-c) + Φ(a-d) - Φ(a-c) -
/// Φ(b-d)]`. For separated cells this is evaluated as a difference of two
/// forward differences computed with `expm1`/`ln_1p` to limit cancellation.
pub(crate) fn power_law_cell_integral(beta: f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    let gamma = 2.0 - beta;
    let (mut a, mut b) = x;
    let (mut c, mut d) = y;
    if c < a {
        core::mem::swap(&mut a, &mut c);
        core::mem::swap(&mut b, &mut d);
    }
    if a == c && b == d {
        return (b - a).powf(gamma);
    }
    if c >= b {
        let gap = c - b;
        let h1 = b - a;
        let h2 = d - c;
        return 0.5
            * (forward_difference(gamma, gap + h2, h1) - forward_difference(gamma, gap, h1));
    }
    let phi = |z: f64| z.abs().powf(gamma);
    0.5 * (phi(b - c) + phi(a - d) - phi(a - c) - phi(b - d))
}

/// `(z + h)^γ - z^γ` for `z, h >= 0`.
fn forward_difference(gamma: f64, z: f64, h: f64) -> f64 {
    if z == 0.0 {
        h.powf(gamma)
    } else {
        z.powf(gamma) * (gamma * (h / z).ln_1p()).exp_m1()
    }
}

/// Grid estimate of the `L^q` modulus of smoothness
/// `sup_{0<z<=h} (∫_0^{1-z} |f(x+z) - f(x)|^q dx)^{1/q}`.
///
/// Uses `samples` shifts and composite 4-point Gauss quadrature on
/// `max(1024, 4 * samples)` panels; `q = ∞` takes the max over quadrature nodes.
pub fn modulus_of_smoothness(f: impl Fn(f64) -> f64, h: f64, q: f64, samples: usize) -> f64 {
    let samples = samples.max(1);
    let rule = GaussRule::new(4);
    let panels = (4 * samples).max(1024);
    let mut best: f64 = 0.0;
    for k in 1..=samples {
        let z = (h * k as f64 / samples as f64).min(1.0);
        let len = 1.0 - z;
        if len <= 0.0 {
            continue;
        }
        let dx = len / panels as f64;
        let mut acc: f64 = 0.0;
        for m in 0..panels {
            let a = m as f64 * dx;
            for (x, w) in rule.mapped(a, a + dx) {
                let d = (f(x + z) - f(x)).abs();
                if q.is_infinite() {
                    acc = acc.max(d);
                } else {
                    acc += w * d.powf(q);
                }
            }
        }
        let value = if q.is_infinite() {
            acc
        } else {
            acc.powf(1.0 / q)
        };
        best = best.max(value);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform(n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::uniform(n).unwrap())
    }

    #[test]
    fn uniform_mesh_layout() {
        let m = Mesh::uniform(1).unwrap();
        assert_eq!(m.boundaries(), &[0.0, 1.0]);
        assert_eq!(m.max_size(), 1.0);
        let m = Mesh::uniform(4).unwrap();
        assert_eq!(m.boundaries(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Mesh::uniform(3).unwrap().max_size(), 1.0 / 3.0);
        assert!(Mesh::uniform(0).is_err());
    }

    #[test]
    fn rejects_bad_boundaries() {
        assert!(Mesh::from_boundaries(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Mesh::from_boundaries(vec![0.1, 1.0]).is_err());
        let m = Mesh::from_boundaries(vec![0.0, 0.2, 0.7, 1.0]).unwrap();
        assert_relative_eq!(m.max_size(), 0.5);
        assert!(!m.is_uniform());
    }

    #[test]
    fn locate_uses_left_open_cells() {
        let m = Mesh::uniform(2).unwrap();
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(0.5), 0);
        assert_eq!(m.locate(0.51), 1);
        assert_eq!(m.locate(1.0), 1);
    }

    #[test]
    fn inject_eval_examples() {
        let u = GridFunction::new(uniform(2), vec![1.0, 5.0]).unwrap();
        assert_eq!(u.inject_eval(0.5), 1.0);
        assert_eq!(u.inject_eval(0.51), 5.0);
        let c = GridFunction::constant(uniform(7), 2.5);
        for x in [0.0, 0.13, 0.5, 1.0] {
            assert_eq!(c.inject_eval(x), 2.5);
        }
    }

    #[test]
    fn projection_examples() {
        let m2 = uniform(2);
        let u = project_function(|x| x, &m2, 8).unwrap();
        assert_relative_eq!(u.values()[0], 0.25, epsilon = 1e-15);
        assert_relative_eq!(u.values()[1], 0.75, epsilon = 1e-15);
        let u = project_function(|x| x * x, &uniform(1), 8).unwrap();
        assert_relative_eq!(u.values()[0], 1.0 / 3.0, epsilon = 1e-15);
        let c = project_function(|_| 0.7, &uniform(9), 8).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.7));
        assert!(matches!(
            project_function(|_| f64::NAN, &m2, 4),
            Err(Error::NonFiniteValue { cell: 0 })
        ));
    }

    #[test]
    fn norm_examples() {
        let u = GridFunction::new(uniform(2), vec![0.0, 2.0]).unwrap();
        assert_relative_eq!(u.norm(2.0), 2f64.sqrt(), epsilon = 1e-15);
        let u = GridFunction::new(uniform(2), vec![-3.0, 1.0]).unwrap();
        assert_eq!(u.norm(f64::INFINITY), 3.0);
        let c = GridFunction::constant(uniform(5), -1.5);
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_relative_eq!(c.norm(q), 1.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn projection_is_idempotent_bitwise() {
        let m = Arc::new(Mesh::from_boundaries(vec![0.0, 0.1, 0.35, 0.9, 1.0]).unwrap());
        let u = GridFunction::new(m.clone(), vec![0.1 + 0.2, -1.0 / 3.0, 7.77, 1e-3]).unwrap();
        let again = project_function(|x| u.inject_eval(x), &m, 8).unwrap();
        assert_eq!(again.values(), u.values());
        assert_eq!(u.project_onto(&m).values(), u.values());
    }

    #[test]
    fn nested_projection_roundtrip() {
        let coarse = uniform(4);
        let fine = uniform(16);
        let u = GridFunction::new(coarse.clone(), vec![0.3, -1.1, 2.0, 0.1 + 0.2]).unwrap();
        let up = u.project_onto(&fine);
        assert_eq!(up.inject_eval(0.2), 0.3);
        assert_eq!(up.inject_eval(0.99), 0.1 + 0.2);
        let down = up.project_onto(&coarse);
        for (a, b) in down.values().iter().zip(u.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(!uniform(6).refines(&uniform(4)));
    }

    #[test]
    fn kernel_projection_examples() {
        let m = uniform(5);
        let kd = project_kernel(&KernelSpec::constant(2.0).unwrap(), &m).unwrap();
        assert!(kd.entries().iter().all(|&v| v == 2.0));
        assert_eq!(kd.norm_linf_q(1.0), 2.0);

        let sep = KernelSpec::separable(vec![1.0, 1.0]).unwrap();
        let kd = project_kernel(&sep, &uniform(1)).unwrap();
        assert_relative_eq!(kd.get(0, 0), 2.25, epsilon = 1e-14);
    }

    #[test]
    fn power_law_cell_averages_preserve_mass() {
        for &beta in &[0.25, 0.5, 0.75] {
            for &n in &[1usize, 3, 64, 257] {
                let kd =
                    project_kernel(&KernelSpec::power_law(beta).unwrap(), &uniform(n)).unwrap();
                assert!((kd.norm_l1() - 1.0).abs() < 1e-10, "beta={beta} n={n}");
                assert!(kd.entries().iter().all(|v| v.is_finite() && *v > 0.0));
            }
        }
        let m = Arc::new(Mesh::from_boundaries(vec![0.0, 0.05, 0.3, 0.31, 1.0]).unwrap());
        let kd = project_kernel(&KernelSpec::power_law(0.6).unwrap(), &m).unwrap();
        assert!((kd.norm_l1() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_cell_integral_matches_quadrature_off_diagonal() {
        // smooth integrand away from the diagonal: tensor Gauss is an independent check
        let rule = GaussRule::new(12);
        let beta = 0.5;
        let c = 0.5 * (1.0 - beta) * (2.0 - beta);
        for &(x, y) in &[((0.0, 0.1), (0.3, 0.35)), ((0.5, 0.52), (0.9, 1.0))] {
            let q = rule.integrate(x.0, x.1, |s| {
                rule.integrate(y.0, y.1, |t| c * (s - t).abs().powf(-beta))
            });
            let exact = power_law_cell_integral(beta, x, y);
            assert_relative_eq!(exact, q, max_relative = 1e-10);
            assert_eq!(exact, power_law_cell_integral(beta, y, x));
        }
    }

    #[test]
    fn matrix_norm_examples() {
        let m = uniform(2);
        let kd = DiscreteKernel::from_entries(m, vec![0.0, 2.0, 2.0, 0.0]).unwrap();
        assert_relative_eq!(kd.norm_linf_q(2.0), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(kd.norm_linf_q(f64::INFINITY), 2.0);
        assert!(DiscreteKernel::from_entries(uniform(2), vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DiscreteKernel::from_entries(uniform(2), vec![0.0, -1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn dense_cap_is_enforced() {
        let opts = KernelProjection {
            max_cells: 8,
            ..Default::default()
        };
        let r = project_kernel_with(&KernelSpec::constant(1.0).unwrap(), &uniform(9), opts);
        assert_eq!(r.unwrap_err(), Error::MeshTooLarge { n: 9, cap: 8 });
    }

    #[test]
    fn tabulated_kernel_reprojection() {
        let coarse = uniform(2);
        let kd = DiscreteKernel::from_entries(coarse.clone(), vec![1.0, 3.0, 3.0, 2.0]).unwrap();
        let spec = KernelSpec::tabulated(kd.clone());
        let same = project_kernel(&spec, &coarse).unwrap();
        assert_eq!(same, kd);
        let fine = project_kernel(&spec, &uniform(4)).unwrap();
        assert_eq!(fine.get(0, 3), 3.0);
        assert_eq!(fine.get(3, 3), 2.0);
        let back = project_kernel(&KernelSpec::tabulated(fine), &coarse).unwrap();
        for (a, b) in back.entries().iter().zip(kd.entries()) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(modulus_of_smoothness(|_| 3.0, 0.1, 2.0, 32), 0.0);
        for &h in &[0.01, 0.05, 0.1] {
            let w = modulus_of_smoothness(|x| x, h, 2.0, 64);
            assert!((w - h).abs() <= h.powf(1.5), "h={h} w={w}");
            let step = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
            let w = modulus_of_smoothness(step, h, 1.0, 64);
            // the jump straddles at most two panels
            assert!((w - h).abs() <= 2.0 / 1024.0, "h={h} w={w}");
        }
    }
}
