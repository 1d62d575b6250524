//! Sparse `K`-random graphs `G(n, K, ρ)`.
//!
//! Each unordered pair `{i, j}`, `i < j`, is joined independently with
//! probability `ρ K̂_ij`, where `K̂_ij = min(K_ij, ρ^{-1})`. A present edge
//! carries the weight `ρ^{-1}`, so the rescaled adjacency approximates `K`.
//! Self-loops are never sampled: they contribute `Ψ(0) = 0` to the evolution.
//!
//! Randomness is counter-based. The uniform variate for pair `(i, j)` is word
//! `j` of ChaCha8 stream `i` under the user seed, so a row can be sampled
//! without touching any other row and the edge set does not depend on how rows
//! are scheduled.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::mesh::{DiscreteKernel, Mesh};
use crate::plaplacian::Coupling;

/// `K̂_ij = min(K_ij, ρ^{-1})` on the mesh of the source kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedWeights {
    mesh: Arc<Mesh>,
    rho: f64,
    entries: Vec<f64>,
}

impl TruncatedWeights {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.mesh.n()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    /// The truncated weights as a discrete kernel on the same mesh.
    pub fn to_kernel(&self) -> DiscreteKernel {
        DiscreteKernel::from_parts_unchecked(self.mesh.clone(), self.entries.clone())
    }
}

/// Entrywise `min(K_ij, ρ^{-1})`.
pub fn truncate(kd: &DiscreteKernel, rho: f64) -> Result<TruncatedWeights> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(
            "graph density rho must be positive",
        ));
    }
    let cap = 1.0 / rho;
    Ok(TruncatedWeights {
        mesh: kd.mesh().clone(),
        rho,
        entries: kd.entries().iter().map(|&k| k.min(cap)).collect(),
    })
}

/// `‖I_n K - I_n K̂‖_{L¹} = Σ_ij h_i h_j (K_ij - ρ^{-1})₊`.
pub fn truncation_gap(kd: &DiscreteKernel, w: &TruncatedWeights) -> f64 {
    let h = kd.mesh().sizes();
    let n = kd.n();
    let mut total = 0.0;
    for i in 0..n {
        let s: f64 = h
            .iter()
            .enumerate()
            .map(|(j, hj)| hj * (kd.get(i, j) - w.get(i, j)))
            .sum();
        total += h[i] * s;
    }
    total
}

/// A sampled simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    rho: f64,
    seed: u64,
    adjacency: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub edge_count: usize,
    pub degrees: Vec<usize>,
    pub mean_degree: f64,
    pub max_degree: usize,
}

impl GraphSample {
    /// Builds a graph from an explicit edge list (0-based, any order).
    pub fn from_edges(n: usize, rho: f64, seed: u64, edges: &[(usize, usize)]) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(
                "graph density rho must be positive",
            ));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidParameter(
                    "edge endpoints must be distinct vertices",
                ));
            }
            adjacency[i].push(j as u32);
            adjacency[j].push(i as u32);
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self {
            n,
            rho,
            seed,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn stats(&self) -> GraphStats {
        let degrees: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        let total: usize = degrees.iter().sum();
        GraphStats {
            edge_count: total / 2,
            mean_degree: if self.n == 0 {
                0.0
            } else {
                total as f64 / self.n as f64
            },
            max_degree: degrees.iter().copied().max().unwrap_or(0),
            degrees,
        }
    }

    /// `‖I_n Λ‖_{L^{∞,1}} = max_i deg(i) / (ρ n)`.
    pub fn linf1_norm(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let max_deg = self.adjacency.iter().map(Vec::len).max().unwrap_or(0);
        max_deg as f64 / (self.rho * self.n as f64)
    }

    /// Weights `w_ij = h_j ρ^{-1}` on the edges, for a uniform mesh of `n` cells.
    pub fn coupling<'a>(&'a self, mesh: &'a Mesh) -> Result<GraphCoupling<'a>> {
        if mesh.n() != self.n || !mesh.is_uniform() {
            return Err(Error::MeshMismatch);
        }
        Ok(GraphCoupling {
            graph: self,
            sizes: mesh.sizes(),
            inv_rho: 1.0 / self.rho,
        })
    }
}

/// Graph operator weights: row `i` couples to its neighbors with `h_j / ρ`.
#[derive(Debug, Clone, Copy)]
pub struct GraphCoupling<'a> {
    graph: &'a GraphSample,
    sizes: &'a [f64],
    inv_rho: f64,
}

impl Coupling for GraphCoupling<'_> {
    fn n(&self) -> usize {
        self.graph.n
    }

    fn sizes(&self) -> &[f64] {
        self.sizes
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, i: usize, mut visit: F) {
        for &j in &self.graph.adjacency[i] {
            let j = j as usize;
            visit(j, self.sizes[j] * self.inv_rho);
        }
    }
}

fn unit_interval(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Upper-triangle neighbors `j > i` of each row in `rows`.
pub fn sample_rows(w: &TruncatedWeights, seed: u64, rows: Range<usize>) -> Vec<Vec<u32>> {
    let n = w.n();
    let base = ChaCha8Rng::seed_from_u64(seed);
    rows.map(|i| {
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        // two 32-bit words per draw; the draw for pair (i, j) is word pair j
        rng.set_word_pos(2 * (i as u128 + 1));
        let mut row = Vec::new();
        for j in (i + 1)..n {
            let u = unit_interval(rng.next_u64());
            if u < w.rho * w.get(i, j) {
                row.push(j as u32);
            }
        }
        row
    })
    .collect()
}

/// Samples `G(n, K, ρ)` from truncated weights on the calling thread.
pub fn sample(w: &TruncatedWeights, seed: u64) -> GraphSample {
    sample_with(w, seed, &Sequential)
}

/// Samples with rows split into blocks scheduled by `exec`. The result is
/// identical for every executor.
pub fn sample_with<E: Executor>(w: &TruncatedWeights, seed: u64, exec: &E) -> GraphSample {
    let n = w.n();
    const BLOCK: usize = 64;
    let blocks = n.div_ceil(BLOCK);
    let upper: Vec<Vec<Vec<u32>>> = exec.map(blocks, |b| {
        sample_rows(w, seed, b * BLOCK..((b + 1) * BLOCK).min(n))
    });
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, row) in upper.into_iter().flatten().enumerate() {
        for &j in &row {
            adjacency[j as usize].push(i as u32);
        }
        adjacency[i].extend_from_slice(&row);
    }
    GraphSample {
        n,
        rho: w.rho,
        seed,
        adjacency,
    }
}
