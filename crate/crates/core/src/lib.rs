//! Nonlocal p-Laplacian evolution with homogeneous Neumann conditions on `[0, 1]`.
//!
//! The crate discretizes `u_t = -Δ_p^K u + f` in two ways: by cell-averaging a
//! (possibly singular) graphon kernel `K` on a mesh, and by sampling sparse
//! `K`-random graphs whose rescaled adjacency approximates `K`. Forward Euler
//! (with a state-dependent CFL rule), a diminishing-step subgradient scheme for
//! `p = 1`, and backward Euler (one resolvent solve per step) advance the
//! discrete state. The [`analysis`] module holds reference solutions and the
//! log-log rate fits used to check convergence exponents empirically.
//!
//! The crate is `no_std` + `alloc` when the default `std` feature is disabled.
//! Parallel work is expressed through [`exec::Executor`] so callers decide how
//! independent jobs are scheduled; numerical results never depend on it.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod graph;
pub mod kernel;
pub mod mesh;
pub mod plaplacian;
mod quadrature;

pub use analysis::{RateFit, RateStudyResult};
pub use error::{Error, Result};
pub use evolve::{Operator, Problem, Scheme, SourceTerm, Trajectory};
pub use exec::{Executor, Sequential};
pub use graph::{GraphSample, GraphStats, TruncatedWeights};
pub use kernel::KernelSpec;
pub use mesh::{DiscreteKernel, GridFunction, Mesh};
pub use plaplacian::{PExponent, SubgradientSelection};
