use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use plap_core::evolve::{
    backward_euler, forward_euler, uniform_partition, BackwardOptions, ForwardOptions,
};
use plap_core::graph::{sample, sample_with, truncate};
use plap_core::mesh::project_kernel;
use plap_core::{
    DiscreteKernel, GridFunction, KernelSpec, Mesh, Operator, PExponent, Problem, Sequential,
    SourceTerm,
};

fn graded_mesh() -> Arc<Mesh> {
    let boundaries: Vec<f64> = (0..=12).map(|i| (i as f64 / 12.0).powi(2)).collect();
    Arc::new(Mesh::from_boundaries(boundaries).unwrap())
}

fn symmetric_kernel(mesh: &Arc<Mesh>) -> DiscreteKernel {
    let n = mesh.n();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            entries[i * n + j] = 1.0 + (a * 0.7 + b * 1.3).sin().abs();
        }
    }
    DiscreteKernel::from_entries(mesh.clone(), entries).unwrap()
}

/// `L` with `(Lu)_i = Σ_j h_j K_ij (u_i - u_j)`, the p = 2 operator as a matrix.
fn laplacian_matrix(kd: &DiscreteKernel) -> DMatrix<f64> {
    let n = kd.n();
    let h = kd.mesh().sizes();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n)
                .filter(|&k| k != i)
                .map(|k| h[k] * kd.get(i, k))
                .sum()
        } else {
            -h[j] * kd.get(i, j)
        }
    })
}

fn ramp(mesh: &Arc<Mesh>) -> GridFunction {
    let values = (0..mesh.n())
        .map(|i| {
            let (a, b) = mesh.cell(i);
            (a + b) * (a + b)
        })
        .collect();
    GridFunction::new(mesh.clone(), values).unwrap()
}

fn problem(kd: DiscreteKernel, initial: GridFunction, horizon: f64) -> Problem {
    Problem::new(
        Operator::Kernelized(Arc::new(kd)),
        PExponent::new(2.0).unwrap(),
        initial,
        SourceTerm::Zero,
        horizon,
    )
    .unwrap()
}

#[test]
fn backward_euler_matches_dense_linear_solves() {
    let mesh = graded_mesh();
    let kd = symmetric_kernel(&mesh);
    let l = laplacian_matrix(&kd);
    let g = ramp(&mesh);
    let prob = problem(kd, g.clone(), 0.5);
    let times = uniform_partition(0.5, 10);
    let traj = backward_euler(&prob, &times, &BackwardOptions::default()).unwrap();

    let mut u = DVector::from_column_slice(g.values());
    for (k, w) in times.windows(2).enumerate() {
        let a = DMatrix::identity(mesh.n(), mesh.n()) + (w[1] - w[0]) * &l;
        u = a.lu().solve(&u).unwrap();
        let state = &traj.states()[k + 1];
        let diff = state
            .iter()
            .zip(u.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "step {}: {diff}", k + 1);
    }
    let mass = traj.final_state().mass();
    assert!((mass - g.mass()).abs() < 1e-12);
}

#[test]
fn forward_euler_matches_explicit_matrix_steps() {
    let mesh = graded_mesh();
    let kd = symmetric_kernel(&mesh);
    let l = laplacian_matrix(&kd);
    let g = ramp(&mesh);
    let prob = problem(kd, g.clone(), 0.2);
    let traj = forward_euler(&prob, &ForwardOptions::new(0.01)).unwrap();

    let times = traj.times();
    assert_eq!(times.len(), traj.states().len());
    assert!((times[times.len() - 1] - 0.2).abs() < 1e-12);
    let mut u = DVector::from_column_slice(g.values());
    for (k, w) in times.windows(2).enumerate() {
        u = &u - (w[1] - w[0]) * (&l * &u);
        let state = &traj.states()[k + 1];
        let diff = state
            .iter()
            .zip(u.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "step {}: {diff}", k + 1);
    }
}

#[test]
fn graph_sampling_does_not_depend_on_the_executor() {
    let mesh = Arc::new(Mesh::uniform(300).unwrap());
    let kd = project_kernel(&KernelSpec::power_law(0.5).unwrap(), &mesh).unwrap();
    let w = truncate(&kd, 0.2).unwrap();
    let a = sample(&w, 77);
    let b = sample_with(&w, 77, &Sequential);
    assert_eq!(a.edge_count(), b.edge_count());
    assert!(a.edge_count() > 0);
    for i in 0..a.n() {
        assert_eq!(a.neighbors(i), b.neighbors(i));
    }
    assert_ne!(sample(&w, 78).edge_count(), 0);
}
