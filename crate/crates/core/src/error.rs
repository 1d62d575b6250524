use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("L^(inf,{q}) norm of the power-law kernel diverges (q * beta = {product} >= 1)")]
    DivergentNorm { q: f64, product: f64 },
    #[error("unsupported norm exponent {0}; expected 1, 2 or infinity")]
    UnsupportedExponent(f64),
    #[error("non-finite value produced in cell {cell}")]
    NonFiniteValue { cell: usize },
    #[error("kernel is singular at ({x}, {y}) and has no closed-form cell integrals")]
    UnsupportedSingularity { x: f64, y: f64 },
    #[error("dense kernel with {n} cells exceeds the configured cap of {cap}")]
    MeshTooLarge { n: usize, cap: usize },
    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("operands live on different meshes")]
    MeshMismatch,
    #[error("meshes are not nested in a common refinement of {n_common} cells")]
    NonNestedMeshes { n_common: usize },
    #[error("exponent p = {p} is outside the admissible range {allowed}")]
    InvalidP { p: f64, allowed: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("discrete kernel is not symmetric at ({i}, {j})")]
    AsymmetricKernel { i: usize, j: usize },
    #[error("resolvent solve did not converge{} after {iterations} iterations (residual {residual:e})", step_suffix(*.step))]
    NoConvergence {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },
    #[error("explicit schemes require a zero or time-constant source")]
    TimeDependentSource,
    #[error("step size {tau:e} underflowed at t = {t}")]
    StepUnderflow { t: f64, tau: f64 },
    #[error("horizon not reached after {steps} steps; covered [0, {covered}]")]
    HorizonUnreachable { covered: f64, steps: usize },
    #[error("symmetric eigendecomposition failed")]
    EigenFailure,
    #[error("rate fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("rate fit needs positive parameters and errors")]
    NonPositive,
    #[error("all fit parameters are equal")]
    DegenerateFit,
}

fn step_suffix(step: Option<usize>) -> alloc::string::String {
    match step {
        Some(k) => alloc::format!(" at step {k}"),
        None => alloc::string::String::new(),
    }
}
