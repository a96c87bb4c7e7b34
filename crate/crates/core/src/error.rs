use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus spec: {0}")]
    InvalidSpec(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("vertex {0} has no neighbours")]
    Degenerate(usize),

    #[error("integrand is singular at {0:?}")]
    Singular(Vec<f64>),

    #[error("lattice integral diverges for d = {0} (needs d >= 3)")]
    Divergent(usize),

    #[error("quadrature methods disagree for d = {d}: {a} vs {b} (allowed {allowed:e})")]
    CrossValidation { d: usize, a: f64, b: f64, allowed: f64 },

    #[error("all {replicates} walks hit the step cap of {step_cap}")]
    EstimationFailed { replicates: usize, step_cap: u64 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
