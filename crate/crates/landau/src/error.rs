use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("phi is singular at v = 0 without regularization")]
    SingularKernel,
    #[error("projection direction v must be nonzero")]
    ZeroDirection,
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("time samples are not strictly increasing")]
    UnorderedTimes,
    #[error("linear solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },
    #[error("blow-up guard tripped at t = {t}: sup norm {sup:.3e} exceeds {limit:.3e}")]
    BlowUp { t: f64, sup: f64, limit: f64 },
    #[error("Picard iteration is not contracting: delta grew for 3 consecutive iterations (n = {n})")]
    NonContraction { n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no sampled node lies inside the cylinder")]
    EmptyCylinder,
    #[error("points coincide")]
    CoincidentPoints,
}

pub type Result<T> = std::result::Result<T, Error>;
