use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix dimension {0} is not even")]
    OddDimension(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("not a physical covariance matrix: gamma + i sigma has eigenvalue {0:e}")]
    NotPhysical(f64),
    #[error("mode counts differ: {0} vs {1}")]
    ModeMismatch(usize, usize),
    #[error("invalid mode partition: {0}")]
    InvalidPartition(String),
    #[error("determinant of the summed covariance matrices is not positive ({0:e})")]
    SingularSum(f64),
    #[error("local block is singular, cannot reduce to standard form")]
    DegenerateBlock,
    #[error("local covariance matrix is not pure (det = {0})")]
    ImpureLocalCM(f64),
    #[error("c must be non-negative, got {0}")]
    NegativeC(f64),
    #[error("gamma_2 block is singular")]
    SingularGamma2,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no convergence after {iterations} iterations (last change {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("optimizer failure: {0}")]
    OptimFailure(String),
    #[error("detect operator violates required positivity: {0}")]
    NotPositive(String),
    #[error("stationarity violated: T diagonal = ({0:e}, {1:e})")]
    StationarityViolated(f64, f64),
    #[error("quadrature grid too narrow: tail mass {0:e}")]
    GridTooNarrow(f64),
    #[error("photon count {0} exceeds the supported maximum of 2")]
    UnsupportedOrder(usize),
    #[error("kernel state matches no criterion family")]
    UnclassifiedKernel,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
