use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse grouping of failures, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Solver,
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weight {name} is not positive definite (min eigenvalue {min_eig:e})")]
    NonPdWeight { name: &'static str, min_eig: f64 },
    #[error("weight {name} is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NonPsdWeight { name: &'static str, min_eig: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("infinite horizon problems cannot carry a terminal weight")]
    InfiniteHorizonWithTerminalCost,
    #[error("infinite horizon problems require time-invariant A, B, C")]
    TimeVaryingInfiniteHorizon,
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("time profile is singular at t = {t}")]
    ProfileSingularity { t: f64 },
    #[error("t = {t} lies outside the horizon [{t0}, {tf}]")]
    OutOfHorizon { t: f64, t0: f64, tf: f64 },
    #[error("operation requires a finite horizon")]
    InfiniteHorizon,
    #[error("operation requires an infinite-horizon, time-invariant problem")]
    FiniteHorizon,
    #[error("time grids do not match: {0}")]
    GridMismatch(String),
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("{what}: integration blew up at t = {t}")]
    IntegrationBlowup { what: &'static str, t: f64 },
    #[error("no Newton start converged to a solution of the algebraic equation")]
    NoSolutionFound,
    #[error("no solution has a positive definite symmetric part with a stable closed loop")]
    NoStabilizingSolution,
    #[error("no stabilizing Riccati solution exists: {stable} of {n} required modes are stable")]
    NotStabilizable { stable: usize, n: usize },
    #[error("closed-loop matrix is not Hurwitz (max real part {max_re:e})")]
    NotHurwitz { max_re: f64 },
    #[error("exponent a - p b^2 / n = {exponent} is not negative")]
    UnstableExponent { exponent: f64 },
    #[error("iteration {k}: cost increased from {previous} to {current}")]
    DivergedIterate { k: usize, previous: f64, current: f64 },
    #[error("state norm exceeded the blowup threshold at t = {t}")]
    Blowup { t: f64 },
    #[error("grid too coarse: {nodes} nodes, need at least 3")]
    GridTooCoarse { nodes: usize },
    #[error("singular linear system: {0}")]
    Singular(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            NoSolutionFound | NoStabilizingSolution | NotStabilizable { .. } | NotHurwitz { .. }
            | UnstableExponent { .. } | DivergedIterate { .. } => ErrorCategory::Solver,
            IntegrationBlowup { .. } | Blowup { .. } | Singular(_) | ProfileSingularity { .. } => {
                ErrorCategory::Numerical
            }
            _ => ErrorCategory::Validation,
        }
    }
}
