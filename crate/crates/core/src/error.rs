use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("scenario schema violation: {0}")]
    Schema(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("evaluation at a pole (|den(z)| = {magnitude:e})")]
    EvaluationAtPole { magnitude: f64 },
    #[error("point is not a pole of the rational function")]
    NotAPole,
    #[error("pole is not simple")]
    NonSimplePole,
    #[error("rational function is not proper")]
    NonProper,
    #[error("rational function is not strictly proper")]
    NotStrictlyProper,
    #[error("degenerate closed loop: den + rho*num vanishes identically")]
    DegenerateFeedback,
    #[error("{algorithm} did not converge")]
    NoConvergence { algorithm: &'static str },
    #[error("network graph is disconnected")]
    DisconnectedGraph,
    #[error("line {0}-{1} has non-positive resistance")]
    NonPositiveResistance(usize, usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("load-side assumption violated: lambda_min(Y^ll cos(theta0) - diag(y_v)) = {lambda_min:e}")]
    LlAssumptionViolated { lambda_min: f64 },
    #[error("invalid grid code: {0}")]
    InvalidGridCode(String),
    #[error("equilibrium rejected: {0}")]
    Equilibrium(String),
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures of numerical routines rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Internal(_)
                | Error::Equilibrium(_)
                | Error::EvaluationAtPole { .. }
                | Error::DegenerateFeedback
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
