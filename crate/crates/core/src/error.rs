use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants mirror the failure modes of the individual analyses so that the
/// command-line front end can map them onto stable exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("variable index {index} out of range for {dim} real coordinates")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("degenerate gradient: |grad rho| = {0:e} is below the floor")]
    DegenerateGradient(f64),
    #[error("not a defining function at the queried point: |grad rho| = {0:e}")]
    NotADefiningFunction(f64),
    #[error("operation requires a smooth domain; '{0}' only supports membership and distance")]
    NotSmooth(String),
    #[error("unknown catalog domain '{0}'")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("empty point set")]
    EmptySet,
    #[error("boundary curve is not closed (gap {gap:e}, typical spacing {spacing:e})")]
    CurveNotClosed { gap: f64, spacing: f64 },
    #[error("disc is singular at the origin (first-order coefficient vanishes)")]
    SingularDisc,
    #[error("every disc in the sequence is singular at the origin")]
    SingularDiscs,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("expression blow-up: {nodes} nodes exceed the budget of {budget}")]
    ExpressionBlowup { nodes: usize, budget: usize },
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DegenerateData(_)
                | Error::NoConvergence { .. }
                | Error::DegenerateGradient(_)
                | Error::NotADefiningFunction(_)
                | Error::Sampling(_)
                | Error::SingularDisc
                | Error::SingularDiscs
                | Error::ExpressionBlowup { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
