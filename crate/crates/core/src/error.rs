use thiserror::Error;

/// Errors shared by every analysis module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A text input could not be parsed. Line numbers are 1-based and count
    /// every physical line, including comments and the header.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Fewer samples or rows than the operation needs.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// An argument violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No rising segment could be located in the trace.
    #[error("no ramp found: {0}")]
    NoRamp(String),

    /// Least-squares fit is undefined (degenerate abscissa).
    #[error("singular fit: {0}")]
    SingularFit(String),

    /// A ratio hit a zero denominator where one is physically impossible.
    #[error("division domain: {0}")]
    DivisionDomain(String),

    /// Two observations with zero spread disagree; no fusion weight exists.
    #[error("undefined fusion weight: observations {0} and {1} have zero variance")]
    UndefinedWeight(f64, f64),

    /// A recursive estimate never crossed its detection threshold.
    #[error("not converged: {0}")]
    NotConverged(String),

    /// Two curves never became distinguishable at the given threshold.
    #[error("indiscriminable: {0}")]
    Indiscriminable(String),

    /// Rates must lie strictly inside (0, 1); apply a correction first.
    #[error("rate {0} outside (0,1); apply a count correction before inverting")]
    MustCorrect(f64),

    /// Iterative numeric routine failed to reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Model fit could not be carried out on the given data.
    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
