use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// An iterative procedure ran out of budget before meeting its tolerance.
    #[error("no convergence in {context} after {iterations} iterations (last estimate {estimate:e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        estimate: f64,
    },

    /// The estimator is not defined for this sample size or parameter range.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// All observations are equal; the statistic hits a singular point.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("singular point in {0}")]
    Singular(&'static str),

    #[error("overflow in {0}")]
    Overflow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
