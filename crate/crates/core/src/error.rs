use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hilbert space dimension {0} exceeds the limit of {limit}", limit = crate::quantum::MAX_DIM)]
    DimensionOverflow(usize),
    #[error("level {level} is not present at site {site}")]
    UnknownLevel { site: usize, level: String },
    #[error("operands live on different Hilbert spaces ({0})")]
    SpaceMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("parameter `{param}` is required by {context}")]
    MissingParameter { param: String, context: String },
    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParameter { param: String, reason: String },
    #[error("variant {variant} does not support {what}")]
    VariantMismatch { variant: String, what: String },
    #[error("step size underflow at t = {t:.6} us (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("norm drift {drift:.3e} at t = {t:.6} us")]
    NormDrift { t: f64, drift: f64 },
    #[error("trace drift {drift:.3e} at t = {t:.6} us")]
    TraceDrift { t: f64, drift: f64 },
    #[error("density matrix lost positivity at t = {t:.6} us (min eigenvalue {min_eig:.3e})")]
    PositivityViolation { t: f64, min_eig: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("exponential fit failed: {0}")]
    Fit(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Strip context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical propagation itself (as opposed to
    /// bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::StepUnderflow { .. }
                | Error::NormDrift { .. }
                | Error::TraceDrift { .. }
                | Error::PositivityViolation { .. }
                | Error::Fit(_)
        )
    }
}
