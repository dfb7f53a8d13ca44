use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violates a precondition of the measure (negative entries,
    /// unnormalized histograms, empty vectors).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two sketches built under different configurations were compared.
    #[error("incomparable sketches: {0}")]
    Comparison(String),

    /// A numerical routine failed to converge or bracket.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed sketch file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }

    /// True for failures of the numerical machinery itself, as opposed to bad
    /// input or configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}
