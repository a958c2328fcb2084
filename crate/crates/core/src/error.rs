use thiserror::Error;

/// Everything that can go wrong inside the laboratory.
///
/// Variants are grouped by how the command line reports them: input
/// problems, numerical failures and resource guards map onto distinct exit
/// codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("outside the hypothesis region: {0}")]
    OutOfHypothesis(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("grid does not resolve the problem: {0}")]
    Resolution(String),

    #[error("solver integrity check failed: {0}")]
    Integrity(String),

    #[error("boundary contamination: {0}")]
    Contamination(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 validation, 3 numerical failure, 4 resource guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. }
            | Error::OutOfRegime(_)
            | Error::OutOfHypothesis(_)
            | Error::Config(_) => 2,
            Error::Numerical(_)
            | Error::Resolution(_)
            | Error::Integrity(_)
            | Error::Contamination(_) => 3,
            Error::Resource(_) => 4,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }

    /// Short kebab-case name of the variant.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::OutOfRegime(_) => "out-of-regime",
            Error::OutOfHypothesis(_) => "out-of-hypothesis",
            Error::Numerical(_) => "numerical",
            Error::Resolution(_) => "resolution",
            Error::Integrity(_) => "integrity",
            Error::Contamination(_) => "contamination",
            Error::Resource(_) => "resource",
            Error::Io(_) => "io",
            Error::Config(_) => "config",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn ensure_finite(values: &[num_complex::Complex64], what: &str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} produced non-finite values")))
    }
}
