use thiserror::Error;

/// Errors raised by the delineation and analysis pipeline.
///
/// The variants map one-to-one onto the CLI exit-code classes, see
/// [`Error::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A tunable is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The input signal or data set is unusable for the requested operation.
    #[error("invalid input: {0}")]
    Input(String),
    /// Input values violate a documented precondition (e.g. out of `[0, 1]`).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Normalisation or estimation is undefined for the given input.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// Malformed file or configuration content.
    #[error("parse error: {0}")]
    Parse(String),
    /// Model fitting failed.
    #[error("training failed: {0}")]
    Training(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Coarse error classes used for machine-readable reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Precondition,
    Degenerate,
    Other,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_) => ErrorKind::Parse,
            Error::Parameter(_) | Error::Input(_) | Error::Precondition(_) => {
                ErrorKind::Precondition
            }
            Error::Degenerate(_) => ErrorKind::Degenerate,
            Error::Training(_) | Error::Io(_) => ErrorKind::Other,
        }
    }

    /// Same variant with `prefix: ` prepended to the message.
    pub fn context(self, prefix: impl std::fmt::Display) -> Self {
        let add = |m: String| format!("{prefix}: {m}");
        match self {
            Error::Parameter(m) => Error::Parameter(add(m)),
            Error::Input(m) => Error::Input(add(m)),
            Error::Precondition(m) => Error::Precondition(add(m)),
            Error::Degenerate(m) => Error::Degenerate(add(m)),
            Error::Parse(m) => Error::Parse(add(m)),
            Error::Training(m) => Error::Training(add(m)),
            Error::Io(m) => Error::Io(add(m)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Input(_) => "input",
            Error::Precondition(_) => "precondition",
            Error::Degenerate(_) => "degenerate",
            Error::Parse(_) => "parse",
            Error::Training(_) => "training",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
