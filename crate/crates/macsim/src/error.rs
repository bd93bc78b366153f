use std::fmt;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Exit-code class of an [`Error`]; the CLI maps each run failure to a
/// distinct process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or malformed/ inconsistent input data (exit 1).
    Config,
    /// The agreement structure does not admit valid chain parameters (exit 2).
    Infeasible,
    /// Filesystem / CSV failures (exit 3).
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 1,
            ErrorClass::Infeasible => 2,
            ErrorClass::Io => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    /// A true match required by the alignment is absent or duplicated.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// m/u/g cannot be estimated from the block (no matched pairs, no
    /// non-matched pairs, or every matched-pair cell missing).
    #[error("estimation error: {0}")]
    Estimation(String),

    /// Transition parameters derived from the m/u/g profile fall outside
    /// [0,1] beyond numerical slack.
    #[error("infeasible marginals: {0}")]
    InfeasibleMarginals(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// `agrees` was asked about a missing cell; callers must branch on
    /// missing before testing agreement.
    #[error("undefined agreement: {0}")]
    UndefinedAgreement(String),

    #[error("I/O error{}: {source}", path_note(.path))]
    Io {
        path: Option<std::path::PathBuf>,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

fn path_note(path: &Option<std::path::PathBuf>) -> String {
    match path {
        Some(p) => format!(" ({})", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_)
            | Error::Alignment(_)
            | Error::DimensionMismatch(_)
            | Error::UndefinedAgreement(_) => ErrorClass::Config,
            Error::Estimation(_) | Error::InfeasibleMarginals(_) => ErrorClass::Infeasible,
            Error::Io { .. } | Error::Csv(_) => ErrorClass::Io,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(source: std::io::Error) -> Self {
        Error::Io { path: None, source }
    }
}

impl From<fmt::Error> for Error {
    fn from(e: fmt::Error) -> Self {
        Error::Config(format!("formatting failed: {e}"))
    }
}
