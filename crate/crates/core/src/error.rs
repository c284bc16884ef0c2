use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// The CLI maps these onto exit codes: validation and input problems
/// exit with 2, resource-bound violations with 3. Mathematical check
/// failures are not errors; they are reported in result tables.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("resource bound exceeded: {what} needs {needed} cells, bound is {bound}")]
    Size {
        what: String,
        needed: usize,
        bound: usize,
    },

    #[error("bad input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    /// Exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Size { .. } => 3,
            _ => 2,
        }
    }
}
