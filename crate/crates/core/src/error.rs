use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: max |UU^dagger - I| = {0:e}")]
    NotUnitary(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("matrix of size {n} exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("photon number {0} exceeds the supported maximum of 170")]
    NOverflow(usize),

    #[error("cat state has no surviving terms")]
    EmptyCat,

    #[error("cat state norm is degenerate (N^2 = {0:e})")]
    DegenerateNorm(f64),

    #[error("{what} count {count} exceeds the cap of {cap}")]
    TermExplosion {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("distribution has no captured mass")]
    EmptyDistribution,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Resource-cap failures (as opposed to malformed input).
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::TooLarge { .. } | Error::NOverflow(_) | Error::TermExplosion { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn json(source_name: impl Into<String>, err: &serde_json::Error) -> Self {
        // serde_json appends " at line L column C" to the message; strip it.
        let text = err.to_string();
        let message = match text.rfind(" at line ") {
            Some(pos) => text[..pos].to_string(),
            None => text,
        };
        Error::Parse {
            source_name: source_name.into(),
            line: err.line(),
            column: err.column(),
            message,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
