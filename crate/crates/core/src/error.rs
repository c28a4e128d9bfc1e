use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments to a constructor (mixture, family, test function).
    #[error("construction error: {0}")]
    Construction(String),

    /// A function or oracle produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A mixture operation would exceed the configured atom cap.
    #[error("resource error: {what} needs {needed} atoms, cap is {cap}")]
    Resource {
        what: String,
        needed: usize,
        cap: usize,
    },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Family, oracle and test function do not fit together.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Too few strictly positive errors to fit a power law.
    #[error("degenerate fit: {usable} usable points, need at least 3")]
    DegenerateFit { usable: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}
