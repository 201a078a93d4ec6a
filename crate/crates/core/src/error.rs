use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates a documented invariant (Nyquist, positivity, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-supplied argument is unusable (too short, mismatched, ...).
    #[error("argument error: {0}")]
    Argument(String),

    #[error("netlist error: {0}")]
    Netlist(String),

    #[error("singular system matrix: node `{node}` has no usable path to the rest of the circuit")]
    Singular { node: String },

    #[error("transient solve diverged at step {step} (non-finite value)")]
    Divergence { step: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Netlist(_) => "netlist",
            Error::Singular { .. } => "singular",
            Error::Divergence { .. } => "divergence",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
