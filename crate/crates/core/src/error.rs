use thiserror::Error;

/// Errors raised anywhere in the lab.
///
/// The variants split into two families that the CLI maps onto exit codes:
/// configuration/usage problems (exit 2) and numeric or I/O failures (exit 1).
#[derive(Debug, Error)]
pub enum LabError {
    /// A physical quantity is outside its domain, e.g. `|v| >= 1`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its contract.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A numerical routine failed (eigensolver, ill-conditioning, construction bug).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// No admissible exponential window in an amplitude series.
    #[error("fit error: {0}")]
    Fit(String),

    /// A verification check in a subcommand did not hold.
    #[error("check failed: {0}")]
    Check(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit code for this error under the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
