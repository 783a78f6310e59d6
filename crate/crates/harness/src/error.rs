use thiserror::Error;

/// Failure classes of the harness, each with its own exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant failure: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant(_) => 1,
            HarnessError::Config(_) | HarnessError::Output(_) => 2,
            HarnessError::Numerical(_) => 3,
        }
    }
}

impl From<fracburgers::Error> for HarnessError {
    fn from(e: fracburgers::Error) -> Self {
        use fracburgers::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(inner) => HarnessError::Config(inner),
            E::Domain(_) | E::Shape { .. } => HarnessError::Config(msg),
            E::PropertyViolation(_) => HarnessError::Invariant(msg),
            E::Degenerate(_) | E::Integration { .. } | E::Convergence { .. } | E::BoundaryProximity { .. } => {
                HarnessError::Numerical(msg)
            }
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}
