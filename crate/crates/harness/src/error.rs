use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: linproj::Error,
    },
    #[error(transparent)]
    Core(#[from] linproj::Error),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Short snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Step { source, .. } | HarnessError::Core(source) => source.kind(),
            HarnessError::UnknownMethod(_) => "unknown_method",
            HarnessError::Config(_) => "invalid_config",
            HarnessError::Csv(_) => "csv",
            HarnessError::Io(_) => "io",
        }
    }

    pub fn step(&self) -> Option<usize> {
        match self {
            HarnessError::Step { step, .. } => Some(*step),
            _ => None,
        }
    }
}
