use abflow::FlowError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const SINGULAR_INPUT: i32 = 3;
    pub const NUMERICAL_FAILURE: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Flow(e) => match e {
                FlowError::InvalidParams(_) => exit::USAGE,
                FlowError::SingularPoint { .. }
                | FlowError::InvalidStart { .. }
                | FlowError::InvalidContour(_) => exit::SINGULAR_INPUT,
                FlowError::HomoclinicNotClosed { .. } => exit::NUMERICAL_FAILURE,
            },
            CliError::Numerical(_) | CliError::Io(_) => exit::NUMERICAL_FAILURE,
        }
    }
}
