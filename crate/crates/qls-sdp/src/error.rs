use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("no strictly feasible point found; most violated constraint {constraint} (margin {margin:e})")]
    Infeasible { constraint: String, margin: f64 },
    #[error("ill-conditioned problem (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("solution fails independent check on {constraint}: margin {margin:e} < {required:e}")]
    Verification {
        constraint: String,
        margin: f64,
        required: f64,
    },
    #[error("singular block: {0}")]
    Singular(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
