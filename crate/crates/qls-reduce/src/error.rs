use qls_core::SystemError;
use qls_h2::H2Error;
use qls_linsolve::LyapunovError;
use qls_sdp::SdpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("reduced mode count r={r} must satisfy 1 <= r < n={n}")]
    Order { r: usize, n: usize },
    #[error("input system is not physically realizable (largest residual {residual:e})")]
    NotRealizable { residual: f64 },
    #[error("input system is not passive (largest residual {residual:e})")]
    NotPassive { residual: f64 },
    #[error("input system is not Hurwitz (abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },
    #[error("{which} is singular or ill-conditioned (condition {condition:e})")]
    SingularBlock { which: &'static str, condition: f64 },
    #[error("warm start failed: {0}")]
    WarmStart(#[from] SdpError),
    #[error("no candidate produced a stable reduced model ({0})")]
    NoCandidate(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    H2(#[from] H2Error),
}
