use qls_linsolve::LyapunovError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum H2Error {
    #[error(
        "feedthrough mismatch: the error system is not strictly proper and its H2 norm is infinite"
    )]
    FeedthroughMismatch,
    #[error("systems disagree on channel counts (m: {m_full} vs {m_red}, l: {l_full} vs {l_red})")]
    Channels {
        m_full: usize,
        m_red: usize,
        l_full: usize,
        l_red: usize,
    },
    #[error("{which} system is not Hurwitz (abscissa {abscissa:e})")]
    Unstable { which: &'static str, abscissa: f64 },
    #[error("trace formulas disagree: tr(BᵀQB)={via_b:e}, tr(CPCᵀ)={via_c:e}")]
    TraceMismatch { via_b: f64, via_c: f64 },
    #[error("s is (numerically) an eigenvalue of A")]
    SingularResolvent,
    #[error("quadrature tail does not decay: tail {tail:e} vs estimate {estimate:e}")]
    NonConvergentTail { estimate: f64, tail: f64 },
    #[error("invalid frequency grid: {0}")]
    Grid(String),
    #[error("channel ({out}, {inp}) outside a {rows}x{cols} transfer matrix")]
    ChannelIndex {
        out: usize,
        inp: usize,
        rows: usize,
        cols: usize,
    },
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
}
