//! Dense Lyapunov solves, Gramians and Hurwitz checks.

mod gramian;
mod lyapunov;
mod stability;

pub use gramian::{gramians, system_gramians, GramianBlocks};
pub use lyapunov::{solve_lyapunov, solve_lyapunov_unchecked, LyapunovError};
pub use qls_core::spectrum::{default_stability_margin, spectral_abscissa};
pub use stability::{is_hurwitz, HurwitzReport};
