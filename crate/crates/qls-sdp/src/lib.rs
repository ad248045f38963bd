//! Strict LMI feasibility/optimization and rank-constrained alternating
//! projections over lifted matrix variables.

mod barrier;
mod error;
mod lifted;
mod lifting;
mod lmi;
mod psd;

pub use barrier::{solve_lmi, BarrierOptions, LmiSolution};
pub use error::SdpError;
pub use lifted::{
    rank_projection_solve, trace_to_csv, Entry, LiftedBuilder, LiftedProblem, RankOptions,
    RankSolution, TraceRow,
};
pub use lifting::{LiftedBlocks, LiftingKind, LiftingLayout};
pub use lmi::{ConstraintSense, LmiProblem, VarId, VarKind, VarValues};
pub use psd::{psd_project, rank_project, RankProjection};
