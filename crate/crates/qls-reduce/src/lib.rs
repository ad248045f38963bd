//! Physically realizable H2 model reduction of linear quantum systems.
//!
//! Active systems are reduced through symplectic projections, passive ones
//! through orthogonal projections with `B_r = −C_rᵀ`. Each run tries every
//! mode subset as a starting point, lifts the bilinear Gramian couplings into
//! a rank-constrained PSD problem, refines the recovered projection on the
//! row-space manifold and certifies the result independently.

mod certify;
mod error;
mod normalize;
mod options;
mod pipeline;
mod projection;
mod refine;
mod result;
mod warm;

pub use certify::{gamma_bound, validate_reduction, Check, ResidualReport, ValidationReport};
pub use error::ReduceError;
pub use normalize::{commuting_part, polar_normalize, skew_normalizer, symplectic_normalize};
pub use options::{Method, ReduceOptions};
pub use pipeline::{
    reduce, reduce_h2_pform, reduce_h2_qform, reduce_passive_pform, reduce_passive_qform,
};
pub use projection::{
    h2_objective_gradient, necessary_condition_residuals, passive_projection_residuals,
    project_from_gramians, H2Gradient, NecessaryResiduals, ProjectionPair,
};
pub use qls_h2::{build_augmented, AugmentedSystem};
pub use result::{CandidateTrace, PassiveReductionResult, Provenance, ReductionResult, SolveTrace};
pub use warm::{
    assemble_passive_constraints, assemble_pform_constraints, assemble_qform_constraints,
    gramian_warm_start, lmi_warm_start, WarmSource, WarmStart, WarmStartProblem,
};
