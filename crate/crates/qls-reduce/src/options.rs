use qls_core::Real;
use qls_h2::QuadratureSpec;
use serde_json::{json, Value};

/// Which Gramian the warm start and lifting are written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Observability side (`Q̂` blocks, `M_r`).
    QForm,
    /// Controllability side (`P̂` blocks, `N_r`).
    PForm,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::QForm => "qform",
            Method::PForm => "pform",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceOptions<T> {
    /// Strict-inequality margin of the warm-start LMIs (on the rate-normalized system).
    pub eps: T,
    /// Realizability tolerance, relative to the reduced model's block scale.
    pub tol_real: T,
    /// Coupling tolerance of the rank-constrained projection.
    pub tol_eq: T,
    /// Bound on `‖TV − I‖` and on the intertwining residual.
    pub tol_projection: T,
    /// Alternating-projection iterations per attempt.
    pub max_iter: usize,
    /// Quasi-Newton iterations of the row-space refinement.
    pub refine_iter: usize,
    pub seed: u64,
    /// Seeded restarts when the recovered third block is ill-conditioned.
    pub jitter_attempts: usize,
    pub dykstra: bool,
    /// Mode subsets tried as starting points; `None` tries all of them.
    pub max_candidates: Option<usize>,
    /// Gramian vs quadrature agreement required to certify.
    pub quad_tol: f64,
    pub quadrature: QuadratureSpec,
}

impl<T: Real> Default for ReduceOptions<T> {
    fn default() -> Self {
        ReduceOptions {
            eps: T::lit(1e-6),
            tol_real: T::lit(1e-6),
            tol_eq: T::lit(1e-7),
            tol_projection: T::lit(1e-6),
            max_iter: 400,
            refine_iter: 600,
            seed: 0,
            jitter_attempts: 3,
            dykstra: false,
            max_candidates: None,
            quad_tol: 1e-3,
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl<T: Real> ReduceOptions<T> {
    pub fn to_value(&self) -> Value {
        json!({
            "eps": self.eps.as_f64(),
            "tol_real": self.tol_real.as_f64(),
            "tol_eq": self.tol_eq.as_f64(),
            "tol_projection": self.tol_projection.as_f64(),
            "max_iter": self.max_iter,
            "refine_iter": self.refine_iter,
            "seed": self.seed,
            "jitter_attempts": self.jitter_attempts,
            "dykstra": self.dykstra,
            "max_candidates": self.max_candidates,
            "quad_tol": self.quad_tol,
        })
    }
}
