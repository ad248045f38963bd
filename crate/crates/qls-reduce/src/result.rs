use std::ops::Deref;

use qls_core::json::{matrix_to_value, system_to_value, to_canonical_string};
use qls_core::{PassiveResiduals, QuantumLinearSystem, Real};
use qls_sdp::TraceRow;
use serde_json::{json, Map, Value};

use crate::certify::ValidationReport;
use crate::options::{Method, ReduceOptions};
use crate::projection::ProjectionPair;

/// What happened to one starting mode subset.
#[derive(Debug, Clone, Default)]
pub struct CandidateTrace {
    /// Modes of the full system the start was built around.
    pub modes: Vec<usize>,
    /// Error of plain truncation to `modes` (if that truncation is stable).
    pub truncation_h2: Option<f64>,
    pub warm_source: Option<&'static str>,
    pub lmi_gamma2: Option<f64>,
    pub ap_iterations: usize,
    pub ap_converged: bool,
    pub ap_stagnated: bool,
    pub ap_residual: Option<f64>,
    pub ap_rank_gap: Option<f64>,
    pub jitters: usize,
    /// `‖T̂V̂ − I‖` of the pair read off the lifted blocks.
    pub raw_tv: Option<f64>,
    /// `‖𝕁T̂ᵀ − V̂𝕁‖` (or `‖T̂ − V̂ᵀ‖` for passive runs) of the same pair.
    pub raw_structure: Option<f64>,
    /// H2 error after refinement from the lifted start.
    pub lifted_h2: Option<f64>,
    /// H2 error after refinement from the plain mode selection.
    pub selector_h2: Option<f64>,
    pub refine_iterations: usize,
    /// Norm of the row-space gradient at the end, relative to the error.
    pub stationarity: Option<f64>,
    pub notes: Vec<String>,
}

impl CandidateTrace {
    fn to_value(&self) -> Value {
        json!({
            "modes": self.modes,
            "truncation_h2": self.truncation_h2,
            "warm_source": self.warm_source,
            "lmi_gamma2": self.lmi_gamma2,
            "ap_iterations": self.ap_iterations,
            "ap_converged": self.ap_converged,
            "ap_stagnated": self.ap_stagnated,
            "ap_residual": self.ap_residual,
            "ap_rank_gap": self.ap_rank_gap,
            "jitters": self.jitters,
            "raw_tv": self.raw_tv,
            "raw_structure": self.raw_structure,
            "lifted_h2": self.lifted_h2,
            "selector_h2": self.selector_h2,
            "refine_iterations": self.refine_iterations,
            "stationarity": self.stationarity,
            "notes": self.notes,
        })
    }

    /// Best H2 error over both refinement starts.
    pub fn best_h2(&self) -> Option<f64> {
        match (self.lifted_h2, self.selector_h2) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub method: Method,
    pub candidates: Vec<CandidateTrace>,
    /// Index into `candidates` of the returned model.
    pub chosen: usize,
    /// Alternating-projection iterations of the chosen candidate.
    pub ap_trace: Vec<TraceRow>,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone)]
pub struct ReductionResult<T: Real> {
    pub reduced: QuantumLinearSystem<T>,
    pub projection: ProjectionPair<T>,
    /// Certified upper bound on the H2 error.
    pub gamma: Option<T>,
    /// H2 error from the Gramian route.
    pub h2_error: Option<T>,
    pub certified: bool,
    pub validation: ValidationReport<T>,
    pub trace: SolveTrace,
    pub passive: bool,
}

/// Input digest, seed and options recorded with a result.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: u64,
    pub options: Value,
    pub order: usize,
    pub tool_version: String,
}

fn opt<T: Real>(x: Option<T>) -> Value {
    x.map_or(Value::Null, |v| json!(v.as_f64()))
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

impl<T: Real> ReductionResult<T> {
    pub fn h2_squared(&self) -> Option<T> {
        self.h2_error.map(|h| h * h)
    }

    pub fn to_value(&self, provenance: Option<&Provenance>) -> Value {
        let v = &self.validation;
        let res = &v.residuals;
        let checks: Vec<Value> = v
            .checks
            .iter()
            .map(|c| json!({"name": c.name, "value": finite(c.value), "limit": finite(c.limit), "pass": c.pass}))
            .collect();
        let necessary = res.necessary.map_or(Value::Null, |n| {
            json!({
                "rho_c": n.rho_c.as_f64(), "rho_b": n.rho_b.as_f64(), "rho_pq": n.rho_pq.as_f64(),
                "rel_c": n.rel_c.as_f64(), "rel_b": n.rel_b.as_f64(), "rel_pq": n.rel_pq.as_f64(),
            })
        });
        let mut residuals = Map::new();
        residuals.insert(
            "realizability".into(),
            json!([
                res.realizability.r1.as_f64(),
                res.realizability.r2.as_f64(),
                res.realizability.r3.as_f64()
            ]),
        );
        if let Some(p) = res.passive {
            residuals.insert(
                "passive".into(),
                json!([p.p1.as_f64(), p.p2.as_f64(), p.p3.as_f64()]),
            );
        }
        residuals.insert("overwrite_delta".into(), opt(res.overwrite_delta));
        residuals.insert("scale".into(), json!(res.scale.as_f64()));
        residuals.insert("abscissa".into(), json!(res.abscissa.as_f64()));
        residuals.insert(
            "stability_margin".into(),
            json!(res.stability_margin.as_f64()),
        );
        residuals.insert("tv".into(), opt(res.tv));
        residuals.insert("intertwining".into(), opt(res.intertwining));
        residuals.insert("symmetry".into(), opt(res.symmetry));
        residuals.insert("necessary".into(), necessary);
        residuals.insert("checks".into(), Value::Array(checks));

        let chosen = &self.trace.candidates[self.trace.chosen];
        let mut out = json!({
            "reduced": system_to_value(&self.reduced.cast::<f64>()),
            "T": matrix_to_value(&self.projection.t.map(|x| x.as_f64())),
            "V": matrix_to_value(&self.projection.v.map(|x| x.as_f64())),
            "gamma": opt(self.gamma),
            "h2_error": opt(self.h2_error),
            "h2_squared": opt(self.h2_squared()),
            "h2_quadrature": v.quadrature.map_or(Value::Null, |q| json!(q.norm)),
            "certified": self.certified,
            "passive": self.passive,
            "residuals": Value::Object(residuals),
            "trace": {
                "method": self.trace.method.name(),
                "chosen_modes": chosen.modes,
                "candidates": self.trace.candidates.iter().map(|c| c.to_value()).collect::<Vec<_>>(),
                "ap_steps": self.trace.ap_trace.len(),
                "elapsed_ms": self.trace.elapsed_ms as u64,
            },
        });
        if let Some(p) = provenance {
            out["provenance"] = json!({
                "input_sha256": p.input_sha256,
                "seed": p.seed,
                "order": p.order,
                "options": p.options,
                "version": p.tool_version,
            });
        }
        out
    }

    pub fn to_json(&self, provenance: Option<&Provenance>) -> String {
        to_canonical_string(&self.to_value(provenance))
    }
}

impl Provenance {
    pub fn new<T: Real>(input_sha256: String, order: usize, opts: &ReduceOptions<T>) -> Self {
        Provenance {
            input_sha256,
            seed: opts.seed,
            options: opts.to_value(),
            order,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// A reduction of a passive system with `B_r = −C_rᵀ` and `D_r = I` imposed.
#[derive(Debug, Clone)]
pub struct PassiveReductionResult<T: Real> {
    pub result: ReductionResult<T>,
    pub passive_residuals: PassiveResiduals<T>,
    pub overwrite_delta: T,
}

impl<T: Real> Deref for PassiveReductionResult<T> {
    type Target = ReductionResult<T>;
    fn deref(&self) -> &Self::Target {
        &self.result
    }
}
