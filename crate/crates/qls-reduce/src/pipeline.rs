//! The reduction pipeline: candidate starts, warm start, lifted rank-constrained
//! projection, recovery of `(T, V)`, row-space refinement and certification.

use std::time::Instant;

use log::{debug, info, warn};
use nalgebra::{Complex, DMatrix};
use qls_core::passive::complex_to_real_blocks;
use qls_core::spectrum::{default_stability_margin, spectral_abscissa, spectral_radius};
use qls_core::system::{mode_permutation, mode_selector};
use qls_core::{QuantumLinearSystem, Real};
use qls_sdp::{rank_projection_solve, LiftingKind, LiftingLayout, RankOptions, TraceRow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::certify::validate_reduction;
use crate::error::ReduceError;
use crate::normalize::{polar_normalize, symplectic_normalize};
use crate::options::{Method, ReduceOptions};
use crate::projection::{checked_inverse, condition, ProjectionPair, CONDITION_LIMIT};
use crate::refine::{Geometry, RefineOutcome, Refiner};
use crate::result::{CandidateTrace, PassiveReductionResult, ReductionResult, SolveTrace};
use crate::warm::{assemble, gramian_warm_start, lmi_warm_start, WarmStart};

/// Largest input residual accepted as realizable, relative to the block scale.
const INPUT_TOL: f64 = 1e-8;

/// Seeded mode-mixing starts drawn when the plain mode selection is unstable.
const MIXED_DRAWS: usize = 24;

/// H2-optimal realizable reduction via the observability-side lifting.
pub fn reduce_h2_qform<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    opts: &ReduceOptions<T>,
) -> Result<ReductionResult<T>, ReduceError> {
    run(full, r, opts, Method::QForm, false)
}

/// H2-optimal realizable reduction via the controllability-side lifting.
pub fn reduce_h2_pform<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    opts: &ReduceOptions<T>,
) -> Result<ReductionResult<T>, ReduceError> {
    run(full, r, opts, Method::PForm, false)
}

pub fn reduce_passive_qform<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    opts: &ReduceOptions<T>,
) -> Result<PassiveReductionResult<T>, ReduceError> {
    run(full, r, opts, Method::QForm, true).map(into_passive)
}

pub fn reduce_passive_pform<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    opts: &ReduceOptions<T>,
) -> Result<PassiveReductionResult<T>, ReduceError> {
    run(full, r, opts, Method::PForm, true).map(into_passive)
}

/// Dispatches on method and passivity.
pub fn reduce<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    method: Method,
    passive: bool,
    opts: &ReduceOptions<T>,
) -> Result<ReductionResult<T>, ReduceError> {
    run(full, r, opts, method, passive)
}

fn into_passive<T: Real>(result: ReductionResult<T>) -> PassiveReductionResult<T> {
    let passive_residuals = result
        .validation
        .residuals
        .passive
        .expect("passive runs always record passive residuals");
    let overwrite_delta = result
        .validation
        .residuals
        .overwrite_delta
        .unwrap_or(T::zero());
    PassiveReductionResult {
        result,
        passive_residuals,
        overwrite_delta,
    }
}

fn check_input<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    passive: bool,
) -> Result<(), ReduceError> {
    if r == 0 || r >= full.n() {
        return Err(ReduceError::Order { r, n: full.n() });
    }
    let tol = T::lit(INPUT_TOL) * full.block_scale();
    if passive {
        // unequal input and output field counts cannot be passive at all
        let residual = full
            .passive_residuals()
            .map_or(f64::INFINITY, |p| p.max().as_f64());
        if !(residual <= tol.as_f64()) {
            return Err(ReduceError::NotPassive { residual });
        }
    }
    let res = full.realizability_residuals().max();
    if !(res <= tol) {
        return Err(ReduceError::NotRealizable {
            residual: res.as_f64(),
        });
    }
    let abscissa = spectral_abscissa(full.a());
    if !(abscissa < -default_stability_margin(full.a())) {
        return Err(ReduceError::Unstable {
            abscissa: abscissa.as_f64(),
        });
    }
    Ok(())
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::with_capacity(r), &mut out);
    out
}

struct Scaled<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
    /// `J_scaled = J / rate`
    rate: T,
}

fn run<T: Real>(
    full: &QuantumLinearSystem<T>,
    r: usize,
    opts: &ReduceOptions<T>,
    method: Method,
    passive: bool,
) -> Result<ReductionResult<T>, ReduceError> {
    let started = Instant::now();
    check_input(full, r, passive)?;
    let n = full.n();

    // rates are normalized so that the spectral radius is 1
    let rate = spectral_radius(full.a()).max(T::lit(1e-300));
    let scaled = Scaled {
        a: full.a() / rate,
        b: full.b() / rate.sqrt(),
        c: full.c() / rate.sqrt(),
        rate,
    };
    let geometry = if passive {
        Geometry::Orthogonal {
            commuting: full.is_phase_symmetric(T::lit(1e-12) * full.block_scale()),
        }
    } else {
        Geometry::Symplectic
    };
    let refiner = Refiner {
        a: &scaled.a,
        b: &scaled.b,
        c: &scaled.c,
        geometry,
    };

    let mut cands: Vec<(Vec<usize>, Option<T>)> = combinations(n, r)
        .into_iter()
        .map(|modes| {
            let score = refiner.evaluate(&mode_selector(n, &modes)).map(|(v, _)| v);
            (modes, score)
        })
        .collect();
    cands.sort_by(|x, y| match (x.1, y.1) {
        (Some(a), Some(b)) => a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    if let Some(limit) = opts.max_candidates {
        cands.truncate(limit.max(1));
    }

    let mut traces = Vec::with_capacity(cands.len());
    let mut best: Option<(usize, RefineOutcome<T>, Vec<TraceRow>)> = None;
    for (idx, (modes, score)) in cands.iter().enumerate() {
        let mut ct = CandidateTrace {
            modes: modes.clone(),
            truncation_h2: score.map(|v| (v * rate).max(T::zero()).sqrt().as_f64()),
            ..Default::default()
        };
        let (outcome, ap_rows) = run_candidate(
            &scaled, &refiner, modes, r, method, passive, opts, idx, &mut ct,
        );
        debug!(
            "candidate {:?}: truncation {:?}, refined {:?}",
            modes,
            ct.truncation_h2,
            ct.best_h2()
        );
        if let Some(out) = outcome {
            if best.as_ref().map_or(true, |(_, b, _)| out.value < b.value) {
                best = Some((idx, out, ap_rows));
            }
        }
        traces.push(ct);
    }
    let Some((chosen, outcome, ap_trace)) = best else {
        let notes: Vec<String> = traces.iter().flat_map(|t| t.notes.clone()).collect();
        return Err(ReduceError::NoCandidate(notes.join("; ")));
    };

    let pair = match geometry {
        Geometry::Symplectic => symplectic_normalize(&outcome.t),
        Geometry::Orthogonal { .. } => polar_normalize(&outcome.t),
    }
    .ok_or(ReduceError::SingularBlock {
        which: "T G Tᵀ",
        condition: f64::INFINITY,
    })?;
    let mut reduced = pair.apply(full)?;
    let mut overwrite_delta = None;
    if passive {
        let (ar, br, cr, dr) = reduced.clone().into_parts();
        let forced = -cr.transpose();
        overwrite_delta = Some((&br - &forced).norm());
        reduced = QuantumLinearSystem::new(r, full.m(), full.l(), ar, forced, cr, dr)?;
    }
    let validation =
        validate_reduction(full, &reduced, Some(&pair), passive, overwrite_delta, opts);
    let certified = validation.passed();
    if certified {
        info!(
            "certified reduction: H2 error {:?}",
            validation.h2.map(|h| h.norm.as_f64())
        );
    } else {
        warn!(
            "reduction not certified: {}",
            validation
                .failures()
                .iter()
                .map(|c| c.name)
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(ReductionResult {
        reduced,
        projection: pair,
        gamma: validation.gamma,
        h2_error: validation.h2.map(|h| h.norm),
        certified,
        validation,
        trace: SolveTrace {
            method,
            candidates: traces,
            chosen,
            ap_trace,
            elapsed_ms: started.elapsed().as_millis(),
        },
        passive,
    })
}

fn max_norm<T: Real>(ms: &[&DMatrix<T>]) -> T {
    ms.iter().fold(T::zero(), |a, m| a.max(m.norm()))
}

#[allow(clippy::too_many_arguments)]
fn run_candidate<T: Real>(
    s: &Scaled<T>,
    refiner: &Refiner<T>,
    modes: &[usize],
    r: usize,
    method: Method,
    passive: bool,
    opts: &ReduceOptions<T>,
    index: usize,
    ct: &mut CandidateTrace,
) -> (Option<RefineOutcome<T>>, Vec<TraceRow>) {
    let n = s.a.nrows() / 2;
    let (nn, k) = (2 * n, 2 * r);
    let mut order = modes.to_vec();
    order.extend((0..n).filter(|i| !modes.contains(i)));
    let perm = mode_permutation::<T>(n, &order);
    let (pa, pb, pc) = (
        &perm * &s.a * perm.transpose(),
        &perm * &s.b,
        &s.c * perm.transpose(),
    );
    let kind = if passive {
        LiftingKind::Commuting
    } else {
        LiftingKind::Symplectic
    };

    let problem = assemble((&pa, &pb, &pc), r, opts.eps, method, kind);
    let warm: Option<WarmStart<T>> = match lmi_warm_start(&problem) {
        Ok(w) => Some(w),
        Err(e) => {
            ct.notes.push(format!("warm-start LMI: {e}"));
            match gramian_warm_start((&pa, &pb, &pc), r, method, T::lit(1e-6)) {
                Ok(w) => Some(w),
                Err(e) => {
                    ct.notes.push(format!("Gramian start: {e}"));
                    None
                }
            }
        }
    };

    let mut lifted_t = None;
    let mut ap_rows = Vec::new();
    if let Some(w) = warm {
        ct.warm_source = Some(w.source.name());
        ct.lmi_gamma2 = w.lmi_gamma2.map(|g| (g * s.rate).as_f64());
        match lifted_projection(&w, &pb, &pc, nn, k, method, kind, opts, index, ct) {
            Some((t_hat, rows)) => {
                lifted_t = Some(t_hat * &perm);
                ap_rows = rows;
            }
            None => ct.notes.push("lifted recovery failed".into()),
        }
    }

    let to_h2 = |o: &RefineOutcome<T>| (o.value * s.rate).max(T::zero()).sqrt().as_f64();
    let mut best: Option<RefineOutcome<T>> = None;
    if let Some(t) = lifted_t {
        match refiner.run(&t, opts.refine_iter) {
            Some(o) => {
                ct.lifted_h2 = Some(to_h2(&o));
                best = Some(o);
            }
            None => ct
                .notes
                .push("refinement from the lifted start left the stable set".into()),
        }
    }
    let mut start = mode_selector(n, modes);
    if refiner.evaluate(&start).is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6d69_7865 ^ (index as u64) << 32);
        let mut found: Option<(T, DMatrix<T>)> = None;
        for _ in 0..MIXED_DRAWS {
            let t = mixed_start::<T>(n, modes, &mut rng);
            if let Some((v, _)) = refiner.evaluate(&t) {
                if found.as_ref().map_or(true, |(b, _)| v < *b) {
                    found = Some((v, t));
                }
            }
        }
        match found {
            Some((_, t)) => {
                ct.notes.push(
                    "selected modes are unstable on their own; started from a mixed selection"
                        .into(),
                );
                start = t;
            }
            None => ct.notes.push(format!(
                "no stable start among {MIXED_DRAWS} mixed selections"
            )),
        }
    }
    if let Some(o) = refiner.run(&start, opts.refine_iter) {
        ct.selector_h2 = Some(to_h2(&o));
        if best.as_ref().map_or(true, |b| o.value < b.value) {
            best = Some(o);
        }
    }
    if let Some(b) = &best {
        ct.refine_iterations = b.iterations;
        ct.stationarity = Some((b.grad_norm / b.value.abs().max(T::lit(1e-300))).as_f64());
    }
    (best, ap_rows)
}

/// `S·U` for the mode selector `S` and the real form `U` of a random unitary.
/// `U` is orthogonal and commutes with 𝕁, so it is symplectic and keeps
/// phase-symmetric structure intact.
fn mixed_start<T: Real>(n: usize, modes: &[usize], rng: &mut ChaCha8Rng) -> DMatrix<T> {
    let mut gauss = || -> T { T::lit(StandardNormal.sample(&mut *rng)) };
    let z = DMatrix::from_fn(n, n, |_, _| Complex::new(gauss(), gauss()));
    mode_selector::<T>(n, modes) * complex_to_real_blocks(&z.qr().q())
}

/// Runs the rank-constrained projection from the warm start and returns the
/// recovered `T` (in the permuted coordinates) with the iteration trace.
#[allow(clippy::too_many_arguments)]
fn lifted_projection<T: Real>(
    w: &WarmStart<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    nn: usize,
    k: usize,
    method: Method,
    kind: LiftingKind,
    opts: &ReduceOptions<T>,
    index: usize,
    ct: &mut CandidateTrace,
) -> Option<(DMatrix<T>, Vec<TraceRow>)> {
    let structured = w.m.is_some();
    let layout = LiftingLayout::new(kind, nn, k, structured);
    let unit = T::one() / max_norm(&[&w.x1, &w.x2, &w.x3]).max(T::lit(1e-300));
    let (b2, c2) = (b.clone(), c.clone());
    let lp = layout.problem::<T>().with_objective(move |z| {
        let blocks = layout.recover(z);
        match method {
            Method::QForm => {
                (b2.transpose() * (&blocks.q1 + &blocks.m * T::lit(3.0)) * &b2).trace()
            }
            Method::PForm => (&c2 * (&blocks.q1 - &blocks.m) * c2.transpose()).trace(),
        }
    });
    let m = w.m.as_ref().map(|m| m * unit);
    let (_, z_start) = layout.heuristic_start(
        &(&w.x1 * unit),
        &(&w.x2 * unit),
        &(&w.x3 * unit),
        m.as_ref(),
    )?;
    let ropts = RankOptions {
        max_iter: opts.max_iter,
        tol: opts.tol_eq,
        stagnation_window: 50,
        dykstra: opts.dykstra,
    };
    let mut rng =
        ChaCha8Rng::seed_from_u64(opts.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut z0 = z_start.clone();
    for attempt in 0..=opts.jitter_attempts {
        let sol = rank_projection_solve(&lp, &z0, &ropts);
        ct.ap_iterations += sol.iterations;
        ct.ap_converged = sol.converged;
        ct.ap_stagnated = sol.stagnated;
        ct.ap_residual = Some(sol.residual.as_f64());
        ct.ap_rank_gap = Some(sol.rank_gap.as_f64());
        let blocks = layout.recover(&sol.z);
        let cond3 = condition(&blocks.q3);
        if cond3 <= T::lit(CONDITION_LIMIT) {
            let pair = recover_pair(&blocks.q1, &blocks.q2, &blocks.q3, method).ok()?;
            ct.raw_tv = Some(pair.tv_residual().as_f64());
            ct.raw_structure = Some(match kind {
                LiftingKind::Symplectic => pair.intertwining_residual().as_f64(),
                LiftingKind::Commuting => pair.symmetry_residual().as_f64(),
            });
            return Some((pair.t, sol.trace));
        }
        if attempt == opts.jitter_attempts {
            ct.notes.push(format!(
                "third Gramian block stays ill-conditioned ({:e})",
                cond3.as_f64()
            ));
            break;
        }
        ct.jitters += 1;
        let noise_scale = T::lit(1e-3) * z_start.norm() / T::lit(z_start.nrows() as f64);
        let noise = DMatrix::from_fn(z_start.nrows(), z_start.ncols(), |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            T::lit(g)
        });
        z0 = &z_start + (&noise + noise.transpose()) * (noise_scale * T::lit(0.5));
    }
    None
}

/// `T̂ = X̂₃⁻¹X̂₂ᵀ, V̂ = X̂₁⁻¹X̂₂` on the observability side and
/// `T̃ = X̂₂ᵀX̂₁⁻¹, Ṽ = X̂₂X̂₃⁻¹` on the controllability side.
pub(crate) fn recover_pair<T: Real>(
    x1: &DMatrix<T>,
    x2: &DMatrix<T>,
    x3: &DMatrix<T>,
    method: Method,
) -> Result<ProjectionPair<T>, ReduceError> {
    let x1_inv = checked_inverse(x1, "X1")?;
    let x3_inv = checked_inverse(x3, "X3")?;
    Ok(match method {
        Method::QForm => ProjectionPair::new(&x3_inv * x2.transpose(), x1_inv * x2),
        Method::PForm => ProjectionPair::new(x2.transpose() * x1_inv, x2 * x3_inv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(4, 1).len(), 4);
    }
}
