//! Log-det barrier interior-point method with a phase-I feasibility search.

use log::debug;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use qls_core::Real;

use crate::error::SdpError;
use crate::lmi::{Compiled, ConstraintSense, LmiProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions<T> {
    /// Stop when the duality-gap bound `m/t` falls below `gap_tol · max(1, |objective|)`.
    pub gap_tol: T,
    /// Barrier parameter growth per outer iteration.
    pub mu: T,
    pub max_newton: usize,
    pub max_outer: usize,
    /// Radius of the ball `‖x‖ < radius` that keeps phase I bounded.
    pub radius: T,
}

impl<T: Real> Default for BarrierOptions<T> {
    fn default() -> Self {
        BarrierOptions {
            gap_tol: T::lit(1e-8),
            mu: T::lit(20.0),
            max_newton: 200,
            max_outer: 80,
            radius: T::lit(1e8),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmiSolution<T: Real> {
    pub x: DVector<T>,
    pub objective: T,
    /// Independently recomputed margin of each constraint (`−λ_max` for `⪯`, `λ_min` for `⪰`).
    pub margins: Vec<(String, T)>,
    pub newton_steps: usize,
}

/// Constraints `F_k(y) = F0 + Σ yᵢ Fᵢ ≻ 0` on `y = (x, s?)`; when `shift` is
/// set the last coordinate `s` is added on the diagonal of every block.
struct Barrier<'c, T: Real> {
    cons: &'c [Compiled<T>],
    nx: usize,
    shift: bool,
    radius2: T,
    /// per constraint: indices of nonzero Fᵢ
    active: Vec<Vec<usize>>,
}

impl<'c, T: Real> Barrier<'c, T> {
    fn new(cons: &'c [Compiled<T>], nx: usize, shift: bool, radius: T) -> Self {
        let active = cons
            .iter()
            .map(|c| {
                (0..nx)
                    .filter(|&i| c.fi[i].iter().any(|v| *v != T::zero()))
                    .collect()
            })
            .collect();
        Barrier {
            cons,
            nx,
            shift,
            radius2: radius * radius,
            active,
        }
    }

    fn dim(&self) -> usize {
        self.nx + usize::from(self.shift)
    }

    /// Total barrier degree (sum of block sizes plus the ball).
    fn degree(&self) -> usize {
        self.cons.iter().map(|c| c.f0.nrows()).sum::<usize>() + 1
    }

    fn matrix(&self, k: usize, y: &DVector<T>) -> DMatrix<T> {
        let c = &self.cons[k];
        let mut f = c.f0.clone();
        for &i in &self.active[k] {
            f += &c.fi[i] * y[i];
        }
        if self.shift {
            for d in 0..f.nrows() {
                f[(d, d)] += y[self.nx];
            }
        }
        f
    }

    fn ball(&self, y: &DVector<T>) -> T {
        self.radius2 - y.rows(0, self.nx).norm_squared()
    }

    /// `-Σ log det F_k − log(R² − ‖x‖²)`, or `None` outside the domain.
    fn value(&self, y: &DVector<T>) -> Option<T> {
        let b = self.ball(y);
        if b <= T::zero() {
            return None;
        }
        let mut v = -b.ln();
        for k in 0..self.cons.len() {
            let ch = Cholesky::new(self.matrix(k, y))?;
            let l = ch.l();
            for d in 0..l.nrows() {
                v -= T::lit(2.0) * l[(d, d)].ln();
            }
        }
        Some(v)
    }

    fn grad_hess(&self, y: &DVector<T>) -> Option<(DVector<T>, DMatrix<T>)> {
        let p = self.dim();
        let mut g = DVector::zeros(p);
        let mut h = DMatrix::zeros(p, p);
        for k in 0..self.cons.len() {
            let ch: Cholesky<T, Dyn> = Cholesky::new(self.matrix(k, y))?;
            let l = ch.l();
            let whiten = |m: &DMatrix<T>| -> DMatrix<T> {
                let half = l
                    .solve_lower_triangular(m)
                    .expect("Cholesky factor is nonsingular");
                l.solve_lower_triangular(&half.transpose())
                    .expect("Cholesky factor is nonsingular")
            };
            let mut idx: Vec<usize> = self.active[k].clone();
            let mut mats: Vec<DMatrix<T>> =
                idx.iter().map(|&i| whiten(&self.cons[k].fi[i])).collect();
            if self.shift {
                idx.push(self.nx);
                mats.push(whiten(&DMatrix::identity(l.nrows(), l.nrows())));
            }
            for (a, &i) in idx.iter().enumerate() {
                g[i] -= mats[a].trace();
                for (b, &j) in idx.iter().enumerate().skip(a) {
                    let v = mats[a].dot(&mats[b]);
                    h[(i, j)] += v;
                    if i != j {
                        h[(j, i)] += v;
                    }
                }
            }
        }
        let b = self.ball(y);
        let two = T::lit(2.0);
        for i in 0..self.nx {
            g[i] += two * y[i] / b;
            h[(i, i)] += two / b;
            for j in 0..self.nx {
                h[(i, j)] += T::lit(4.0) * y[i] * y[j] / (b * b);
            }
        }
        Some((g, h))
    }
}

const STALL_WINDOW: usize = 5;
const STALL_REL: f64 = 1e-10;

enum Centering {
    Done,
    /// phase I reached `s < 0`
    Feasible,
}

/// Newton centering of `t·cᵀy + φ(y)`. Returns the number of Newton steps.
fn center<T: Real>(
    bar: &Barrier<T>,
    c: &DVector<T>,
    t: T,
    y: &mut DVector<T>,
    max_newton: usize,
    steps: &mut usize,
) -> Result<Centering, SdpError> {
    let f = |y: &DVector<T>| bar.value(y).map(|v| t * c.dot(y) + v);
    let mut fy =
        f(y).ok_or_else(|| SdpError::Singular("iterate left the barrier domain".into()))?;
    let mut history: Vec<T> = Vec::with_capacity(max_newton);
    for _ in 0..max_newton {
        // ill-conditioned Hessians give linear convergence; stop once the
        // last few steps no longer move f at a meaningful relative level
        history.push(fy);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if old - fy <= T::lit(STALL_REL) * T::one().max(fy.abs()) {
                return Ok(Centering::Done);
            }
        }
        if bar.shift && y[bar.nx] < T::zero() {
            return Ok(Centering::Feasible);
        }
        let (gb, mut h) = bar
            .grad_hess(y)
            .ok_or_else(|| SdpError::Singular("barrier Hessian".into()))?;
        let g = c * t + gb;
        // symmetric diagonal scaling: Q1 entries and the scalar bound can sit
        // many orders of magnitude apart, which ruins an unscaled factorization
        let dscale: DVector<T> = h
            .diagonal()
            .map(|v| T::one() / v.abs().max(T::lit(1e-300)).sqrt());
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                h[(i, j)] *= dscale[i] * dscale[j];
            }
        }
        for d in 0..h.nrows() {
            h[(d, d)] += T::lit(1e-14);
        }
        let hc = Cholesky::new(h.clone()).ok_or_else(|| SdpError::IllConditioned {
            condition: condition_estimate(&h).as_f64(),
        })?;
        let dy = -hc.solve(&g.component_mul(&dscale)).component_mul(&dscale);
        let dec = -g.dot(&dy);
        *steps += 1;
        // below this the decrease is lost in the rounding of f itself
        if dec * T::lit(0.5) <= T::lit(1e-10) + T::lit(1e-13) * fy.abs() {
            return Ok(Centering::Done);
        }
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &*y + &dy * alpha;
            if let Some(ft) = f(&trial) {
                if ft <= fy - T::lit(0.25) * alpha * dec {
                    *y = trial;
                    fy = ft;
                    accepted = true;
                    break;
                }
            }
            alpha *= T::lit(0.5);
        }
        if !accepted {
            return Ok(Centering::Done);
        }
    }
    Ok(Centering::Done)
}

fn condition_estimate<T: Real>(h: &DMatrix<T>) -> T {
    let e = SymmetricEigen::new(h.clone());
    let hi = e.eigenvalues.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let lo = e.eigenvalues.iter().fold(hi, |a, v| a.min(v.abs()));
    if lo == T::zero() {
        T::lit(f64::INFINITY)
    } else {
        hi / lo
    }
}

fn min_eig<T: Real>(m: &DMatrix<T>) -> T {
    SymmetricEigen::new((m + m.transpose()) * T::lit(0.5))
        .eigenvalues
        .iter()
        .fold(T::lit(f64::INFINITY), |a, v| a.min(*v))
}

/// Independently recomputed margins of the raw constraint expressions.
fn margins<T: Real>(problem: &LmiProblem<T>, x: &DVector<T>) -> Vec<(String, T)> {
    problem
        .constraint_meta()
        .into_iter()
        .enumerate()
        .map(|(k, (name, sense))| {
            let e = problem.eval_constraint(k, x);
            let m = match sense {
                ConstraintSense::NegDef => min_eig(&(-e)),
                ConstraintSense::PosDef => min_eig(&e),
            };
            (name, m)
        })
        .collect()
}

/// Minimizes the problem's objective subject to its strict LMIs.
///
/// Phase I minimizes `s` subject to `F_k(x) + sI ≻ 0` from `x = 0`, stopping as
/// soon as `s < 0`; it declares infeasibility once the barrier bound proves
/// `s* > 0`. Phase II follows the central path of the original problem.
pub fn solve_lmi<T: Real>(
    problem: &LmiProblem<T>,
    opts: &BarrierOptions<T>,
) -> Result<LmiSolution<T>, SdpError> {
    let (c, cons) = problem.compile();
    let nx = problem.num_scalars();
    let mut steps = 0;

    let mut x = DVector::zeros(nx);
    let worst = (0..cons.len())
        .map(|k| min_eig(&Barrier::new(&cons, nx, false, opts.radius).matrix(k, &x)));
    let worst = worst.fold(T::lit(f64::INFINITY), |a, v| a.min(v));
    if worst <= T::zero() {
        let bar = Barrier::new(&cons, nx, true, opts.radius);
        let mut y = DVector::zeros(nx + 1);
        y[nx] = T::one() - worst;
        let mut c1 = DVector::zeros(nx + 1);
        c1[nx] = T::one();
        let mut t = T::one();
        let mut found = false;
        for _ in 0..opts.max_outer {
            match center(&bar, &c1, t, &mut y, opts.max_newton, &mut steps)? {
                Centering::Feasible => {
                    found = true;
                    break;
                }
                Centering::Done => {
                    let lower = y[nx] - T::lit(bar.degree() as f64) / t;
                    if lower > T::zero() {
                        break;
                    }
                }
            }
            t *= opts.mu;
        }
        if !found {
            let xs = y.rows(0, nx).into_owned();
            let (name, margin) = margins(problem, &xs)
                .into_iter()
                .map(|(n, m)| (n, m - problem.eps()))
                .fold((String::new(), T::lit(f64::INFINITY)), |acc, (n, m)| {
                    if m < acc.1 {
                        (n, m)
                    } else {
                        acc
                    }
                });
            debug!("phase I failed after {steps} Newton steps, s = {}", y[nx]);
            return Err(SdpError::Infeasible {
                constraint: name,
                margin: margin.as_f64(),
            });
        }
        x = y.rows(0, nx).into_owned();
        debug!("phase I found a strictly feasible point after {steps} Newton steps");
    }

    let bar = Barrier::new(&cons, nx, false, opts.radius);
    let degree = T::lit(bar.degree() as f64);
    let mut t = T::one();
    for _ in 0..opts.max_outer {
        center(&bar, &c, t, &mut x, opts.max_newton, &mut steps)?;
        let obj = c.dot(&x);
        if degree / t <= opts.gap_tol * T::one().max(obj.abs()) {
            break;
        }
        t *= opts.mu;
    }

    let margins = margins(problem, &x);
    let required = problem.eps() * T::lit(0.5);
    for (name, m) in &margins {
        if *m < required {
            return Err(SdpError::Verification {
                constraint: name.clone(),
                margin: m.as_f64(),
                required: required.as_f64(),
            });
        }
    }
    let objective = problem.eval_objective(&x);
    Ok(LmiSolution {
        x,
        objective,
        margins,
        newton_steps: steps,
    })
}
