//! Quasi-Newton descent of the H2 error over the row space of `T`.
//!
//! For `G = TΩTᵀ` and `V = ΩTᵀG⁻¹` the model `(TAV, TB, CV)` depends only on the
//! row space of `T` up to a change of basis, so the error is a smooth function
//! on the Grassmannian. `Ω = 𝕁_n` gives symplectic projections; `Ω = I` gives
//! orthogonal ones for passive systems.

use std::collections::VecDeque;

use log::trace;
use nalgebra::DMatrix;
use qls_core::spectrum::spectral_abscissa;
use qls_core::symplectic::{mul_j_left, mul_j_right};
use qls_core::Real;

use crate::normalize::{commuting_part, polar_normalize, symplectic_normalize};
use crate::projection::h2_objective_gradient;

const MEMORY: usize = 12;
const RENORMALIZE_EVERY: usize = 40;
/// The error can keep decreasing as a reduced mode decouples and its damping
/// vanishes; iterates must keep this relative distance from the imaginary axis.
const STABILITY_MARGIN: f64 = 1e-7;
/// Largest `‖TTᵀ − I‖` accepted after re-projecting a passive iterate.
const COMMUTING_DRIFT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Geometry {
    Symplectic,
    Orthogonal { commuting: bool },
}

pub(crate) struct Refiner<'s, T: Real> {
    pub a: &'s DMatrix<T>,
    pub b: &'s DMatrix<T>,
    pub c: &'s DMatrix<T>,
    pub geometry: Geometry,
}

#[derive(Debug, Clone)]
pub(crate) struct RefineOutcome<T: Real> {
    pub t: DMatrix<T>,
    pub value: T,
    pub iterations: usize,
    pub grad_norm: T,
}

impl<T: Real> Refiner<'_, T> {
    fn omega_right(&self, x: &DMatrix<T>) -> DMatrix<T> {
        match self.geometry {
            Geometry::Symplectic => mul_j_right(x),
            Geometry::Orthogonal { .. } => x.clone(),
        }
    }

    fn omega_left(&self, x: &DMatrix<T>) -> DMatrix<T> {
        match self.geometry {
            Geometry::Symplectic => mul_j_left(x),
            Geometry::Orthogonal { .. } => x.clone(),
        }
    }

    fn restrict(&self, x: DMatrix<T>) -> DMatrix<T> {
        match self.geometry {
            Geometry::Orthogonal { commuting: true } => commuting_part(&x),
            _ => x,
        }
    }

    pub fn normalize(&self, t: &DMatrix<T>) -> Option<DMatrix<T>> {
        match self.geometry {
            Geometry::Symplectic => Some(symplectic_normalize(t)?.t),
            Geometry::Orthogonal { commuting: false } => Some(polar_normalize(t)?.t),
            Geometry::Orthogonal { commuting: true } => {
                // Near rank deficiency the polar factor amplifies round-off out of
                // the commuting set, and the descent never returns to it.
                let t = commuting_part(&polar_normalize(t)?.t);
                let k = t.nrows();
                let drift = (&t * t.transpose() - DMatrix::identity(k, k)).norm();
                (drift <= T::lit(COMMUTING_DRIFT)).then_some(t)
            }
        }
    }

    /// `J(T)` and `∇_T J`, or `None` when the reduced model is not Hurwitz with
    /// the relative margin above.
    pub fn evaluate(&self, t: &DMatrix<T>) -> Option<(T, DMatrix<T>)> {
        let g = self.omega_right(t) * t.transpose();
        let g_inv = g.try_inverse()?;
        let v = self.omega_left(&t.transpose()) * &g_inv;
        let ar = t * self.a * &v;
        if !(spectral_abscissa(&ar) < -T::lit(STABILITY_MARGIN) * ar.norm()) {
            return None;
        }
        let br = t * self.b;
        let cr = self.c * &v;
        let hg = h2_objective_gradient((self.a, self.b, self.c), (&ar, &br, &cr)).ok()?;
        let (ga, gb, gc) = (&hg.grad_a, &hg.grad_b, &hg.grad_c);
        // d/dV of tr(gAᵀ T A V) + tr(gCᵀ C V)
        let h = self.a.transpose() * t.transpose() * ga + self.c.transpose() * gc;
        let h_omega = self.omega_right(&h.transpose());
        let y = &g_inv * &h_omega * t.transpose() * &g_inv;
        // Ωᵀ = −Ω for 𝕁, Ω for the identity
        let omega_t = |x: &DMatrix<T>| match self.geometry {
            Geometry::Symplectic => -mul_j_right(x),
            Geometry::Orthogonal { .. } => x.clone(),
        };
        let grad =
            ga * v.transpose() * self.a.transpose() + gb * self.b.transpose() + &g_inv * &h_omega
                - omega_t(&(y.transpose() * t))
                - self.omega_right(&(&y * t));
        if !hg.value.is_finite() || grad.iter().any(|x| !x.is_finite()) {
            return None;
        }
        Some((hg.value, self.restrict(grad)))
    }

    /// Limited-memory BFGS with Armijo backtracking; the iterate is
    /// re-normalized (and the memory cleared) every few dozen steps.
    pub fn run(&self, t0: &DMatrix<T>, max_iter: usize) -> Option<RefineOutcome<T>> {
        let mut t = self.normalize(&self.restrict(t0.clone()))?;
        let (mut f, mut g) = self.evaluate(&t)?;
        let mut mem: VecDeque<(DMatrix<T>, DMatrix<T>, T)> = VecDeque::new();
        let mut quiet = 0;
        let mut iterations = 0;
        for it in 0..max_iter {
            iterations = it + 1;
            if it > 0 && it % RENORMALIZE_EVERY == 0 {
                if let Some(tn) = self.normalize(&t) {
                    if let Some((fn_, gn)) = self.evaluate(&tn) {
                        t = tn;
                        f = fn_;
                        g = gn;
                        mem.clear();
                    }
                }
            }
            let gnorm = g.norm();
            if gnorm <= T::lit(1e-12) * T::one().max(f.abs()) * T::one().max(t.norm()) {
                break;
            }
            // two-loop recursion
            let mut q = g.clone();
            let mut alphas = Vec::with_capacity(mem.len());
            for (s, y, rho) in mem.iter().rev() {
                let a = *rho * s.dot(&q);
                q -= y * a;
                alphas.push(a);
            }
            if let Some((s, y, _)) = mem.back() {
                q *= s.dot(y) / y.dot(y);
            } else {
                q *= T::one() / gnorm.max(T::lit(1e-300)) * T::lit(1e-2) * T::one().max(t.norm());
            }
            for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
                let b = *rho * y.dot(&q);
                q += s * (*a - b);
            }
            let mut dir = -q;
            let mut slope = g.dot(&dir);
            if !(slope < T::zero()) {
                mem.clear();
                dir = -&g * (T::lit(1e-2) * T::one().max(t.norm()) / gnorm);
                slope = g.dot(&dir);
            }
            let mut step = T::one();
            let mut accepted = None;
            for _ in 0..50 {
                let trial = &t + &dir * step;
                if let Some((ft, gt)) = self.evaluate(&trial) {
                    if ft <= f + T::lit(1e-4) * step * slope {
                        accepted = Some((trial, ft, gt));
                        break;
                    }
                }
                step *= T::lit(0.5);
            }
            let Some((tn, fn_, gn)) = accepted else {
                if mem.is_empty() {
                    break;
                }
                mem.clear();
                continue;
            };
            let s = &tn - &t;
            let y = &gn - &g;
            let sy = s.dot(&y);
            if sy > T::lit(1e-14) * s.norm() * y.norm() {
                mem.push_back((s, y, T::one() / sy));
                if mem.len() > MEMORY {
                    mem.pop_front();
                }
            }
            let gain = f - fn_;
            t = tn;
            f = fn_;
            g = gn;
            if gain <= T::lit(1e-15) * T::one().max(f.abs()) {
                quiet += 1;
                if quiet >= 8 {
                    break;
                }
            } else {
                quiet = 0;
            }
            trace!("refine step {it}: J = {f:e}, |g| = {:e}", g.norm());
        }
        let t = self.normalize(&t).unwrap_or(t);
        let (value, grad) = self.evaluate(&t)?;
        Some(RefineOutcome {
            t,
            value,
            iterations,
            grad_norm: grad.norm(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qls_core::example_optomech_default;

    #[test]
    fn gradient_matches_finite_differences() {
        let s = example_optomech_default::<f64>();
        let sc = qls_core::spectrum::spectral_radius(s.a());
        let (a, b, c) = (s.a() / sc, s.b() / sc.sqrt(), s.c() / sc.sqrt());
        for geometry in [
            Geometry::Symplectic,
            Geometry::Orthogonal { commuting: false },
        ] {
            let r = Refiner {
                a: &a,
                b: &b,
                c: &c,
                geometry,
            };
            let mut t = DMatrix::<f64>::zeros(4, 6);
            for i in 0..4 {
                t[(i, i + 2)] = 1.0;
            }
            t[(0, 0)] = 0.05;
            t[(3, 1)] = -0.04;
            let (f0, g) = r.evaluate(&t).unwrap();
            let h = 1e-6;
            for (i, j) in [(0, 0), (1, 3), (2, 5), (3, 1)] {
                let mut tp = t.clone();
                tp[(i, j)] += h;
                let mut tm = t.clone();
                tm[(i, j)] -= h;
                let fd = (r.evaluate(&tp).unwrap().0 - r.evaluate(&tm).unwrap().0) / (2.0 * h);
                assert!(
                    (fd - g[(i, j)]).abs() <= 1e-5 * (1.0 + f0.abs()),
                    "{geometry:?} ({i},{j}): {fd} vs {}",
                    g[(i, j)]
                );
            }
        }
    }
}
