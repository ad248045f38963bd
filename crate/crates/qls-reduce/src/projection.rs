//! Projection pairs `(T, V)`, the Gramian projection formulas, stationarity
//! residuals and the H2 objective gradient.

use nalgebra::DMatrix;
use qls_core::symplectic::{mul_j_left, mul_j_right};
use qls_core::{QuantumLinearSystem, Real};
use qls_linsolve::{gramians, GramianBlocks};

use crate::error::ReduceError;

/// Condition number above which a Gramian block counts as singular.
pub const CONDITION_LIMIT: f64 = 1e10;

/// `T` (`2r × 2n`) and `V` (`2n × 2r`) with `A_r = TAV`, `B_r = TB`, `C_r = CV`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair<T: Real> {
    pub t: DMatrix<T>,
    pub v: DMatrix<T>,
}

impl<T: Real> ProjectionPair<T> {
    pub fn new(t: DMatrix<T>, v: DMatrix<T>) -> Self {
        assert_eq!(t.nrows(), v.ncols());
        assert_eq!(t.ncols(), v.nrows());
        ProjectionPair { t, v }
    }

    /// `‖TV − I‖_F`
    pub fn tv_residual(&self) -> T {
        let k = self.t.nrows();
        (&self.t * &self.v - DMatrix::identity(k, k)).norm()
    }

    /// `‖𝕁_n Tᵀ − V 𝕁_r‖_F`
    pub fn intertwining_residual(&self) -> T {
        (mul_j_left(&self.t.transpose()) - mul_j_right(&self.v)).norm()
    }

    /// `‖T − Vᵀ‖_F`
    pub fn symmetry_residual(&self) -> T {
        (&self.t - self.v.transpose()).norm()
    }

    /// `(TAV, TB, CV, D)`.
    pub fn apply(
        &self,
        full: &QuantumLinearSystem<T>,
    ) -> Result<QuantumLinearSystem<T>, ReduceError> {
        let k = self.t.nrows();
        Ok(QuantumLinearSystem::new(
            k / 2,
            full.m(),
            full.l(),
            &self.t * full.a() * &self.v,
            &self.t * full.b(),
            full.c() * &self.v,
            full.d().clone(),
        )?)
    }
}

/// `(‖TV − I‖_F, ‖T − Vᵀ‖_F)`.
pub fn passive_projection_residuals<T: Real>(t: &DMatrix<T>, v: &DMatrix<T>) -> (T, T) {
    let p = ProjectionPair::new(t.clone(), v.clone());
    (p.tv_residual(), p.symmetry_residual())
}

pub(crate) fn condition<T: Real>(m: &DMatrix<T>) -> T {
    let sv = m.clone().singular_values();
    let hi = sv.iter().fold(T::zero(), |a, v| a.max(*v));
    let lo = sv.iter().fold(hi, |a, v| a.min(*v));
    if lo <= T::zero() {
        T::lit(f64::INFINITY)
    } else {
        hi / lo
    }
}

pub(crate) fn checked_inverse<T: Real>(
    m: &DMatrix<T>,
    which: &'static str,
) -> Result<DMatrix<T>, ReduceError> {
    let cond = condition(m);
    if !(cond <= T::lit(CONDITION_LIMIT)) {
        return Err(ReduceError::SingularBlock {
            which,
            condition: cond.as_f64(),
        });
    }
    m.clone().try_inverse().ok_or(ReduceError::SingularBlock {
        which,
        condition: cond.as_f64(),
    })
}

/// `T = −Q₃⁻¹Q₂ᵀ`, `V = P₂P₃⁻¹` and the candidate `(TAV, TB, CV, D)`.
///
/// This evaluates the stationarity projection at given Gramians; it makes no
/// claim that the candidate is realizable or stable.
pub fn project_from_gramians<T: Real>(
    full: &QuantumLinearSystem<T>,
    gb: &GramianBlocks<T>,
) -> Result<(ProjectionPair<T>, QuantumLinearSystem<T>), ReduceError> {
    // rank-deficient cross blocks make T or V rank-deficient and TV = I impossible
    for (which, x) in [("Q2", gb.q2()), ("P2", gb.p2())] {
        let cond = condition(&x);
        if !(cond <= T::lit(CONDITION_LIMIT)) {
            return Err(ReduceError::SingularBlock {
                which,
                condition: cond.as_f64(),
            });
        }
    }
    let q3_inv = checked_inverse(&gb.q3(), "Q3")?;
    let p3_inv = checked_inverse(&gb.p3(), "P3")?;
    let t = -(q3_inv * gb.q2().transpose());
    let v = gb.p2() * p3_inv;
    let pair = ProjectionPair::new(t, v);
    let reduced = pair.apply(full)?;
    Ok((pair, reduced))
}

/// Stationarity identities of the unconstrained H2 problem, absolute and
/// relative to the size of their two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessaryResiduals<T> {
    /// `‖C_r P₃ − C P₂‖_F`
    pub rho_c: T,
    /// `‖Q₂ᵀB + Q₃B_r‖_F`
    pub rho_b: T,
    /// `‖P₂ᵀQ₂ + P₃Q₃‖_F`
    pub rho_pq: T,
    pub rel_c: T,
    pub rel_b: T,
    pub rel_pq: T,
}

impl<T: Real> NecessaryResiduals<T> {
    pub fn max_relative(&self) -> T {
        self.rel_c.max(self.rel_b).max(self.rel_pq)
    }
}

fn rel<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>) -> (T, T) {
    let abs = (x + y).norm();
    let scale = x.norm() + y.norm();
    (
        abs,
        if scale > T::zero() {
            abs / scale
        } else {
            T::zero()
        },
    )
}

pub fn necessary_condition_residuals<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
    gb: &GramianBlocks<T>,
) -> NecessaryResiduals<T> {
    let (rho_c, rel_c) = rel(&(reduced.c() * gb.p3()), &(-(full.c() * gb.p2())));
    let (rho_b, rel_b) = rel(&(gb.q2().transpose() * full.b()), &(gb.q3() * reduced.b()));
    let (rho_pq, rel_pq) = rel(&(gb.p2().transpose() * gb.q2()), &(gb.p3() * gb.q3()));
    NecessaryResiduals {
        rho_c,
        rho_b,
        rho_pq,
        rel_c,
        rel_b,
        rel_pq,
    }
}

/// `J = ‖Ξ_G − Ξ_{G_r}‖₂²` and its partial derivatives in `A_r`, `B_r`, `C_r`.
#[derive(Debug, Clone)]
pub struct H2Gradient<T: Real> {
    pub value: T,
    pub grad_a: DMatrix<T>,
    pub grad_b: DMatrix<T>,
    pub grad_c: DMatrix<T>,
    pub gramians: GramianBlocks<T>,
}

/// Fails when the augmented system is not Hurwitz.
pub fn h2_objective_gradient<T: Real>(
    (a, b, c): (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    (ar, br, cr): (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
) -> Result<H2Gradient<T>, ReduceError> {
    let (nf, nr) = (a.nrows(), ar.nrows());
    let mut ah = DMatrix::zeros(nf + nr, nf + nr);
    ah.view_mut((0, 0), (nf, nf)).copy_from(a);
    ah.view_mut((nf, nf), (nr, nr)).copy_from(ar);
    let mut bh = DMatrix::zeros(nf + nr, b.ncols());
    bh.view_mut((0, 0), (nf, b.ncols())).copy_from(b);
    bh.view_mut((nf, 0), (nr, b.ncols())).copy_from(br);
    let mut ch = DMatrix::zeros(c.nrows(), nf + nr);
    ch.view_mut((0, 0), (c.nrows(), nf)).copy_from(c);
    ch.view_mut((0, nf), (c.nrows(), nr)).copy_from(&(-cr));
    let gb = gramians(&ah, &bh, &ch, nf)?;
    let value = (bh.transpose() * &gb.q * &bh).trace();
    let two = T::lit(2.0);
    let (p2, p3, q2, q3) = (gb.p2(), gb.p3(), gb.q2(), gb.q3());
    let grad_a = (q2.transpose() * &p2 + &q3 * &p3) * two;
    let grad_b = (q2.transpose() * b + &q3 * br) * two;
    let grad_c = (cr * &p3 - c * &p2) * two;
    Ok(H2Gradient {
        value,
        grad_a,
        grad_b,
        grad_c,
        gramians: gb,
    })
}
