//! Warm-start LMIs and the Gramian fallback start.
//!
//! The LMIs are written at the two-block level: with `M = diag(M_r, 0)` the
//! augmented inequality reduces to
//! `[[AᵀQ̂₁+Q̂₁A+CᵀC, AᵀQ̂₁+MA−CᵀC], [·ᵀ, AᵀQ̂₁+Q̂₁A+CᵀC]] ⪯ −εI`
//! and the cost bound to `tr(Bᵀ(Q̂₁ + 3M)B) < γ²`. The controllability side
//! mirrors this with `P̂₁`, `N = diag(N_r, 0)` and `tr(C(P̂₁ − N)Cᵀ) < γ²`.

use nalgebra::{DMatrix, SymmetricEigen};
use qls_core::Real;
use qls_linsolve::gramians;
use qls_sdp::{
    solve_lmi, BarrierOptions, ConstraintSense, LiftingKind, LiftingLayout, LmiProblem, VarId,
};

use crate::error::ReduceError;
use crate::options::Method;

pub(crate) fn pad<T: Real>(m: &DMatrix<T>, rows: usize, cols: usize) -> DMatrix<T> {
    let mut out = DMatrix::zeros(rows, cols);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn sym<T: Real>(m: DMatrix<T>) -> DMatrix<T> {
    (&m + m.transpose()) * T::lit(0.5)
}

/// Warm-start LMI together with the nonlinear equalities that the lifting
/// later enforces.
pub struct WarmStartProblem<T: Real> {
    pub lmi: LmiProblem<'static, T>,
    pub method: Method,
    /// `Q̂₁` or `P̂₁`.
    pub x1: VarId,
    /// `M_r` or `N_r`.
    pub x_r: VarId,
    pub gamma2: VarId,
    /// Coupling structure of the equalities (symplectic or commuting).
    pub layout: LiftingLayout,
}

impl<T: Real> WarmStartProblem<T> {
    /// Scalar unknowns per variable of the full problem, including the
    /// off-diagonal and third blocks that only appear in the equalities.
    pub fn variable_counts(&self) -> Vec<(&'static str, usize)> {
        let (n, k) = (self.layout.full, self.layout.reduced);
        let (x1, x2, x3, xr) = match self.method {
            Method::QForm => ("Q1", "Q2", "Q3", "M_r"),
            Method::PForm => ("P1", "P2", "P3", "N_r"),
        };
        vec![
            (x1, n * (n + 1) / 2),
            (x2, n * k),
            (x3, k * (k + 1) / 2),
            (xr, k * (k + 1) / 2),
            ("gamma2", 1),
        ]
    }
}

pub(crate) fn assemble<T: Real>(
    (a, b, c): (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    r: usize,
    eps: T,
    method: Method,
    kind: LiftingKind,
) -> WarmStartProblem<T> {
    let n = a.nrows();
    let k = 2 * r;
    let mut lmi = LmiProblem::new(eps);
    let x1 = lmi.sym_var(if method == Method::QForm { "Q1" } else { "P1" }, n);
    let x_r = lmi.sym_var(
        if method == Method::QForm {
            "M_r"
        } else {
            "N_r"
        },
        k,
    );
    let gamma2 = lmi.scalar_var("gamma2");
    lmi.constrain("x1_pos", ConstraintSense::PosDef, move |v| v.mat(x1));
    lmi.constrain("xr_pos", ConstraintSense::PosDef, move |v| v.mat(x_r));

    let (a, b, c) = (a.clone(), b.clone(), c.clone());
    let big = move |diag: DMatrix<T>, off: DMatrix<T>| {
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&diag);
        out.view_mut((n, n), (n, n)).copy_from(&diag);
        out.view_mut((0, n), (n, n)).copy_from(&off);
        out.view_mut((n, 0), (n, n)).copy_from(&off.transpose());
        sym(out)
    };
    match method {
        Method::QForm => {
            let (at, ctc) = (a.transpose(), c.transpose() * &c);
            let a2 = a.clone();
            lmi.constrain("augmented_lyapunov", ConstraintSense::NegDef, move |v| {
                let q1 = v.mat(x1);
                let m = pad(&v.mat(x_r), n, n);
                big(&at * &q1 + &q1 * &a2 + &ctc, &at * &q1 + &m * &a2 - &ctc)
            });
            let b2 = b.clone();
            lmi.constrain("cost_bound", ConstraintSense::NegDef, move |v| {
                let m = pad(&v.mat(x_r), n, n);
                let tr = (b2.transpose() * (v.mat(x1) + m * T::lit(3.0)) * &b2).trace();
                DMatrix::from_element(1, 1, tr - v.scalar(gamma2))
            });
        }
        Method::PForm => {
            let (at, bbt) = (a.transpose(), &b * b.transpose());
            let a2 = a.clone();
            lmi.constrain("augmented_lyapunov", ConstraintSense::NegDef, move |v| {
                let p1 = v.mat(x1);
                let nn = pad(&v.mat(x_r), n, n);
                big(&a2 * &p1 + &p1 * &at + &bbt, &a2 * &p1 + &nn * &at + &bbt)
            });
            let c2 = c.clone();
            lmi.constrain("cost_bound", ConstraintSense::NegDef, move |v| {
                let nn = pad(&v.mat(x_r), n, n);
                let tr = (&c2 * (v.mat(x1) - nn) * c2.transpose()).trace();
                DMatrix::from_element(1, 1, tr - v.scalar(gamma2))
            });
        }
    }
    lmi.minimize(move |v| v.scalar(gamma2));
    WarmStartProblem {
        lmi,
        method,
        x1,
        x_r,
        gamma2,
        layout: LiftingLayout::new(kind, n, k, true),
    }
}

/// Observability-side warm start with symplectic coupling.
pub fn assemble_qform_constraints<T: Real>(
    sys: (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    r: usize,
    eps: T,
) -> WarmStartProblem<T> {
    assemble(sys, r, eps, Method::QForm, LiftingKind::Symplectic)
}

/// Controllability-side warm start with symplectic coupling.
pub fn assemble_pform_constraints<T: Real>(
    sys: (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    r: usize,
    eps: T,
) -> WarmStartProblem<T> {
    assemble(sys, r, eps, Method::PForm, LiftingKind::Symplectic)
}

/// Passive variants: same LMIs, commuting coupling.
pub fn assemble_passive_constraints<T: Real>(
    sys: (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    r: usize,
    eps: T,
    method: Method,
) -> WarmStartProblem<T> {
    assemble(sys, r, eps, method, LiftingKind::Commuting)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarmSource {
    Lmi,
    Gramian,
}

impl WarmSource {
    pub fn name(&self) -> &'static str {
        match self {
            WarmSource::Lmi => "lmi",
            WarmSource::Gramian => "gramian",
        }
    }
}

/// Starting blocks `(X̂₁, X̂₂, X̂₃, M)` for the lifting.
#[derive(Debug, Clone)]
pub struct WarmStart<T: Real> {
    pub x1: DMatrix<T>,
    pub x2: DMatrix<T>,
    pub x3: DMatrix<T>,
    /// `diag(M_r, 0)` when the LMI supplied it.
    pub m: Option<DMatrix<T>>,
    pub source: WarmSource,
    /// Optimal `γ²` of the LMI.
    pub lmi_gamma2: Option<T>,
}

/// Solves the warm-start LMI and factors `M_r = LLᵀ` into `X̂₂ = [L; 0]`,
/// `X̂₃ = I`, which meets the embedding `M = X̂₂X̂₃⁻¹X̂₂ᵀ` exactly.
pub fn lmi_warm_start<T: Real>(problem: &WarmStartProblem<T>) -> Result<WarmStart<T>, ReduceError> {
    // a warm start does not need a tightly centered optimum, and on badly
    // conditioned instances each centering converges only linearly
    let barrier = BarrierOptions {
        max_newton: 50,
        ..BarrierOptions::default()
    };
    let sol = solve_lmi(&problem.lmi, &barrier)?;
    let vals = problem.lmi.values(&sol.x);
    let x1 = vals.mat(problem.x1);
    let xr = vals.mat(problem.x_r);
    let (n, k) = (problem.layout.full, problem.layout.reduced);
    let eig = SymmetricEigen::new(xr.clone());
    let root = eig.eigenvalues.map(|v| v.max(T::zero()).sqrt());
    let l = &eig.eigenvectors * DMatrix::from_diagonal(&root);
    Ok(WarmStart {
        x1,
        x2: pad(&l, n, k),
        x3: DMatrix::identity(k, k),
        m: Some(pad(&xr, n, n)),
        source: WarmSource::Lmi,
        lmi_gamma2: Some(vals.scalar(problem.gamma2)),
    })
}

/// Augmented Gramians of the truncation to the leading `r` modes, shifted by
/// `shift·I` on the diagonal blocks. The observability cross block is negated
/// so that `X̂₃⁻¹X̂₂ᵀ` selects the truncation.
pub fn gramian_warm_start<T: Real>(
    (a, b, c): (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    r: usize,
    method: Method,
    shift: T,
) -> Result<WarmStart<T>, ReduceError> {
    let (n, k) = (a.nrows(), 2 * r);
    let ar = a.view((0, 0), (k, k)).into_owned();
    let br = b.rows(0, k).into_owned();
    let cr = c.columns(0, k).into_owned();
    let mut ah = DMatrix::zeros(n + k, n + k);
    ah.view_mut((0, 0), (n, n)).copy_from(a);
    ah.view_mut((n, n), (k, k)).copy_from(&ar);
    let mut bh = DMatrix::zeros(n + k, b.ncols());
    bh.view_mut((0, 0), (n, b.ncols())).copy_from(b);
    bh.view_mut((n, 0), (k, b.ncols())).copy_from(&br);
    let mut ch = DMatrix::zeros(c.nrows(), n + k);
    ch.view_mut((0, 0), (c.nrows(), n)).copy_from(c);
    ch.view_mut((0, n), (c.nrows(), k)).copy_from(&(-cr));
    let gb = gramians(&ah, &bh, &ch, n)?;
    let (x1, x2, x3) = match method {
        Method::QForm => (gb.q1(), -gb.q2(), gb.q3()),
        Method::PForm => (gb.p1(), gb.p2(), gb.p3()),
    };
    let s1 = shift * T::one().max(x1.norm());
    let s3 = shift * T::one().max(x3.norm());
    Ok(WarmStart {
        x1: x1 + DMatrix::identity(n, n) * s1,
        x2,
        x3: x3 + DMatrix::identity(k, k) * s3,
        m: None,
        source: WarmSource::Gramian,
        lmi_gamma2: None,
    })
}
