use nalgebra::DMatrix;
use qls_core::spectrum::default_stability_margin;
use qls_core::{QuantumLinearSystem, Real};
use qls_linsolve::{is_hurwitz, solve_lyapunov, solve_lyapunov_unchecked, LyapunovError};

use crate::augmented::{build_augmented, AugmentedSystem};
use crate::error::H2Error;

const TRACE_AGREEMENT: f64 = 1e-8;

/// Both trace formulas for `‖Ξ_G − Ξ_{G_r}‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Report<T> {
    /// `tr(B̂ᵀ Q B̂)`
    pub via_b: T,
    /// `tr(Ĉ P Ĉᵀ)`
    pub via_c: T,
    pub squared: T,
    pub norm: T,
}

type Solver<T> = fn(&DMatrix<T>, &DMatrix<T>) -> Result<DMatrix<T>, LyapunovError>;

fn evaluate<T: Real>(aug: &AugmentedSystem<T>, solve: Solver<T>) -> Result<H2Report<T>, H2Error> {
    let (a, b, c) = (&aug.a, &aug.b, &aug.c);
    let p = solve(a, &(b * b.transpose()))?;
    let q = solve(&a.transpose(), &(c.transpose() * c))?;
    let via_b = (b.transpose() * &q * b).trace();
    let via_c = (c * &p * c.transpose()).trace();

    // cancellation floor for error systems whose norm is ~0
    let floor = T::lit(1e-14) * (b.norm_squared() * q.norm() + c.norm_squared() * p.norm());
    let tol = T::lit(TRACE_AGREEMENT) * via_b.abs().max(via_c.abs()) + floor;
    if (via_b - via_c).abs() > tol {
        return Err(H2Error::TraceMismatch {
            via_b: via_b.as_f64(),
            via_c: via_c.as_f64(),
        });
    }
    let squared = ((via_b + via_c) * T::lit(0.5)).max(T::zero());
    Ok(H2Report {
        via_b,
        via_c,
        squared,
        norm: squared.sqrt(),
    })
}

fn require_stable<T: Real>(which: &'static str, a: &DMatrix<T>) -> Result<(), H2Error> {
    let rep = is_hurwitz(a, default_stability_margin(a));
    if rep.stable {
        Ok(())
    } else {
        Err(H2Error::Unstable {
            which,
            abscissa: rep.abscissa.as_f64(),
        })
    }
}

/// `‖Ξ_G − Ξ_{G_r}‖₂` from the augmented Gramians; both systems must be Hurwitz
/// and share `D`.
pub fn h2_norm_gramian<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
) -> Result<H2Report<T>, H2Error> {
    let aug = build_augmented(full, reduced)?;
    require_stable("full", full.a())?;
    require_stable("reduced", reduced.a())?;
    evaluate(&aug, solve_lyapunov)
}

/// Trace formula without the stability precondition. For an unstable reduced
/// model this is the algebraic value of the expression, not an H2 norm (the
/// frequency-domain integral then differs).
pub fn h2_norm_gramian_unchecked<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
) -> Result<H2Report<T>, H2Error> {
    let aug = build_augmented(full, reduced)?;
    evaluate(&aug, solve_lyapunov_unchecked)
}

/// H2 norm of the strictly proper part `C (sI − A)⁻¹ B` of a single system.
pub fn h2_norm_system<T: Real>(sys: &QuantumLinearSystem<T>) -> Result<H2Report<T>, H2Error> {
    require_stable("full", sys.a())?;
    let aug = AugmentedSystem::from_triple(sys.a().clone(), sys.b().clone(), sys.c().clone());
    evaluate(&aug, solve_lyapunov)
}
