use nalgebra::{DMatrix, Schur};
use num_complex::Complex;

use crate::Real;

/// Sweeps per dimension before the Schur iteration is declared stuck.
const SCHUR_SWEEPS: usize = 1000;

/// Eigenvalues of a real square matrix via the real Schur form.
///
/// The matrix is scaled to unit max-entry first. A zero matrix returns zeros
/// directly (the unshifted iteration never deflates it), and a matrix whose
/// iteration does not converge yields NaN entries.
pub fn eigenvalues<T: Real>(a: &DMatrix<T>) -> Vec<Complex<T>> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = a.amax();
    if scale == T::zero() {
        return vec![Complex::new(T::zero(), T::zero()); n];
    }
    if !scale.is_finite() {
        return vec![Complex::new(T::lit(f64::NAN), T::zero()); n];
    }
    match Schur::try_new(a / scale, T::default_epsilon(), SCHUR_SWEEPS * n) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z * scale)
            .collect(),
        None => vec![Complex::new(T::lit(f64::NAN), T::zero()); n],
    }
}

/// `max Re λ(A)`; `-inf` for an empty matrix and NaN when the eigenvalues
/// could not be computed.
pub fn spectral_abscissa<T: Real>(a: &DMatrix<T>) -> T {
    eigenvalues(a)
        .into_iter()
        .map(|z| z.re)
        .fold(T::lit(f64::NEG_INFINITY), |acc, x| {
            if x.partial_cmp(&acc).is_none() {
                T::lit(f64::NAN)
            } else {
                acc.max(x)
            }
        })
}

/// `max |λ(A)|`.
pub fn spectral_radius<T: Real>(a: &DMatrix<T>) -> T {
    eigenvalues(a)
        .into_iter()
        .map(|z| z.re.hypot(z.im))
        .fold(T::zero(), |acc, x| acc.max(x))
}

/// Default Hurwitz margin `1e-9 · max(1, ‖A‖_F)`.
pub fn default_stability_margin<T: Real>(a: &DMatrix<T>) -> T {
    T::lit(1e-9) * T::one().max(a.norm())
}
