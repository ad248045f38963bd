use nalgebra::DMatrix;
use qls_core::spectrum::spectral_abscissa;
use qls_core::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzReport<T> {
    pub stable: bool,
    /// `max Re λ(A)`
    pub abscissa: T,
}

/// `max Re λ(A) < −margin`.
pub fn is_hurwitz<T: Real>(a: &DMatrix<T>, margin: T) -> HurwitzReport<T> {
    let abscissa = spectral_abscissa(a);
    HurwitzReport {
        stable: abscissa < -margin,
        abscissa,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_not_hurwitz() {
        let r = is_hurwitz(
            &DMatrix::from_row_slice(2, 2, &[0.0f64, 1.0, -1.0, 0.0]),
            0.0,
        );
        assert!(!r.stable);
        assert!(r.abscissa.abs() < 1e-14);
        let r = is_hurwitz(&(-DMatrix::<f64>::identity(3, 3)), 1e-9);
        assert!(r.stable);
        assert_eq!(r.abscissa, -1.0);
    }
}
