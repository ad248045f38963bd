use nalgebra::{Complex, DMatrix};
use qls_core::{QuantumLinearSystem, Real};

use crate::error::H2Error;

/// `Ξ(jω)` at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferSample<T: Real> {
    pub omega: T,
    pub value: DMatrix<Complex<T>>,
}

fn complexify<T: Real>(x: &DMatrix<T>) -> DMatrix<Complex<T>> {
    x.map(|v| Complex::new(v, T::zero()))
}

/// `C (sI − A)⁻¹ B + D` through an LU solve.
pub fn transfer_eval_abcd<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: Option<&DMatrix<T>>,
    s: Complex<T>,
) -> Result<DMatrix<Complex<T>>, H2Error> {
    let n = a.nrows();
    let mut m = complexify(a).map(|z| -z);
    for i in 0..n {
        m[(i, i)] += s;
    }
    let lu = m.lu();
    let x = lu.solve(&complexify(b)).ok_or(H2Error::SingularResolvent)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(H2Error::SingularResolvent);
    }
    let mut out = complexify(c) * x;
    if let Some(d) = d {
        out += complexify(d);
    }
    Ok(out)
}

pub fn transfer_eval<T: Real>(
    sys: &QuantumLinearSystem<T>,
    s: Complex<T>,
) -> Result<DMatrix<Complex<T>>, H2Error> {
    transfer_eval_abcd(sys.a(), sys.b(), sys.c(), Some(sys.d()), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_at_dc() {
        let (k, w) = (0.8, 2.0);
        let a = DMatrix::from_row_slice(2, 2, &[-k / 2.0, w, -w, -k / 2.0]);
        let sys = QuantumLinearSystem::new(
            1,
            1,
            1,
            a.clone(),
            DMatrix::identity(2, 2) * -(k as f64).sqrt(),
            DMatrix::identity(2, 2) * (k as f64).sqrt(),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let g = transfer_eval(&sys, Complex::new(0.0, 0.0)).unwrap();
        // (−A)⁻¹ by hand: (−A) = [[k/2, −w], [w, k/2]], det = k²/4 + w²
        let det = k * k / 4.0 + w * w;
        let inv = DMatrix::from_row_slice(2, 2, &[k / 2.0, w, -w, k / 2.0]) / det;
        let want = DMatrix::<f64>::identity(2, 2) - inv * k;
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)].re - want[(i, j)]).abs() < 1e-14);
                assert!(g[(i, j)].im.abs() < 1e-14);
            }
        }
    }
}
