//! The canonical symplectic form 𝕁_k = I_k ⊗ [[0, 1], [-1, 0]].

use nalgebra::DMatrix;

use crate::Real;

/// Symplectic form on `k` modes (matrix size `2k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    k: usize,
}

impl SymplecticForm {
    pub fn new(k: usize) -> Self {
        SymplecticForm { k }
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.k
    }

    /// Matrix dimension `2k`.
    pub fn dim(&self) -> usize {
        2 * self.k
    }

    pub fn matrix<T: Real>(&self) -> DMatrix<T> {
        symplectic(self.k)
    }
}

/// Dense `2k x 2k` symplectic form.
pub fn symplectic<T: Real>(k: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(2 * i, 2 * i + 1)] = T::one();
        j[(2 * i + 1, 2 * i)] = -T::one();
    }
    j
}

/// `X 𝕁` for `X` with an even number of columns, without a matrix product.
pub fn mul_j_right<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    assert!(x.ncols() % 2 == 0, "column count must be even");
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for p in 0..x.ncols() / 2 {
        // column 2p of X𝕁 is -x_{2p+1}, column 2p+1 is x_{2p}
        out.column_mut(2 * p).copy_from(&(-x.column(2 * p + 1)));
        out.column_mut(2 * p + 1).copy_from(&x.column(2 * p));
    }
    out
}

/// `𝕁 X` for `X` with an even number of rows.
pub fn mul_j_left<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    assert!(x.nrows() % 2 == 0, "row count must be even");
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for p in 0..x.nrows() / 2 {
        out.row_mut(2 * p).copy_from(&x.row(2 * p + 1));
        out.row_mut(2 * p + 1).copy_from(&(-x.row(2 * p)));
    }
    out
}

/// True when `S 𝕁 Sᵀ = 𝕁` to the given absolute tolerance.
pub fn is_symplectic<T: Real>(s: &DMatrix<T>, tol: T) -> bool {
    if !s.is_square() || s.nrows() % 2 != 0 {
        return false;
    }
    let j = symplectic::<T>(s.nrows() / 2);
    (s * &j * s.transpose() - j).norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode() {
        let j = symplectic::<f64>(1);
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn fast_products_match_dense() {
        let x = DMatrix::from_fn(4, 6, |i, j| (i * 7 + j * 3) as f64 - 5.0);
        assert_eq!(mul_j_right(&x), &x * symplectic::<f64>(3));
        let y = x.transpose();
        assert_eq!(mul_j_left(&y), symplectic::<f64>(3) * &y);
    }

    #[test]
    fn form_struct() {
        let f = SymplecticForm::new(3);
        assert_eq!(f.dim(), 6);
        assert!(is_symplectic(&f.matrix::<f64>(), 0.0));
    }
}
