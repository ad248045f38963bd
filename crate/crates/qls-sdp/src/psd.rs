use nalgebra::{DMatrix, SymmetricEigen};
use qls_core::Real;

fn symmetrize<T: Real>(s: &DMatrix<T>) -> DMatrix<T> {
    (s + s.transpose()) * T::lit(0.5)
}

/// Frobenius-nearest positive semidefinite matrix (eigenvalues clipped at 0).
pub fn psd_project<T: Real>(s: &DMatrix<T>) -> DMatrix<T> {
    let eig = SymmetricEigen::new(symmetrize(s));
    let vals = eig.eigenvalues.map(|v| v.max(T::zero()));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Result of projecting onto `{Z ⪰ 0, rank Z ≤ k}`.
#[derive(Debug, Clone)]
pub struct RankProjection<T: Real> {
    pub z: DMatrix<T>,
    /// Factor `F` with `z = F Fᵀ` (`dim × k`).
    pub factor: DMatrix<T>,
    /// Eigenvalues of the input in descending order.
    pub spectrum: Vec<T>,
}

impl<T: Real> RankProjection<T> {
    /// `max(λ_{k+1}, 0) / λ_1` of the input.
    pub fn rank_gap(&self, k: usize) -> T {
        let top = self.spectrum.first().copied().unwrap_or(T::zero());
        if top <= T::zero() || k >= self.spectrum.len() {
            return T::zero();
        }
        self.spectrum[k].max(T::zero()) / top
    }
}

/// Keeps the `k` largest eigenpairs, clipped at 0.
pub fn rank_project<T: Real>(s: &DMatrix<T>, k: usize) -> RankProjection<T> {
    let eig = SymmetricEigen::new(symmetrize(s));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite spectrum")
    });
    let spectrum: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let k = k.min(order.len());
    let mut factor = DMatrix::zeros(s.nrows(), k);
    for (c, &i) in order.iter().take(k).enumerate() {
        let lam = eig.eigenvalues[i].max(T::zero()).sqrt();
        factor
            .column_mut(c)
            .copy_from(&(eig.eigenvectors.column(i) * lam));
    }
    let z = &factor * factor.transpose();
    RankProjection {
        z,
        factor,
        spectrum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clips_negative() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(
            psd_project(&s),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn rank_one() {
        let v = nalgebra::DVector::from_vec(vec![1.0f64, 2.0, 2.0]);
        let z = &v * v.transpose() + DMatrix::identity(3, 3) * 1e-3;
        let p = rank_project(&z, 1);
        assert!((&p.z - &v * v.transpose()).norm() < 1e-2);
        assert!((p.rank_gap(1) - 1e-3 / 9.001).abs() < 1e-9);
    }
}
