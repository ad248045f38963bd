//! Bringing a row space `T` to a canonical projection pair.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qls_core::symplectic::{mul_j_left, mul_j_right};
use qls_core::Real;

use crate::projection::ProjectionPair;

/// `L` with `L G Lᵀ = 𝕁_r` for a nonsingular skew-symmetric `G`, by symplectic
/// Gram–Schmidt with pivoting on the largest pairing.
pub fn skew_normalizer<T: Real>(g: &DMatrix<T>) -> Option<DMatrix<T>> {
    let k = g.nrows();
    if k % 2 != 0 {
        return None;
    }
    let floor = T::lit(1e-12) * T::one().max(g.norm());
    let form = |x: &DVector<T>, y: &DVector<T>| (x.transpose() * g * y)[(0, 0)];
    let mut pool: Vec<DVector<T>> = (0..k)
        .map(|i| DVector::from_fn(k, |j, _| if i == j { T::one() } else { T::zero() }))
        .collect();
    let mut rows: Vec<DVector<T>> = Vec::with_capacity(k);
    while !pool.is_empty() {
        let mut best = (0, 0, T::zero());
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                let v = form(&pool[i], &pool[j]).abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (i, j, mag) = best;
        if mag <= floor {
            return None;
        }
        let e = pool[i].clone();
        let f = &pool[j] / form(&e, &pool[j]);
        let rest: Vec<DVector<T>> = pool
            .iter()
            .enumerate()
            .filter(|(t, _)| *t != i && *t != j)
            .map(|(_, x)| x - &e * form(x, &f) + &f * form(x, &e))
            .collect();
        rows.push(e);
        rows.push(f);
        pool = rest;
    }
    let mut l = DMatrix::zeros(k, k);
    for (r, row) in rows.iter().enumerate() {
        l.row_mut(r).copy_from(&row.transpose());
    }
    Some(l)
}

/// Replaces `T` by `LT` with `LT𝕁Tᵀ Lᵀ = 𝕁_r` and pairs it with
/// `V = −𝕁_n Tᵀ 𝕁_r`, so that `TV = I` and `𝕁_nTᵀ = V𝕁_r` hold exactly.
pub fn symplectic_normalize<T: Real>(t: &DMatrix<T>) -> Option<ProjectionPair<T>> {
    let g = mul_j_right(t) * t.transpose();
    let l = skew_normalizer(&((&g - g.transpose()) * T::lit(0.5)))?;
    let t = l * t;
    let v = -mul_j_right(&mul_j_left(&t.transpose()));
    Some(ProjectionPair::new(t, v))
}

/// Replaces `T` by `(TTᵀ)^{-1/2} T` and pairs it with `V = Tᵀ`.
pub fn polar_normalize<T: Real>(t: &DMatrix<T>) -> Option<ProjectionPair<T>> {
    let eig = SymmetricEigen::new(t * t.transpose());
    let top = eig.eigenvalues.iter().fold(T::zero(), |a, v| a.max(*v));
    if eig.eigenvalues.iter().any(|v| *v <= T::lit(1e-24) * top) || top <= T::zero() {
        return None;
    }
    let inv_sqrt = eig.eigenvalues.map(|v| T::one() / v.sqrt());
    let w = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let t = w * t;
    let v = t.transpose();
    Some(ProjectionPair::new(t, v))
}

/// Orthogonal projection onto `{X : 𝕁_r X = X 𝕁_n}`, i.e. `½(X − 𝕁_r X 𝕁_n)`.
pub fn commuting_part<T: Real>(x: &DMatrix<T>) -> DMatrix<T> {
    (x - mul_j_right(&mul_j_left(x))) * T::lit(0.5)
}
