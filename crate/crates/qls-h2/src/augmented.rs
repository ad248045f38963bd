use nalgebra::DMatrix;
use qls_core::{QuantumLinearSystem, Real};

use crate::error::H2Error;

/// Error system `Â = diag(A, A_r)`, `B̂ = [B; B_r]`, `Ĉ = [C, −C_r]`. The
/// feedthrough cancels because `D_r = D`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem<T: Real> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub c: DMatrix<T>,
    /// State dimension of the full system (`2n`).
    pub full_dim: usize,
}

pub fn build_augmented<T: Real>(
    full: &QuantumLinearSystem<T>,
    reduced: &QuantumLinearSystem<T>,
) -> Result<AugmentedSystem<T>, H2Error> {
    if full.m() != reduced.m() || full.l() != reduced.l() {
        return Err(H2Error::Channels {
            m_full: full.m(),
            m_red: reduced.m(),
            l_full: full.l(),
            l_red: reduced.l(),
        });
    }
    if full.d() != reduced.d() {
        return Err(H2Error::FeedthroughMismatch);
    }
    Ok(augment_matrices(
        (full.a(), full.b(), full.c()),
        (reduced.a(), reduced.b(), reduced.c()),
    ))
}

/// Same as [`build_augmented`] on bare matrices (no feedthrough check).
pub(crate) fn augment_matrices<T: Real>(
    full: (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
    reduced: (&DMatrix<T>, &DMatrix<T>, &DMatrix<T>),
) -> AugmentedSystem<T> {
    let (a, b, c) = full;
    let (ar, br, cr) = reduced;
    let (k, s) = (a.nrows(), ar.nrows());
    let mut ah = DMatrix::zeros(k + s, k + s);
    ah.view_mut((0, 0), (k, k)).copy_from(a);
    ah.view_mut((k, k), (s, s)).copy_from(ar);
    let mut bh = DMatrix::zeros(k + s, b.ncols());
    bh.view_mut((0, 0), (k, b.ncols())).copy_from(b);
    bh.view_mut((k, 0), (s, b.ncols())).copy_from(br);
    let mut ch = DMatrix::zeros(c.nrows(), k + s);
    ch.view_mut((0, 0), (c.nrows(), k)).copy_from(c);
    ch.view_mut((0, k), (c.nrows(), s)).copy_from(&(-cr));
    AugmentedSystem {
        a: ah,
        b: bh,
        c: ch,
        full_dim: k,
    }
}

impl<T: Real> AugmentedSystem<T> {
    /// Generic triple with an unspecified split, e.g. a stand-alone system.
    pub fn from_triple(a: DMatrix<T>, b: DMatrix<T>, c: DMatrix<T>) -> Self {
        let full_dim = a.nrows();
        AugmentedSystem { a, b, c, full_dim }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qls_core::example_cascade_default;

    #[test]
    fn copy_is_annihilated_on_diagonal() {
        let s = example_cascade_default::<f64>();
        let aug = build_augmented(&s, &s).unwrap();
        assert_eq!(aug.a.nrows(), 12);
        let x = nalgebra::DVector::from_fn(6, |i, _| i as f64 + 1.0);
        let mut xx = nalgebra::DVector::zeros(12);
        xx.rows_mut(0, 6).copy_from(&x);
        xx.rows_mut(6, 6).copy_from(&x);
        assert_eq!((&aug.c * xx).norm(), 0.0);
    }
}
