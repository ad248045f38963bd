//! Block layouts that lift the bilinear realizability conditions on the
//! Gramian blocks `(Q̂₁, Q̂₂, Q̂₃)` into a rank-bounded PSD matrix.
//!
//! Every block is `N × N` with `N` the full phase-space dimension; reduced
//! quantities sit in the leading rows/columns and the rest is pinned to 0.
//! The lifted matrix is `Z = W Wᵀ` with `W = [I; X_1; X_2; …]`, so the block
//! `Z_{a,b}` equals `X_a X_bᵀ` and the first block column carries the
//! unknowns themselves.

use nalgebra::DMatrix;
use qls_core::{symplectic, Real};

use crate::lifted::{LiftedBuilder, LiftedProblem};

/// Which commutation identity ties the off-diagonal Gramian block together.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftingKind {
    /// `Q̂₁ 𝕁 Q̂₂ = Q̂₂ 𝕁_r Q̂₃`.
    Symplectic,
    /// `Q̂₁ Q̂₂ = Q̂₂ Q̂₃`.
    Commuting,
}

/// Unknowns read back from a lifted matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedBlocks<T: Real> {
    pub q1: DMatrix<T>,
    pub q2: DMatrix<T>,
    pub q3: DMatrix<T>,
    pub m: DMatrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftingLayout {
    pub kind: LiftingKind,
    /// Full phase-space dimension `N = 2n`.
    pub full: usize,
    /// Reduced phase-space dimension `k = 2r`.
    pub reduced: usize,
    /// Pin `M` to `diag(M_r, 0)`.
    pub structured_m: bool,
}

const ACTIVE: [&str; 13] = [
    "1", "x1", "x2", "x3", "x4", "x5", "x6", "v1", "v2", "v3", "v4", "v5", "v6",
];
const PASSIVE: [&str; 11] = [
    "1", "x1", "x2", "x3", "x4", "x5", "x6", "v5", "v6", "w1", "w2",
];

fn pad<T: Real>(m: &DMatrix<T>, n: usize) -> DMatrix<T> {
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

impl LiftingLayout {
    pub fn new(kind: LiftingKind, full: usize, reduced: usize, structured_m: bool) -> Self {
        assert!(
            full % 2 == 0 && reduced % 2 == 0,
            "phase-space dimensions are even"
        );
        assert!(reduced <= full, "reduced dimension exceeds full dimension");
        LiftingLayout {
            kind,
            full,
            reduced,
            structured_m,
        }
    }

    pub fn block_names(&self) -> &'static [&'static str] {
        match self.kind {
            LiftingKind::Symplectic => &ACTIVE,
            LiftingKind::Commuting => &PASSIVE,
        }
    }

    /// Side length of the lifted matrix.
    pub fn dim(&self) -> usize {
        self.full * self.block_names().len()
    }

    pub fn problem<T: Real>(&self) -> LiftedProblem<T> {
        let (n, k) = (self.full, self.reduced);
        let mut b = LiftedBuilder::new(n, self.block_names());
        b.fix_block("1", "1", &DMatrix::identity(n, n));
        for s in ["x1", "x3", "x4", "x5"] {
            b.symmetric(s, "1");
        }
        b.equal_transposed(("x6", "1"), ("x2", "1"));
        b.equal(("v5", "1"), ("x2", "x5"));
        b.equal(("v6", "1"), ("v5", "x2"));
        b.equal(("x4", "1"), ("v6", "1"));
        b.fix_block("x3", "x5", &pad(&DMatrix::<f64>::identity(k, k), n));

        for s in ["x2", "v5"] {
            b.zero_outside(s, "1", n, k);
        }
        b.zero_outside("x3", "1", k, k);
        b.zero_outside("x5", "1", k, k);
        b.zero_outside("x6", "1", k, n);
        if self.structured_m {
            b.zero_outside("x4", "1", k, k);
        }

        match self.kind {
            LiftingKind::Symplectic => {
                let jn = symplectic::<f64>(n / 2);
                let jr = pad(&symplectic::<f64>(k / 2), n);
                b.equal_times(("v1", "1"), ("x1", "1"), &jn);
                b.equal_times(("v2", "1"), ("x2", "1"), &jr);
                b.equal(("v3", "1"), ("v1", "x6"));
                b.equal(("v4", "1"), ("v2", "x3"));
                b.equal(("v3", "1"), ("v4", "1"));
                for s in ["v2", "v3", "v4"] {
                    b.zero_outside(s, "1", n, k);
                }
            }
            LiftingKind::Commuting => {
                b.equal(("w1", "1"), ("x1", "x6"));
                b.equal(("w2", "1"), ("x2", "x3"));
                b.equal(("w1", "1"), ("w2", "1"));
                for s in ["w1", "w2"] {
                    b.zero_outside(s, "1", n, k);
                }
            }
        }
        b.build()
    }

    /// Stacked factor `W` and `Z₀ = W Wᵀ` built from Gramian-like blocks.
    /// `q3` must be invertible. `m` defaults to `Q̂₂ Q̂₃⁻¹ Q̂₂ᵀ`.
    pub fn heuristic_start<T: Real>(
        &self,
        q1: &DMatrix<T>,
        q2: &DMatrix<T>,
        q3: &DMatrix<T>,
        m: Option<&DMatrix<T>>,
    ) -> Option<(DMatrix<T>, DMatrix<T>)> {
        let (n, k) = (self.full, self.reduced);
        assert_eq!(q1.shape(), (n, n));
        assert_eq!(q2.shape(), (n, k));
        assert_eq!(q3.shape(), (k, k));
        let q3_inv = q3.clone().try_inverse()?;
        let v5 = q2 * &q3_inv;
        let v6 = &v5 * q2.transpose();
        let m = m.cloned().unwrap_or_else(|| v6.clone());
        let x2 = pad(q2, n);
        let mut blocks: Vec<DMatrix<T>> = vec![
            DMatrix::identity(n, n),
            q1.clone(),
            x2.clone(),
            pad(q3, n),
            m,
            pad(&q3_inv, n),
            x2.transpose(),
        ];
        match self.kind {
            LiftingKind::Symplectic => {
                let jn = symplectic::<T>(n / 2);
                let jr = symplectic::<T>(k / 2);
                blocks.push(q1 * &jn);
                blocks.push(pad(&(q2 * &jr), n));
                blocks.push(pad(&(q1 * &jn * q2), n));
                blocks.push(pad(&(q2 * &jr * q3), n));
                blocks.push(pad(&v5, n));
                blocks.push(v6);
            }
            LiftingKind::Commuting => {
                blocks.push(pad(&v5, n));
                blocks.push(v6);
                blocks.push(pad(&(q1 * q2), n));
                blocks.push(pad(&(q2 * q3), n));
            }
        }
        let mut w = DMatrix::zeros(self.dim(), n);
        for (i, blk) in blocks.iter().enumerate() {
            w.view_mut((i * n, 0), (n, n)).copy_from(blk);
        }
        let z = &w * w.transpose();
        Some((w, z))
    }

    /// Reads the unknowns from the first block column.
    pub fn recover<T: Real>(&self, z: &DMatrix<T>) -> LiftedBlocks<T> {
        let (n, k) = (self.full, self.reduced);
        let names = self.block_names();
        let col = |name: &str| {
            let i = names.iter().position(|s| *s == name).expect("known block");
            z.view((i * n, 0), (n, n)).into_owned()
        };
        let sym = |m: DMatrix<T>| (&m + m.transpose()) * T::lit(0.5);
        let x2 = col("x2");
        LiftedBlocks {
            q1: sym(col("x1")),
            q2: x2.columns(0, k).into_owned(),
            q3: sym(col("x3")).view((0, 0), (k, k)).into_owned(),
            m: sym(col("x4")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_start_is_psd_rank_n() {
        let lay = LiftingLayout::new(LiftingKind::Symplectic, 4, 2, false);
        let q1 = DMatrix::from_diagonal_element(4, 4, 2.0);
        let q2 = DMatrix::from_fn(4, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        let q3 = DMatrix::from_diagonal_element(2, 2, 2.0);
        let (w, z) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
        assert_eq!(w.shape(), (52, 4));
        let back = lay.recover(&z);
        assert!((back.q1 - q1).norm() < 1e-14);
        assert!((back.q2 - q2).norm() < 1e-14);
        assert!((back.q3 - q3).norm() < 1e-14);
    }
}
