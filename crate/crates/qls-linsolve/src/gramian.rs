use nalgebra::{DMatrix, DMatrixView};
use qls_core::{QuantumLinearSystem, Real};

use crate::lyapunov::{solve_lyapunov, LyapunovError};

/// Controllability/observability Gramians of an augmented system with state
/// ordering `[x; x_r]`, split after the first `full_dim` coordinates:
///
/// ```text
/// P = [P1  P2]     Q = [Q1  Q2]
///     [P2ᵀ P3]         [Q2ᵀ Q3]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct GramianBlocks<T: Real> {
    pub p: DMatrix<T>,
    pub q: DMatrix<T>,
    full_dim: usize,
}

impl<T: Real> GramianBlocks<T> {
    pub fn new(p: DMatrix<T>, q: DMatrix<T>, full_dim: usize) -> Self {
        assert!(full_dim <= p.nrows() && p.shape() == q.shape());
        GramianBlocks { p, q, full_dim }
    }

    /// State dimension `2n` of the full part.
    pub fn full_dim(&self) -> usize {
        self.full_dim
    }
    /// State dimension `2r` of the reduced part.
    pub fn reduced_dim(&self) -> usize {
        self.p.nrows() - self.full_dim
    }
    /// Reduced mode count `r`.
    pub fn r(&self) -> usize {
        self.reduced_dim() / 2
    }

    fn split(&self, x: &DMatrix<T>, part: u8) -> DMatrix<T> {
        let (k, s) = (self.full_dim, self.reduced_dim());
        let v: DMatrixView<T> = match part {
            1 => x.view((0, 0), (k, k)),
            2 => x.view((0, k), (k, s)),
            _ => x.view((k, k), (s, s)),
        };
        v.into_owned()
    }

    pub fn p1(&self) -> DMatrix<T> {
        self.split(&self.p, 1)
    }
    pub fn p2(&self) -> DMatrix<T> {
        self.split(&self.p, 2)
    }
    pub fn p3(&self) -> DMatrix<T> {
        self.split(&self.p, 3)
    }
    pub fn q1(&self) -> DMatrix<T> {
        self.split(&self.q, 1)
    }
    pub fn q2(&self) -> DMatrix<T> {
        self.split(&self.q, 2)
    }
    pub fn q3(&self) -> DMatrix<T> {
        self.split(&self.q, 3)
    }
}

/// `Â P + P Âᵀ + B̂B̂ᵀ = 0` and `ÂᵀQ + QÂ + ĈᵀĈ = 0`.
pub fn gramians<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    full_dim: usize,
) -> Result<GramianBlocks<T>, LyapunovError> {
    let p = solve_lyapunov(a, &(b * b.transpose()))?;
    let q = solve_lyapunov(&a.transpose(), &(c.transpose() * c))?;
    Ok(GramianBlocks::new(p, q, full_dim))
}

/// Gramians of a stand-alone system (no reduced part).
pub fn system_gramians<T: Real>(
    sys: &QuantumLinearSystem<T>,
) -> Result<GramianBlocks<T>, LyapunovError> {
    gramians(sys.a(), sys.b(), sys.c(), sys.a().nrows())
}
