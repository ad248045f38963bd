use nalgebra::DMatrix;

use crate::error::SystemError;
use crate::symplectic::{mul_j_left, mul_j_right};
use crate::Real;

/// Real quadrature state-space model
///
/// ```text
/// dx = A x dt + B dw,   dy = C x dt + D dw
/// ```
///
/// with `n` modes (state dimension `2n`), `m` input fields and `l` output fields.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLinearSystem<T: Real> {
    n: usize,
    m: usize,
    l: usize,
    a: DMatrix<T>,
    b: DMatrix<T>,
    c: DMatrix<T>,
    d: DMatrix<T>,
}

/// Frobenius norms of the three realizability conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizabilityResiduals<T> {
    pub r1: T,
    pub r2: T,
    pub r3: T,
}

/// Frobenius norms of `A+Aᵀ+BBᵀ`, `B+Cᵀ`, `D−I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassiveResiduals<T> {
    pub p1: T,
    pub p2: T,
    pub p3: T,
}

impl<T: Real> RealizabilityResiduals<T> {
    pub fn max(&self) -> T {
        self.r1.max(self.r2).max(self.r3)
    }
}

impl<T: Real> PassiveResiduals<T> {
    pub fn max(&self) -> T {
        self.p1.max(self.p2).max(self.p3)
    }
}

fn check_dims<T: Real>(
    name: &'static str,
    x: &DMatrix<T>,
    rows: usize,
    cols: usize,
) -> Result<(), SystemError> {
    if x.nrows() != rows || x.ncols() != cols {
        return Err(SystemError::Dimension {
            name,
            got_rows: x.nrows(),
            got_cols: x.ncols(),
            want_rows: rows,
            want_cols: cols,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SystemError::NonFinite(name));
    }
    Ok(())
}

impl<T: Real> QuantumLinearSystem<T> {
    /// Builds a system after checking `A: 2n×2n`, `B: 2n×2m`, `C: 2l×2n`, `D: 2l×2m`.
    pub fn new(
        n: usize,
        m: usize,
        l: usize,
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
    ) -> Result<Self, SystemError> {
        if n == 0 || m == 0 || l == 0 {
            return Err(SystemError::EmptySystem { n, m, l });
        }
        check_dims("A", &a, 2 * n, 2 * n)?;
        check_dims("B", &b, 2 * n, 2 * m)?;
        check_dims("C", &c, 2 * l, 2 * n)?;
        check_dims("D", &d, 2 * l, 2 * m)?;
        Ok(QuantumLinearSystem {
            n,
            m,
            l,
            a,
            b,
            c,
            d,
        })
    }

    /// Infers `(n, m, l)` from the matrix shapes.
    pub fn from_matrices(
        a: DMatrix<T>,
        b: DMatrix<T>,
        c: DMatrix<T>,
        d: DMatrix<T>,
    ) -> Result<Self, SystemError> {
        let (n2, m2, l2) = (a.nrows(), b.ncols(), c.nrows());
        if n2 % 2 != 0 || m2 % 2 != 0 || l2 % 2 != 0 {
            return Err(SystemError::InvalidArgument(format!(
                "quadrature dimensions must be even, got state {n2}, input {m2}, output {l2}"
            )));
        }
        Self::new(n2 / 2, m2 / 2, l2 / 2, a, b, c, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<T> {
        &self.d
    }

    pub fn into_parts(self) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>, DMatrix<T>) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn realizability_residuals(&self) -> RealizabilityResiduals<T> {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let aj = mul_j_right(a);
        let r1 = &aj - aj.transpose() + mul_j_right(b) * b.transpose();
        let r2 = mul_j_left(&c.transpose()) + mul_j_right(b) * d.transpose();
        let mut r3 = mul_j_right(d) * d.transpose();
        for p in 0..self.l {
            r3[(2 * p, 2 * p + 1)] -= T::one();
            r3[(2 * p + 1, 2 * p)] += T::one();
        }
        RealizabilityResiduals {
            r1: r1.norm(),
            r2: r2.norm(),
            r3: r3.norm(),
        }
    }

    pub fn is_realizable(&self, tol: T) -> bool {
        self.realizability_residuals().max() <= tol
    }

    pub fn passive_residuals(&self) -> Result<PassiveResiduals<T>, SystemError> {
        if self.l != self.m {
            return Err(SystemError::ChannelMismatch {
                l: self.l,
                m: self.m,
            });
        }
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let p1 = a + a.transpose() + b * b.transpose();
        let p2 = b + c.transpose();
        let p3 = d - DMatrix::identity(d.nrows(), d.ncols());
        Ok(PassiveResiduals {
            p1: p1.norm(),
            p2: p2.norm(),
            p3: p3.norm(),
        })
    }

    /// True when `A` and `B` commute with the symplectic forms, i.e. the model
    /// comes from a complex (annihilation-operator) description.
    pub fn is_phase_symmetric(&self, tol: T) -> bool {
        let ca = mul_j_left(&self.a) - mul_j_right(&self.a);
        let cb = mul_j_left(&self.b) - mul_j_right(&self.b);
        let cc = mul_j_left(&self.c) - mul_j_right(&self.c);
        ca.norm().max(cb.norm()).max(cc.norm()) <= tol
    }

    /// State-space change of coordinates `x ↦ S x`.
    pub fn similarity(&self, s: &DMatrix<T>) -> Result<Self, SystemError> {
        let s_inv = s.clone().try_inverse().ok_or_else(|| {
            SystemError::InvalidArgument("similarity transform is singular".into())
        })?;
        Self::new(
            self.n,
            self.m,
            self.l,
            s * &self.a * &s_inv,
            s * &self.b,
            &self.c * s_inv,
            self.d.clone(),
        )
    }

    /// Reorders modes: mode `order[i]` of `self` becomes mode `i` of the result.
    pub fn permute_modes(&self, order: &[usize]) -> Self {
        let p = mode_permutation::<T>(self.n, order);
        let pt = p.transpose();
        QuantumLinearSystem {
            a: &p * &self.a * &pt,
            b: &p * &self.b,
            c: &self.c * pt,
            ..self.clone()
        }
    }

    /// Frobenius norms of `A`, `B`, `C`, `D`; their maximum is the residual scale.
    pub fn block_scale(&self) -> T {
        T::one()
            .max(self.a.norm())
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    /// Two systems side by side with separate fields: every matrix is block diagonal.
    pub fn direct_sum(&self, other: &Self) -> Self {
        fn diag<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>) -> DMatrix<T> {
            let mut out = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
            out.view_mut((0, 0), x.shape()).copy_from(x);
            out.view_mut(x.shape(), y.shape()).copy_from(y);
            out
        }
        QuantumLinearSystem {
            n: self.n + other.n,
            m: self.m + other.m,
            l: self.l + other.l,
            a: diag(&self.a, &other.a),
            b: diag(&self.b, &other.b),
            c: diag(&self.c, &other.c),
            d: diag(&self.d, &other.d),
        }
    }

    /// Elementwise cast to another scalar type.
    pub fn cast<U: Real>(&self) -> QuantumLinearSystem<U> {
        let f = |x: &DMatrix<T>| x.map(|v| U::lit(v.as_f64()));
        QuantumLinearSystem {
            n: self.n,
            m: self.m,
            l: self.l,
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
            d: f(&self.d),
        }
    }
}

/// Row-selection matrix `P` (2n×2n) such that `(P x)` lists the modes in `order`.
/// `order` must be a permutation of `0..n`.
pub fn mode_permutation<T: Real>(n: usize, order: &[usize]) -> DMatrix<T> {
    assert_eq!(order.len(), n, "order must list every mode");
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for (i, &src) in order.iter().enumerate() {
        p[(2 * i, 2 * src)] = T::one();
        p[(2 * i + 1, 2 * src + 1)] = T::one();
    }
    p
}

/// Rows of the identity selecting the quadratures of `modes`, a `2r × 2n` matrix.
pub fn mode_selector<T: Real>(n: usize, modes: &[usize]) -> DMatrix<T> {
    let mut t = DMatrix::zeros(2 * modes.len(), 2 * n);
    for (i, &k) in modes.iter().enumerate() {
        t[(2 * i, 2 * k)] = T::one();
        t[(2 * i + 1, 2 * k + 1)] = T::one();
    }
    t
}
