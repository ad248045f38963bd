//! Bartels–Stewart for `A X + X Aᵀ + W = 0`.

use nalgebra::Complex;
use nalgebra::{DMatrix, Schur};
use qls_core::spectrum::spectral_abscissa;
use qls_core::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("A is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },
    #[error("eigenvalues {lhs} and {rhs} nearly sum to zero; the equation is singular")]
    Singular { lhs: String, rhs: String },
    #[error("dimension mismatch: A is {a}x{a}, W is {w_rows}x{w_cols}")]
    Dimension {
        a: usize,
        w_rows: usize,
        w_cols: usize,
    },
    #[error("{what} is not symmetric (relative asymmetry {asym:e})")]
    Asymmetric { what: &'static str, asym: f64 },
}

const ASYMMETRY_LIMIT: f64 = 1e-9;
const SINGULAR_LIMIT: f64 = 1e-12;

/// Solves `A X + X Aᵀ + W = 0` for Hurwitz `A` and symmetric `W`.
pub fn solve_lyapunov<T: Real>(
    a: &DMatrix<T>,
    w: &DMatrix<T>,
) -> Result<DMatrix<T>, LyapunovError> {
    let abscissa = spectral_abscissa(a);
    if !(abscissa < T::zero()) {
        return Err(LyapunovError::NotHurwitz {
            abscissa: abscissa.as_f64(),
        });
    }
    solve_lyapunov_unchecked(a, w)
}

/// Same as [`solve_lyapunov`] without the Hurwitz precondition. The solution
/// exists whenever no two eigenvalues of `A` sum to zero; for unstable `A` it is
/// no longer a Gramian, but trace formulas built on it still evaluate the
/// algebraic expression.
pub fn solve_lyapunov_unchecked<T: Real>(
    a: &DMatrix<T>,
    w: &DMatrix<T>,
) -> Result<DMatrix<T>, LyapunovError> {
    let n = a.nrows();
    if !a.is_square() || w.nrows() != n || w.ncols() != n {
        return Err(LyapunovError::Dimension {
            a: n,
            w_rows: w.nrows(),
            w_cols: w.ncols(),
        });
    }
    let asym = relative_asymmetry(w);
    if asym > T::lit(ASYMMETRY_LIMIT) {
        return Err(LyapunovError::Asymmetric {
            what: "W",
            asym: asym.as_f64(),
        });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let (q, t) = Schur::new(a.clone()).unpack();
    let wt = q.transpose() * w * &q;
    let blocks = diagonal_blocks(&t);
    let eig: Vec<Vec<Complex<T>>> = blocks
        .iter()
        .map(|&(s, k)| block_eigenvalues(&t, s, k))
        .collect();
    let tiny = T::lit(SINGULAR_LIMIT) * a.norm();

    let mut y = DMatrix::<T>::zeros(n, n);
    for bi in (0..blocks.len()).rev() {
        let (si, ki) = blocks[bi];
        for bj in (0..blocks.len()).rev() {
            let (sj, kj) = blocks[bj];
            for li in &eig[bi] {
                for lj in &eig[bj] {
                    let sum = *li + *lj;
                    if sum.re.hypot(sum.im) < tiny {
                        return Err(LyapunovError::Singular {
                            lhs: format!("{li}"),
                            rhs: format!("{lj}"),
                        });
                    }
                }
            }
            // rhs = -W_ij - sum_{k>i} T_ik Y_kj - sum_{l>j} Y_il T_jl^T
            let mut rhs = -wt.view((si, sj), (ki, kj)).into_owned();
            let tail_i = n - (si + ki);
            if tail_i > 0 {
                rhs -= t.view((si, si + ki), (ki, tail_i)) * y.view((si + ki, sj), (tail_i, kj));
            }
            let tail_j = n - (sj + kj);
            if tail_j > 0 {
                rhs -= y.view((si, sj + kj), (ki, tail_j))
                    * t.view((sj, sj + kj), (kj, tail_j)).transpose();
            }
            let tii = t.view((si, si), (ki, ki)).into_owned();
            let tjj = t.view((sj, sj), (kj, kj)).into_owned();
            let blk = small_sylvester(&tii, &tjj, &rhs);
            y.view_mut((si, sj), (ki, kj)).copy_from(&blk);
        }
    }

    let x = &q * y * q.transpose();
    let asym = relative_asymmetry(&x);
    if asym > T::lit(ASYMMETRY_LIMIT) {
        return Err(LyapunovError::Asymmetric {
            what: "solution",
            asym: asym.as_f64(),
        });
    }
    Ok((&x + x.transpose()) * T::lit(0.5))
}

fn relative_asymmetry<T: Real>(x: &DMatrix<T>) -> T {
    let nrm = x.norm();
    if nrm == T::zero() {
        return T::zero();
    }
    (x - x.transpose()).norm() / nrm
}

/// Start index and size of each diagonal block of a quasi-triangular matrix.
fn diagonal_blocks<T: Real>(t: &DMatrix<T>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n {
            let sub = t[(i + 1, i)].abs();
            let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs();
            if sub > T::eps() * scale.max(T::lit(f64::MIN_POSITIVE)) {
                out.push((i, 2));
                i += 2;
                continue;
            }
        }
        out.push((i, 1));
        i += 1;
    }
    out
}

fn block_eigenvalues<T: Real>(t: &DMatrix<T>, s: usize, k: usize) -> Vec<Complex<T>> {
    if k == 1 {
        return vec![Complex::new(t[(s, s)], T::zero())];
    }
    let (a, b, c, d) = (t[(s, s)], t[(s, s + 1)], t[(s + 1, s)], t[(s + 1, s + 1)]);
    let half = T::lit(0.5);
    let mid = (a + d) * half;
    let disc = ((a - d) * half).powi(2) + b * c;
    if disc >= T::zero() {
        let r = disc.sqrt();
        vec![
            Complex::new(mid + r, T::zero()),
            Complex::new(mid - r, T::zero()),
        ]
    } else {
        let r = (-disc).sqrt();
        vec![Complex::new(mid, r), Complex::new(mid, -r)]
    }
}

/// Solves `P Y + Y Qᵀ = R` for blocks of size at most 2 through the Kronecker form.
fn small_sylvester<T: Real>(p: &DMatrix<T>, q: &DMatrix<T>, r: &DMatrix<T>) -> DMatrix<T> {
    let (kp, kq) = (p.nrows(), q.nrows());
    let dim = kp * kq;
    // column-major vec: vec(PY) = (I ⊗ P) vec Y, vec(Y Qᵀ) = (Q ⊗ I) vec Y
    let mut k = DMatrix::<T>::zeros(dim, dim);
    for col in 0..kq {
        for i in 0..kp {
            for j in 0..kp {
                k[(col * kp + i, col * kp + j)] += p[(i, j)];
            }
        }
    }
    for a in 0..kq {
        for b in 0..kq {
            for i in 0..kp {
                k[(a * kp + i, b * kp + i)] += q[(a, b)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_column_slice(r.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .unwrap_or_else(|| nalgebra::DVector::zeros(dim));
    DMatrix::from_column_slice(kp, kq, sol.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_identity() {
        let a = DMatrix::<f64>::identity(2, 2) * -0.5;
        let x = solve_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        assert!((x - DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn triangular_hand_solution() {
        // unknowns x11, x12, x22:
        //   -2 x11 + 2 x12 + 1 = 0
        //   -3 x12 + x22 = 0
        //   -4 x22 + 1 = 0
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let x = solve_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        let x22 = 0.25;
        let x12 = x22 / 3.0;
        let x11 = (1.0 + 2.0 * x12) / 2.0;
        let want = DMatrix::from_row_slice(2, 2, &[x11, x12, x12, x22]);
        assert!((x - want).norm() < 1e-14);
    }

    #[test]
    fn rejects_unstable_and_singular() {
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            solve_lyapunov(&rot, &DMatrix::identity(2, 2)),
            Err(LyapunovError::NotHurwitz { .. })
        ));
        assert!(matches!(
            solve_lyapunov_unchecked(&rot, &DMatrix::identity(2, 2)),
            Err(LyapunovError::Singular { .. })
        ));
    }

    #[test]
    fn unchecked_handles_unstable_nonsingular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, -3.0]);
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let x = solve_lyapunov_unchecked(&a, &w).unwrap();
        assert!((&a * &x + &x * a.transpose() + w).norm() < 1e-13);
    }
}
