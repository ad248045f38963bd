use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SystemError;
use crate::system::QuantumLinearSystem;
use crate::Real;

/// Annihilation-operator model `da = F a dt + G dA`, `dY = H a dt + K dA`.
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveComplexSystem<T: Real> {
    pub f: DMatrix<Complex<T>>,
    pub g: DMatrix<Complex<T>>,
    pub h: DMatrix<Complex<T>>,
    pub k: DMatrix<Complex<T>>,
}

impl<T: Real> PassiveComplexSystem<T> {
    pub fn new(
        f: DMatrix<Complex<T>>,
        g: DMatrix<Complex<T>>,
        h: DMatrix<Complex<T>>,
        k: DMatrix<Complex<T>>,
    ) -> Result<Self, SystemError> {
        let (n, m, l) = (f.nrows(), g.ncols(), h.nrows());
        let shapes = [
            ("F", &f, n, n),
            ("G", &g, n, m),
            ("H", &h, l, n),
            ("K", &k, l, m),
        ];
        for (name, x, r, c) in shapes {
            if x.nrows() != r || x.ncols() != c {
                return Err(SystemError::Dimension {
                    name,
                    got_rows: x.nrows(),
                    got_cols: x.ncols(),
                    want_rows: r,
                    want_cols: c,
                });
            }
            if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(SystemError::NonFinite(name));
            }
        }
        Ok(PassiveComplexSystem { f, g, h, k })
    }

    pub fn n(&self) -> usize {
        self.f.nrows()
    }
    pub fn m(&self) -> usize {
        self.g.ncols()
    }
    pub fn l(&self) -> usize {
        self.h.nrows()
    }

    /// `‖F+F†+GG†‖`, `‖H+G†‖`, `‖K−I‖`.
    pub fn complex_passive_residuals(&self) -> (T, T, T) {
        let fa = self.f.adjoint();
        let ga = self.g.adjoint();
        let p1 = &self.f + fa + &self.g * &ga;
        let p2 = &self.h + ga;
        let p3 = &self.k - DMatrix::identity(self.l(), self.m());
        (p1.norm(), p2.norm(), p3.norm())
    }

    /// Random passive draw: `F = −iΩ − ½GG†` with Hermitian `Ω`, `H = −G†`, `K = I`.
    pub fn random(n: usize, m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss = || -> T { T::lit(StandardNormal.sample(&mut rng)) };
        let mut draw =
            |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| Complex::new(gauss(), gauss()));
        let x = draw(n, n);
        let omega = (&x + x.adjoint()).map(|z| z * T::lit(0.5));
        let g = draw(n, m);
        let i = Complex::new(T::zero(), T::one());
        let f = omega.map(|z| -i * z) - (&g * g.adjoint()).map(|z| z * T::lit(0.5));
        let h = -g.adjoint();
        PassiveComplexSystem {
            f,
            g,
            h,
            k: DMatrix::identity(m, m),
        }
    }
}

/// `z ↦ [[Re z, −Im z], [Im z, Re z]]` applied entrywise.
pub fn complex_to_real_blocks<T: Real>(z: &DMatrix<Complex<T>>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(2 * z.nrows(), 2 * z.ncols());
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            let v = z[(i, j)];
            out[(2 * i, 2 * j)] = v.re;
            out[(2 * i, 2 * j + 1)] = -v.im;
            out[(2 * i + 1, 2 * j)] = v.im;
            out[(2 * i + 1, 2 * j + 1)] = v.re;
        }
    }
    out
}

/// Quadrature form of an annihilation-operator model.
pub fn annihilation_to_quadrature<T: Real>(
    ps: &PassiveComplexSystem<T>,
) -> Result<QuantumLinearSystem<T>, SystemError> {
    QuantumLinearSystem::new(
        ps.n(),
        ps.m(),
        ps.l(),
        complex_to_real_blocks(&ps.f),
        complex_to_real_blocks(&ps.g),
        complex_to_real_blocks(&ps.h),
        complex_to_real_blocks(&ps.k),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detuned_damped_mode() {
        let (w, kappa) = (2.0, 0.6);
        let f = DMatrix::from_element(1, 1, Complex::new(-kappa / 2.0, -w));
        let one = DMatrix::from_element(1, 1, Complex::new(1.0, 0.0));
        let ps = PassiveComplexSystem::new(f, one.clone(), one.clone(), one).unwrap();
        let q = annihilation_to_quadrature(&ps).unwrap();
        assert_eq!(
            q.a(),
            &DMatrix::from_row_slice(2, 2, &[-0.3, 2.0, -2.0, -0.3])
        );
    }

    #[test]
    fn random_draw_is_passive() {
        let ps = PassiveComplexSystem::<f64>::random(4, 2, 11);
        let (a, b, c) = ps.complex_passive_residuals();
        assert!(a < 1e-12 && b < 1e-12 && c < 1e-12);
    }
}
