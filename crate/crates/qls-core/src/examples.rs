//! Builders for the two reference systems.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::passive::{annihilation_to_quadrature, PassiveComplexSystem};
use crate::system::QuantumLinearSystem;
use crate::Real;

/// Cavity coupled to two mechanical oscillators for back-action evading
/// position measurement. State `(q1, p1, q2, p2, q3, p3)`, one output field,
/// three input fields, `D = [−I₂ 0]`.
pub fn example_optomech<T: Real>(
    kappa: T,
    gamma: T,
    coupling: T,
    omega_b: T,
) -> QuantumLinearSystem<T> {
    let half = T::lit(0.5);
    let mut a = DMatrix::zeros(6, 6);
    a[(0, 0)] = -kappa * half;
    a[(1, 1)] = -kappa * half;
    a[(1, 2)] = -coupling;
    a[(2, 2)] = -gamma * half;
    a[(2, 5)] = omega_b;
    a[(3, 0)] = -coupling;
    a[(3, 3)] = -gamma * half;
    a[(3, 4)] = -omega_b;
    a[(4, 3)] = omega_b;
    a[(4, 4)] = -gamma * half;
    a[(5, 2)] = -omega_b;
    a[(5, 5)] = -gamma * half;

    let (sk, sg) = (kappa.sqrt(), gamma.sqrt());
    let mut b = DMatrix::zeros(6, 6);
    for i in 0..6 {
        b[(i, i)] = if i < 2 { sk } else { sg };
    }
    let mut c = DMatrix::zeros(2, 6);
    let mut d = DMatrix::zeros(2, 6);
    for i in 0..2 {
        c[(i, i)] = sk;
        d[(i, i)] = -T::one();
    }
    QuantumLinearSystem::new(3, 3, 1, a, b, c, d).expect("template dimensions are fixed")
}

/// Parameters used for the reduction benchmark: κ=2e5, γ=100, Γ=7.0711e4, Ω_b=1e4.
pub fn example_optomech_default<T: Real>() -> QuantumLinearSystem<T> {
    example_optomech(T::lit(2e5), T::lit(100.0), T::lit(7.0711e4), T::lit(1e4))
}

/// Annihilation-operator model of three detuned cavities in series: the output
/// of cavity `i` drives cavity `i+1`.
pub fn cascade_complex<T: Real>(omega: [T; 3], kappa: [T; 3]) -> PassiveComplexSystem<T> {
    let half = T::lit(0.5);
    let f = DMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            Complex::new(-kappa[i] * half, -omega[i])
        } else if i > j {
            Complex::new(-(kappa[i] * kappa[j]).sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let g = DMatrix::from_fn(3, 1, |i, _| Complex::new(-kappa[i].sqrt(), T::zero()));
    let h = DMatrix::from_fn(1, 3, |_, j| Complex::new(kappa[j].sqrt(), T::zero()));
    let k = DMatrix::from_element(1, 1, Complex::new(T::one(), T::zero()));
    PassiveComplexSystem { f, g, h, k }
}

/// Quadrature form of [`cascade_complex`].
pub fn example_cascade<T: Real>(omega: [T; 3], kappa: [T; 3]) -> QuantumLinearSystem<T> {
    annihilation_to_quadrature(&cascade_complex(omega, kappa))
        .expect("template dimensions are fixed")
}

/// ω = (10, 10, 0.01), κ = (1, 1, 1).
pub fn example_cascade_default<T: Real>() -> QuantumLinearSystem<T> {
    example_cascade(
        [T::lit(10.0), T::lit(10.0), T::lit(0.01)],
        [T::one(), T::one(), T::one()],
    )
}

/// Reduced model printed for the optomechanical example (two decimals).
pub fn printed_optomech_reduced() -> QuantumLinearSystem<f64> {
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[
            -41449.0, 7913.0, -45389.0, 5330.0, //
            -58081.0, -35985.0, -59739.0, -43039.0, //
            -40045.0, 11234.0, -44146.0, 9000.0, //
            -66094.0, -38193.0, -68208.0, -46019.0,
        ],
    );
    let b = DMatrix::from_row_slice(
        4,
        6,
        &[
            287.18, 16.83, 6.43, 0.45, 5.95, 0.22, //
            -27.62, 267.76, -0.73, 5.99, -1.13, 5.97, //
            310.24, -2.36, 6.96, 0.02, 6.47, -0.22, //
            -6.24, 290.40, -0.26, 6.51, -0.73, 6.46,
        ],
    );
    let c = DMatrix::from_row_slice(
        2,
        4,
        &[
            267.76, -16.83, 290.40, 2.36, //
            27.62, 287.18, 6.24, 310.24,
        ],
    );
    let mut d = DMatrix::zeros(2, 6);
    d[(0, 0)] = -1.0;
    d[(1, 1)] = -1.0;
    QuantumLinearSystem::new(2, 3, 1, a, b, c, d).expect("fixed shapes")
}

/// Reduced model printed for the cascade example (two decimals).
pub fn printed_cascade_reduced() -> QuantumLinearSystem<f64> {
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[
            -0.24, -5.54, 0.74, 1.37, //
            4.89, -0.99, 2.66, -8.03, //
            -0.63, -1.54, -0.51, 1.52, //
            -0.91, 7.93, -1.39, -1.37,
        ],
    );
    let b = DMatrix::from_row_slice(4, 2, &[0.35, -0.36, 0.32, -1.31, -0.19, 0.84, -1.60, -0.46]);
    let c = DMatrix::from_row_slice(2, 4, &[-0.35, -0.32, 0.19, 1.60, 0.37, 1.31, -0.84, 0.46]);
    QuantumLinearSystem::new(2, 1, 1, a, b, c, DMatrix::identity(2, 2)).expect("fixed shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optomech_realizable() {
        let s = example_optomech_default::<f64>();
        assert!(s.realizability_residuals().max() < 1e-10);
    }

    #[test]
    fn cascade_lower_blocks() {
        let s = example_cascade_default::<f64>();
        assert_eq!(s.a()[(2, 0)], -1.0);
        assert_eq!(s.a()[(3, 1)], -1.0);
        assert_eq!(s.a()[(0, 2)], 0.0);
        assert_eq!(s.a()[(0, 1)], 10.0);
        assert!(s.passive_residuals().unwrap().max() < 1e-12);
    }
}
