//! Seeded generator of realizable, Hurwitz test systems.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SystemError;
use crate::spectrum::spectral_abscissa;
use crate::symplectic::{mul_j_left, mul_j_right};
use crate::system::QuantumLinearSystem;
use crate::Real;

/// Rejection budget of [`random_realizable`].
pub const GENERATOR_BUDGET: usize = 100;

/// Realizable system with `A = 𝕁R + ½B𝕁Bᵀ𝕁`, `D = [I 0]`, `Cᵀ = 𝕁B𝕁Dᵀ` and `l = m`.
///
/// See [`random_realizable_with_outputs`].
pub fn random_realizable<T: Real>(
    n: usize,
    m: usize,
    seed: u64,
    stability_margin: T,
) -> Result<QuantumLinearSystem<T>, SystemError> {
    random_realizable_with_outputs(n, m, m, seed, stability_margin)
}

/// Realizable system with `l ≤ m` output fields.
///
/// Symmetric `R` and `B` are each the sum of a phase-symmetric part (commuting
/// with 𝕁, which on its own yields a dissipative `A`) and a smaller generic
/// part. A draw whose `A` is not Hurwitz with the requested margin is rejected;
/// each retry shrinks `R` slightly, shrinks the generic parts and grows `B`.
pub fn random_realizable_with_outputs<T: Real>(
    n: usize,
    m: usize,
    l: usize,
    seed: u64,
    stability_margin: T,
) -> Result<QuantumLinearSystem<T>, SystemError> {
    if n == 0 || m == 0 || l == 0 || l > m {
        return Err(SystemError::InvalidArgument(format!(
            "need n, m, l >= 1 and l <= m (got n={n}, m={m}, l={l})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DMatrix::zeros(2 * l, 2 * m);
    for i in 0..2 * l {
        d[(i, i)] = T::one();
    }
    let half = T::lit(0.5);
    for attempt in 0..GENERATOR_BUDGET {
        let mut gauss = |r: usize, c: usize| {
            DMatrix::from_fn(r, c, |_, _| T::lit(StandardNormal.sample(&mut rng)))
        };
        let xr = gauss(2 * n, 2 * n);
        let xa = gauss(2 * n, 2 * n);
        let xb = gauss(2 * n, 2 * m);
        let xba = gauss(2 * n, 2 * m);

        // Shrinking R quickly makes the modes near-degenerate, and with few
        // channels a degenerate block has dark combinations that B cannot damp.
        let shrink = T::lit(0.97f64.powi(attempt as i32));
        let grow = T::lit(1.05f64.powi(attempt as i32));
        let mix = T::lit(0.3) * T::lit(0.8f64.powi(attempt as i32));

        let sym = |x: &DMatrix<T>| (x + x.transpose()) * half;
        let commuting = |x: &DMatrix<T>| (x - mul_j_left(&mul_j_right(x))) * half;
        let r = (commuting(&sym(&xr)) + sym(&xa) * mix) * shrink;
        let b = (commuting(&xb) + xba * mix) * grow;

        let a = mul_j_left(&r) + mul_j_right(&(mul_j_right(&b) * b.transpose())) * half;
        if !(spectral_abscissa(&a) < -stability_margin) {
            continue;
        }
        let c = (mul_j_left(&mul_j_right(&b)) * d.transpose()).transpose();
        return QuantumLinearSystem::new(n, m, l, a, b, c, d);
    }
    Err(SystemError::GeneratorBudget {
        attempts: GENERATOR_BUDGET,
    })
}
