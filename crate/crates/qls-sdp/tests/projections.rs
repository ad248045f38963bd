use nalgebra::DMatrix;
use proptest::prelude::*;
use qls_sdp::{
    psd_project, rank_project, rank_projection_solve, LiftedBuilder, LiftingKind, LiftingLayout,
    RankOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Gramian-like blocks meeting the symplectic coupling exactly: block diagonal
/// `Q̂₁ = diag(a·I_k, b·I)` with `Q̂₂ = [c·I_k; 0]` and `Q̂₃ = a·I_k`.
fn feasible_blocks(
    full: usize,
    k: usize,
    a: f64,
    b: f64,
    c: f64,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let q1 = DMatrix::from_fn(full, full, |i, j| {
        if i != j {
            0.0
        } else if i < k {
            a
        } else {
            b
        }
    });
    let q2 = DMatrix::from_fn(full, k, |i, j| if i == j { c } else { 0.0 });
    let q3 = DMatrix::from_diagonal_element(k, k, a);
    (q1, q2, q3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn psd_projection_is_idempotent_and_nonexpansive(n in 1usize..12, seed in any::<u64>()) {
        let x = sym(&gaussian(n, n, seed));
        let y = sym(&gaussian(n, n, seed ^ 0x5555));
        let px = psd_project(&x);
        prop_assert!((psd_project(&px) - &px).norm() <= 1e-10 * (1.0 + px.norm()));
        let py = psd_project(&y);
        prop_assert!((&px - &py).norm() <= (&x - &y).norm() * (1.0 + 1e-10));
    }

    #[test]
    fn rank_projection_respects_rank(n in 2usize..12, k in 1usize..6, seed in any::<u64>()) {
        let k = k.min(n);
        let x = sym(&gaussian(n, n, seed));
        let p = rank_project(&x, k);
        let eig = nalgebra::SymmetricEigen::new(p.z.clone());
        let big = eig.eigenvalues.iter().filter(|v| **v > 1e-9 * (1.0 + p.z.norm())).count();
        prop_assert!(big <= k);
        prop_assert!(eig.eigenvalues.iter().all(|v| *v >= -1e-9 * (1.0 + p.z.norm())));
    }

    #[test]
    fn lifted_blocks_factor(a in 0.5f64..3.0, b in 0.5f64..3.0, c in -2.0f64..2.0, seed in any::<u64>()) {
        for kind in [LiftingKind::Symplectic, LiftingKind::Commuting] {
            let lay = LiftingLayout::new(kind, 4, 2, false);
            let (mut q1, q2, q3) = feasible_blocks(4, 2, a, b, c);
            q1 += sym(&gaussian(4, 4, seed)) * 0.1;
            let (w, z) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
            let lp = lay.problem::<f64>();
            let names = lay.block_names();
            for (i, na) in names.iter().enumerate() {
                for (j, nb) in names.iter().enumerate() {
                    let xa = w.rows(i * 4, 4);
                    let xb = w.rows(j * 4, 4);
                    prop_assert!((lp.block(&z, na, nb) - xa * xb.transpose()).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn feasible_start_converges_at_once(a in 0.5f64..3.0, b in 0.5f64..3.0, c in 0.2f64..2.0) {
        for kind in [LiftingKind::Symplectic, LiftingKind::Commuting] {
            let lay = LiftingLayout::new(kind, 6, 2, false);
            let (q1, q2, q3) = feasible_blocks(6, 2, a, b, c);
            let (_, z0) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
            let lp = lay.problem::<f64>();
            prop_assert!(lp.affine_residual(&z0) < 1e-10 * z0.norm());
            let sol = rank_projection_solve(&lp, &z0, &RankOptions::default());
            prop_assert!(sol.converged);
            prop_assert_eq!(sol.iterations, 1);
        }
    }

    #[test]
    fn affine_distance_never_increases(seed in any::<u64>()) {
        let lay = LiftingLayout::new(LiftingKind::Symplectic, 4, 2, false);
        let (q1, q2, q3) = feasible_blocks(4, 2, 1.3, 0.7, 0.9);
        let (_, z0) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
        let z0 = &z0 + sym(&gaussian(z0.nrows(), z0.ncols(), seed)) * 0.3;
        let lp = lay.problem::<f64>();
        let opts = RankOptions { max_iter: 60, tol: 0.0, stagnation_window: 1000, dykstra: false };
        let sol = rank_projection_solve(&lp, &z0, &opts);
        for w in sol.trace.windows(2) {
            prop_assert!(w[1].affine_residual <= w[0].affine_residual * (1.0 + 1e-9) + 1e-12);
        }
    }
}

#[test]
fn perturbed_feasible_point_reconverges() {
    let lay = LiftingLayout::new(LiftingKind::Symplectic, 4, 2, false);
    let (q1, q2, q3) = feasible_blocks(4, 2, 1.3, 0.7, 0.9);
    let (_, z0) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
    let z = &z0 + sym(&gaussian(z0.nrows(), z0.ncols(), 7)) * 1e-3;
    let lp = lay.problem::<f64>();
    let opts = RankOptions {
        max_iter: 3000,
        tol: 1e-8,
        stagnation_window: 200,
        dykstra: false,
    };
    let sol = rank_projection_solve(&lp, &z, &opts);
    assert!(
        sol.converged,
        "residual {} gap {}",
        sol.residual, sol.rank_gap
    );
    let back = lay.recover(&sol.z);
    let jn = qls_core::symplectic::<f64>(2);
    let jr = qls_core::symplectic::<f64>(1);
    let lhs = &back.q1 * &jn * &back.q2;
    let rhs = &back.q2 * &jr * &back.q3;
    assert!((lhs - rhs).norm() < 1e-6);
}

#[test]
fn contradictory_couplings_stagnate() {
    // a diagonal entry pinned negative cannot coexist with Z ⪰ 0
    let mut b = LiftedBuilder::new(2, &["1", "x"]);
    b.fix_block("1", "1", &DMatrix::identity(2, 2));
    let e = b.at("x", "x", 0, 0);
    b.fix(e, -1.0);
    let lp = b.build::<f64>();
    let z0 = DMatrix::identity(4, 4);
    let opts = RankOptions {
        max_iter: 2000,
        tol: 1e-8,
        stagnation_window: 50,
        dykstra: false,
    };
    let sol = rank_projection_solve(&lp, &z0, &opts);
    assert!(!sol.converged);
    assert!(sol.stagnated);
    assert!(sol.iterations < 2000);
}

#[test]
fn dykstra_also_reaches_feasible_point() {
    let lay = LiftingLayout::new(LiftingKind::Commuting, 4, 2, false);
    let (q1, q2, q3) = feasible_blocks(4, 2, 1.1, 2.0, 0.5);
    let (_, z0) = lay.heuristic_start(&q1, &q2, &q3, None).unwrap();
    let z = &z0 + sym(&gaussian(z0.nrows(), z0.ncols(), 3)) * 1e-3;
    let lp = lay.problem::<f64>();
    let opts = RankOptions {
        max_iter: 3000,
        tol: 1e-6,
        stagnation_window: 300,
        dykstra: true,
    };
    let sol = rank_projection_solve(&lp, &z, &opts);
    assert!(sol.residual < 1e-4, "residual {}", sol.residual);
}
