use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use qls_core::{random_realizable, random_realizable_with_outputs, QuantumLinearSystem};
use qls_h2::{
    build_augmented, freq_response_export, h2_norm_gramian, h2_norm_quadrature, h2_norm_system,
    transfer_eval, Channel, FrequencyGrid, H2Error, QuadratureSpec,
};

/// Second system with the same `D` so the error system is strictly proper.
fn pair(
    seed: u64,
    n: usize,
    r: usize,
    m: usize,
) -> (QuantumLinearSystem<f64>, QuantumLinearSystem<f64>) {
    let full = random_realizable::<f64>(n, m, seed, 1e-3).unwrap();
    let red = random_realizable::<f64>(r, m, seed ^ 0x9e37_79b9, 1e-3).unwrap();
    (full, red)
}

#[test]
fn gramian_and_quadrature_agree_on_twenty_seeds() {
    for seed in 0..20 {
        let n = 2 + seed as usize % 4;
        let (full, red) = pair(seed, n, n - 1, 1 + seed as usize % 3);
        let g = h2_norm_gramian(&full, &red).unwrap();
        let q = h2_norm_quadrature(&full, &red, &QuadratureSpec::default()).unwrap();
        assert!(
            (q.norm / g.norm - 1.0).abs() < 1e-3,
            "seed {seed}: {} vs {}",
            q.norm,
            g.norm
        );
        assert!(
            (g.via_b - g.via_c).abs() <= 1e-8 * g.via_b.abs(),
            "seed {seed}"
        );
    }
}

#[test]
fn feedthrough_mismatch_is_an_error() {
    let full = random_realizable_with_outputs::<f64>(2, 2, 2, 1, 1e-3).unwrap();
    let red = full.clone();
    let mut d = red.d().clone();
    d[(0, 0)] = -1.0;
    let red = QuantumLinearSystem::new(
        2,
        2,
        2,
        red.a().clone(),
        red.b().clone(),
        red.c().clone(),
        d,
    )
    .unwrap();
    assert!(matches!(
        build_augmented(&full, &red),
        Err(H2Error::FeedthroughMismatch)
    ));
}

#[test]
fn bode_header_names_system_and_channel() {
    let (full, red) = pair(4, 3, 2, 1);
    let grid: FrequencyGrid = "1e-1:1e1:5".parse().unwrap();
    let t = freq_response_export(
        &[("full", &full), ("red", &red)],
        &grid,
        &[Channel::new(1, 1)],
    )
    .unwrap();
    let csv = t.to_csv();
    assert_eq!(
        csv.lines().next().unwrap(),
        "omega,full_o2i2_mag_db,full_o2i2_phase_deg,red_o2i2_mag_db,red_o2i2_phase_deg"
    );
    assert_eq!(csv.lines().count(), 1 + grid.points().len());
    assert!(!csv.contains('\r'));
    assert!(freq_response_export(&[("full", &full)], &grid, &[Channel::new(5, 0)]).is_err());
}

#[test]
fn unstable_reduced_model_is_rejected() {
    let (full, red) = pair(9, 2, 1, 1);
    let flipped = QuantumLinearSystem::new(
        1,
        1,
        1,
        -red.a().clone(),
        red.b().clone(),
        red.c().clone(),
        red.d().clone(),
    )
    .unwrap();
    assert!(matches!(
        h2_norm_gramian(&full, &flipped),
        Err(H2Error::Unstable {
            which: "reduced",
            ..
        })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn conjugate_symmetry(seed in any::<u64>(), w in 0.01f64..100.0) {
        let s = random_realizable::<f64>(3, 2, seed, 1e-3).unwrap();
        let up = transfer_eval(&s, Complex::new(0.0, w)).unwrap();
        let down = transfer_eval(&s, Complex::new(0.0, -w)).unwrap();
        prop_assert!((up.conjugate() - down).norm() <= 1e-10 * up.norm().max(1.0));
    }

    #[test]
    fn similarity_invariance(seed in any::<u64>()) {
        let s = random_realizable::<f64>(3, 1, seed, 1e-3).unwrap();
        let t = DMatrix::<f64>::identity(6, 6) + DMatrix::from_fn(6, 6, |i, j| 0.1 * (((i * 7 + j * 3) % 5) as f64 - 2.0));
        let u = s.similarity(&t).unwrap();
        let a = h2_norm_system(&s).unwrap().norm;
        let b = h2_norm_system(&u).unwrap().norm;
        prop_assert!((a - b).abs() <= 1e-7 * a.max(1.0));
    }

    #[test]
    fn copy_has_zero_error_and_norm_is_symmetric(seed in any::<u64>()) {
        let (full, red) = pair(seed, 3, 2, 1);
        prop_assert!(h2_norm_gramian(&full, &full).unwrap().norm <= 1e-6 * h2_norm_system(&full).unwrap().norm);
        let ab = h2_norm_gramian(&full, &red).unwrap().norm;
        let ba = h2_norm_gramian(&red, &full).unwrap().norm;
        prop_assert!((ab - ba).abs() <= 1e-8 * ab);
    }
}
