use nalgebra::{Complex, DMatrix};
use qls_core::examples::{example_cascade, example_cascade_default, example_optomech_default};
use qls_core::system::mode_permutation;
use qls_core::{random_realizable, QuantumLinearSystem};
use qls_h2::{h2_norm_quadrature, h2_norm_system, transfer_eval};
use qls_reduce::{
    reduce_h2_pform, reduce_h2_qform, reduce_passive_pform, reduce_passive_qform,
    validate_reduction, ProjectionPair, ReduceError, ReduceOptions,
};

fn opts() -> ReduceOptions<f64> {
    ReduceOptions::default()
}

/// One mode on its own field with coupling `k` and detuning `omega`.
fn lone_mode(k: f64, omega: f64) -> QuantumLinearSystem<f64> {
    let s = k.sqrt();
    let a = DMatrix::from_row_slice(2, 2, &[-k / 2.0, omega, -omega, -k / 2.0]);
    let b = DMatrix::identity(2, 2) * s;
    let c = DMatrix::identity(2, 2) * -s;
    QuantumLinearSystem::new(1, 1, 1, a, b, c, DMatrix::identity(2, 2)).unwrap()
}

fn assert_certified(res: &qls_reduce::ReductionResult<f64>) {
    assert!(
        res.certified,
        "failed checks: {:?}",
        res.validation.failures()
    );
    let h2 = res.h2_error.unwrap();
    let gamma = res.gamma.unwrap();
    assert!(h2 <= gamma * (1.0 + 1e-6), "h2 {h2} above gamma {gamma}");
    assert!(res.projection.tv_residual() <= 1e-6);
    assert!(res.projection.intertwining_residual() <= 1e-6);
}

#[test]
fn order_must_be_between_one_and_n() {
    let full = example_optomech_default::<f64>();
    for r in [0, 3, 5] {
        assert!(matches!(
            reduce_h2_qform(&full, r, &opts()),
            Err(ReduceError::Order { .. })
        ));
        assert!(matches!(
            reduce_h2_pform(&full, r, &opts()),
            Err(ReduceError::Order { .. })
        ));
    }
    let cascade = example_cascade_default::<f64>();
    assert!(matches!(
        reduce_passive_pform(&cascade, 3, &opts()),
        Err(ReduceError::Order { .. })
    ));
}

#[test]
fn inputs_are_screened() {
    let active = example_optomech_default::<f64>();
    assert!(matches!(
        reduce_passive_qform(&active, 2, &opts()),
        Err(ReduceError::NotPassive { .. })
    ));

    let (mut a, b, c, d) = active.clone().into_parts();
    a[(0, 0)] += 0.5;
    let broken = QuantumLinearSystem::from_matrices(a, b, c, d).unwrap();
    assert!(matches!(
        reduce_h2_qform(&broken, 2, &opts()),
        Err(ReduceError::NotRealizable { .. })
    ));

    // a lossless mode is realizable but not Hurwitz
    let (_, b, c, d) = lone_mode(0.0, 1.0).into_parts();
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let lossless = QuantumLinearSystem::from_matrices(a, b, c, d)
        .unwrap()
        .direct_sum(&lone_mode(1.0, 0.0));
    assert!(matches!(
        reduce_h2_qform(&lossless, 1, &opts()),
        Err(ReduceError::Unstable { .. })
    ));
}

#[test]
fn optomech_qform_and_pform_agree() {
    let full = example_optomech_default::<f64>();
    let q = reduce_h2_qform(&full, 2, &opts()).unwrap();
    let p = reduce_h2_pform(&full, 2, &opts()).unwrap();
    assert_certified(&q);
    assert_certified(&p);
    let (hq, hp) = (q.h2_error.unwrap(), p.h2_error.unwrap());
    assert!(hq <= 528.36 * 1.10, "{hq}");
    assert!((hq - hp).abs() <= 1e-3 * hq, "qform {hq} vs pform {hp}");
    assert_eq!(q.reduced.d(), full.d());
    assert_eq!(q.reduced.n(), 2);
}

#[test]
fn cascade_passive_structure_is_exact() {
    let full = example_cascade_default::<f64>();
    for res in [
        reduce_passive_qform(&full, 2, &opts()).unwrap(),
        reduce_passive_pform(&full, 2, &opts()).unwrap(),
    ] {
        assert_certified(&res);
        assert!(res.passive);
        let r = &res.reduced;
        assert_eq!(r.b(), &(-r.c().transpose()));
        assert_eq!(r.d(), &DMatrix::identity(2, 2));
        assert!(res.passive_residuals.max() <= 1e-6 * r.block_scale());
        assert!(res.projection.symmetry_residual() <= 1e-6);
        assert!(res.h2_squared().unwrap() <= 1.02 * 1.10);
    }
}

#[test]
fn detuned_and_resonant_cascades_both_certify() {
    for omega in [[10.0, 10.0, 0.01], [0.0, 0.0, 0.0]] {
        let full = example_cascade(omega, [1.0, 1.0, 1.0]);
        let res = reduce_passive_qform(&full, 2, &opts()).unwrap();
        assert_certified(&res);
    }
}

#[test]
fn weak_decoupled_mode_is_discarded_within_its_norm() {
    for seed in 0..3 {
        let strong = random_realizable::<f64>(2, 1, seed, 1e-3).unwrap();
        let weak = lone_mode(1e-3, 3.0);
        let full = strong.direct_sum(&weak);
        let res = reduce_h2_qform(&full, 2, &opts()).unwrap();
        assert_certified(&res);
        let bound = h2_norm_system(&weak).unwrap().norm;
        assert!(
            res.h2_error.unwrap() <= bound * (1.0 + 1e-6),
            "seed {seed}: {} > {bound}",
            res.h2_error.unwrap()
        );
    }
}

#[test]
fn identical_passive_oscillators_reduce_to_one() {
    let osc = lone_mode(0.5, 2.0);
    let full = osc.direct_sum(&osc);
    assert!(full.passive_residuals().unwrap().max() < 1e-12);
    let res = reduce_passive_qform(&full, 1, &opts()).unwrap();
    assert_certified(&res);
    let bound = h2_norm_system(&osc).unwrap().norm;
    let h2 = res.h2_error.unwrap();
    assert!(h2 <= bound * (1.0 + 1e-6), "{h2} > {bound}");
    assert!(h2 >= bound * (1.0 - 1e-3), "{h2} well below {bound}");
}

#[test]
fn self_validation_passes_and_perturbation_fails() {
    let full = example_optomech_default::<f64>();
    let dim = 2 * full.n();
    let id = ProjectionPair::new(DMatrix::identity(dim, dim), DMatrix::identity(dim, dim));
    let rep = validate_reduction(&full, &full, Some(&id), false, None, &opts());
    assert!(rep.passed(), "{:?}", rep.failures());
    assert!(rep.h2.unwrap().norm < 1e-6 * h2_norm_system(&full).unwrap().norm);

    let res = reduce_h2_qform(&full, 2, &opts()).unwrap();
    let (mut a, b, c, d) = res.reduced.clone().into_parts();
    a[(0, 0)] -= 1e-2 * a.norm();
    let bent = QuantumLinearSystem::from_matrices(a, b, c, d).unwrap();
    let rep = validate_reduction(&full, &bent, None, false, None, &opts());
    assert!(rep.failures().iter().any(|c| c.name == "realizability"));
}

fn local_symplectic(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let x = 0.3 + 0.2 * k as f64;
        // [[a, b], [c, d]] with ad - bc = 1
        let (a, b, c) = (1.0 + x, x, 0.5 * x);
        let d = (1.0 + b * c) / a;
        s[(2 * k, 2 * k)] = a;
        s[(2 * k, 2 * k + 1)] = b;
        s[(2 * k + 1, 2 * k)] = c;
        s[(2 * k + 1, 2 * k + 1)] = d;
    }
    s
}

#[test]
fn reduction_is_covariant_under_symplectic_coordinates() {
    let full = random_realizable::<f64>(3, 2, 21, 1e-3).unwrap();
    let s = mode_permutation::<f64>(3, &[2, 0, 1]) * local_symplectic(3);
    let moved = full.similarity(&s).unwrap();
    assert!(moved.realizability_residuals().max() < 1e-10);

    let base = reduce_h2_qform(&full, 2, &opts()).unwrap();
    let other = reduce_h2_qform(&moved, 2, &opts()).unwrap();
    assert_certified(&base);
    assert_certified(&other);
    let (hb, ho) = (base.h2_error.unwrap(), other.h2_error.unwrap());
    assert!((hb - ho).abs() <= 1e-6 * hb, "{hb} vs {ho}");
    for w in [0.01, 0.3, 1.0, 3.0, 30.0] {
        let g1 = transfer_eval(&base.reduced, Complex::new(0.0, w)).unwrap();
        let g2 = transfer_eval(&other.reduced, Complex::new(0.0, w)).unwrap();
        let diff = (&g1 - &g2).map(|z| z.norm()).max();
        let size = g1.map(|z| z.norm()).max();
        assert!(diff <= 1e-6 * size, "omega {w}: {diff}");
    }
}

#[test]
fn quadrature_confirms_certified_error() {
    let full = random_realizable::<f64>(4, 2, 8, 1e-3).unwrap();
    let res = reduce_h2_pform(&full, 3, &opts()).unwrap();
    assert_certified(&res);
    let q = h2_norm_quadrature(&full, &res.reduced, &Default::default()).unwrap();
    let h2 = res.h2_error.unwrap();
    assert!((q.norm - h2).abs() <= 1e-3 * h2);
}
