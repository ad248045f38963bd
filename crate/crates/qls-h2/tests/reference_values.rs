use qls_core::examples::{printed_cascade_reduced, printed_optomech_reduced};
use qls_core::{example_cascade_default, example_optomech_default};
use qls_h2::{
    h2_norm_gramian, h2_norm_gramian_unchecked, h2_norm_quadrature, h2_norm_system, QuadratureSpec,
};
use qls_linsolve::is_hurwitz;

#[test]
fn printed_optomech_model_error() {
    let full = example_optomech_default::<f64>();
    let red = printed_optomech_reduced();
    // the printed (rounded) A_r has two eigenvalues close to the imaginary axis,
    // one of them in the right half plane, so only the algebraic trace value exists
    assert!(!is_hurwitz(red.a(), 0.0).stable);
    let rep = h2_norm_gramian_unchecked(&full, &red).unwrap();
    assert!((rep.norm / 528.36 - 1.0).abs() < 0.02, "{}", rep.norm);
    assert!(h2_norm_gramian(&full, &red).is_err());
}

#[test]
fn printed_cascade_model_error() {
    let full = example_cascade_default::<f64>();
    let red = printed_cascade_reduced();
    let rep = h2_norm_gramian(&full, &red).unwrap();
    assert!((rep.squared / 1.02 - 1.0).abs() < 0.05, "{}", rep.squared);
    let q = h2_norm_quadrature(&full, &red, &QuadratureSpec::default()).unwrap();
    assert!(
        (q.squared / rep.squared - 1.0).abs() < 1e-3,
        "{} vs {}",
        q.squared,
        rep.squared
    );
}

#[test]
fn optomech_full_norm_matches_quadrature() {
    let full = example_optomech_default::<f64>();
    let rep = h2_norm_system(&full).unwrap();
    assert!(rep.norm > 0.0 && rep.norm.is_finite());
    let zero = {
        // a reduced model that is "nothing": one far, fully decoupled mode
        use nalgebra::DMatrix;
        qls_core::QuantumLinearSystem::new(
            1,
            3,
            1,
            DMatrix::identity(2, 2) * -1e3,
            DMatrix::zeros(2, 6),
            DMatrix::zeros(2, 2),
            full.d().clone(),
        )
        .unwrap()
    };
    let q = h2_norm_quadrature(&full, &zero, &QuadratureSpec::default()).unwrap();
    assert!(
        (q.squared / rep.squared - 1.0).abs() < 1e-3,
        "{} vs {}",
        q.squared,
        rep.squared
    );
}
