use hkcalib::catalog;
use hkcalib::comass::{
    class_within, comass_estimate, comass_exact_2form, stabilizer_dimension, stabilizer_report, tangent_projection,
    u1_face_criterion, verify_faces, ComassOptions, ComassStatus,
};
use hkcalib::catalog::FaceClass;
use hkcalib::exterior::{binomial, AlternatingForm};
use hkcalib::quaternionic::{QuaternionicModel, Structure};
use hkcalib::subspaces::{random_face, random_plane, standard_face, FaceKind};
use proptest::prelude::*;

fn model(n: usize) -> QuaternionicModel {
    QuaternionicModel::new(n).unwrap()
}

fn opts() -> ComassOptions {
    ComassOptions::default()
}

fn form(dim: usize, degree: usize) -> impl Strategy<Value = AlternatingForm> {
    prop::collection::vec(-1.0f64..1.0, binomial(dim, degree))
        .prop_map(move |c| AlternatingForm::from_coeffs(dim, degree, c).unwrap())
}

#[test]
fn reported_frame_witnesses_the_estimate() {
    let m = model(2);
    let f = catalog::bryant_harvey(&m, 1.0, 1.0, 1.0).unwrap().form;
    let r = comass_estimate(&f, 32, 7, &opts()).unwrap();
    let w = r.frame.clone().unwrap();
    assert!(w.frame.is_orthonormal(1e-12));
    assert!((w.evaluate(&f).unwrap() - r.comass).abs() < 1e-12);
    assert!((r.comass - 3.0).abs() < 1e-6);
    assert_eq!(r.status, ComassStatus::Converged);
    for mx in &r.maximizers {
        assert!((mx.frame.evaluate(&f).unwrap() - mx.value).abs() < 1e-12);
    }
}

#[test]
fn estimate_never_exceeds_the_exact_two_form_comass() {
    let m = model(2);
    for s in Structure::ALL {
        let r = comass_estimate(m.omega(s), 8, 1, &opts()).unwrap();
        assert!((r.comass - 1.0).abs() < 1e-9);
        assert!((comass_exact_2form(m.omega(s)).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn estimates_are_reproducible_for_a_seed() {
    let m = model(2);
    let f = catalog::theta(&m, 1).unwrap().form;
    let a = comass_estimate(&f, 16, 99, &opts()).unwrap();
    let b = comass_estimate(&f, 16, 99, &opts()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn zero_form_and_degenerate_inputs() {
    let r = comass_estimate(&AlternatingForm::zero(6, 2).unwrap(), 4, 0, &opts()).unwrap();
    assert_eq!(r.status, ComassStatus::ZeroForm);
    assert_eq!(r.comass, 0.0);
    assert!(comass_estimate(&AlternatingForm::scalar(4, 1.0).unwrap(), 4, 0, &opts()).is_err());
    assert!(comass_exact_2form(&AlternatingForm::zero(4, 3).unwrap()).is_err());
}

#[test]
fn bryant_harvey_inside_and_outside() {
    let m = model(2);
    for (l, mu, nu) in [(1.0, 0.0, 0.0), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), (1.0, -1.0, -1.0), (-1.0, 0.5, 0.5)] {
        let f = catalog::bryant_harvey(&m, l, mu, nu).unwrap().form;
        let c = comass_estimate(&f, 32, 3, &opts()).unwrap().comass;
        assert!(c <= 1.0 + 1e-6, "({l}, {mu}, {nu}) -> {c}");
    }
    for (l, mu, nu) in [(1.0, 1.0, 0.0), (1.25, 0.0, 0.0), (-1.0, -1.0, 0.5)] {
        let f = catalog::bryant_harvey(&m, l, mu, nu).unwrap().form;
        let c = comass_estimate(&f, 32, 3, &opts()).unwrap().comass;
        assert!(c > 1.0 + 1e-3, "({l}, {mu}, {nu}) -> {c}");
    }
}

#[test]
fn maximizers_of_theta_are_quaternionic() {
    let m = model(2);
    let nf = catalog::theta(&m, 1).unwrap();
    let mut r = comass_estimate(&nf.form, 32, 5, &opts()).unwrap();
    r.classify_faces(&m, Structure::I);
    assert_eq!(r.face_class, Some(FaceClass::Quaternionic));
    let positives: Vec<_> = (0..20).map(|s| random_face(&m, FaceKind::Quaternionic(1), s).unwrap()).collect();
    let negatives: Vec<_> = (0..20).map(|s| random_plane(8, 4, 100 + s).unwrap()).collect();
    let verdict = verify_faces(&nf, &m, &positives, &negatives, 1e-6, Some(&r)).unwrap();
    assert!(verdict.passed(), "{verdict:?}");
}

#[test]
fn class_compatibility() {
    assert!(class_within(FaceClass::ComplexLagrangian, FaceClass::ComplexCoisotropic));
    assert!(class_within(FaceClass::Quaternionic, FaceClass::ComplexCoisotropic));
    assert!(!class_within(FaceClass::Unclassified, FaceClass::ComplexCoisotropic));
    assert!(class_within(FaceClass::Complex, FaceClass::MixedPerRegion));
    assert!(!class_within(FaceClass::ComplexIsotropic, FaceClass::Quaternionic));
}

#[test]
fn u1_criterion_on_model_faces() {
    let m = model(2);
    let psi = catalog::psi(&m, 2).unwrap().form;
    let face = standard_face(&m, FaceKind::ComplexLagrangian).unwrap();
    let v = u1_face_criterion(&psi, &face, &m, Structure::I).unwrap();
    assert!(v.grid_verdict && v.direct_verdict && v.agree);
    assert_eq!(v.grid.len(), 10);
    assert!((v.weight_zero_value - 1.0).abs() < 1e-12);
    let mean = v.values.iter().sum::<f64>() / v.values.len() as f64;
    assert!((mean - v.weight_zero_value).abs() < 1e-12);

    let quat = standard_face(&m, FaceKind::Quaternionic(1)).unwrap();
    let v = u1_face_criterion(&psi, &quat, &m, Structure::I).unwrap();
    assert!(!v.grid_verdict && !v.direct_verdict && v.agree);

    let line = standard_face(&m, FaceKind::ComplexIsotropic(1)).unwrap();
    assert!(u1_face_criterion(&psi, &line, &m, Structure::I).is_err());
}

#[test]
fn stabilizers_of_classical_forms() {
    let m = model(2);
    assert_eq!(stabilizer_dimension(m.omega(Structure::I)).unwrap(), 36);
    assert_eq!(stabilizer_dimension(m.vol()).unwrap(), 63);
    assert_eq!(stabilizer_dimension(&catalog::theta(&m, 1).unwrap().form).unwrap(), 13);
    let m1 = model(1);
    let r = stabilizer_report(m1.omega(Structure::J)).unwrap();
    assert_eq!(r.kernel_dim, 10);
    assert!(r.well_conditioned);
    assert_eq!(r.rank + r.kernel_dim, 16);
}

#[test]
fn stabilizer_of_zero_form_is_everything() {
    let r = stabilizer_report(&AlternatingForm::zero(4, 2).unwrap()).unwrap();
    assert_eq!(r.kernel_dim, 16);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comass_is_homogeneous(f in form(6, 3), c in -3.0f64..3.0, seed in any::<u64>()) {
        let a = comass_estimate(&f, 12, seed, &opts()).unwrap().comass;
        let b = comass_estimate(&f.scale(c), 12, seed, &opts()).unwrap().comass;
        prop_assert!((b - c.abs() * a).abs() <= 1e-7 * (1.0 + a * c.abs()));
    }

    #[test]
    fn comass_is_subadditive(f in form(6, 2), g in form(6, 2)) {
        let sum = comass_exact_2form(&(&f + &g)).unwrap();
        let est = comass_estimate(&(&f + &g), 12, 0, &opts()).unwrap().comass;
        prop_assert!((sum - est).abs() < 1e-7);
        prop_assert!(sum <= comass_exact_2form(&f).unwrap() + comass_exact_2form(&g).unwrap() + 1e-12);
    }

    #[test]
    fn random_planes_are_below_the_estimate(f in form(6, 3), seed in any::<u64>()) {
        let c = comass_estimate(&f, 12, 1, &opts()).unwrap().comass;
        let w = random_plane(6, 3, seed).unwrap();
        prop_assert!(w.evaluate(&f).unwrap().abs() <= c + 1e-9);
    }

    #[test]
    fn tangent_projection_is_tangent(seed in any::<u64>(), g in form(8, 1)) {
        let q = random_plane(8, 3, seed).unwrap().frame.into_matrix();
        let raw = nalgebra::DMatrix::from_fn(8, 3, |r, c| g.coeffs()[(r + 3 * c) % 8]);
        let t = tangent_projection(&q, &raw);
        let m = q.transpose() * &t;
        prop_assert!((&m + m.transpose()).amax() < 1e-12);
    }
}
