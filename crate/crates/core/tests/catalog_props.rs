use hkcalib::catalog::{self, FaceClass, FormName, NamedForm};
use hkcalib::exterior::AlternatingForm;
use hkcalib::quaternionic::{QuaternionicModel, Structure};
use hkcalib::subspaces::{random_plane, standard_face, FaceKind};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn model(n: usize) -> QuaternionicModel {
    QuaternionicModel::new(n).unwrap()
}

fn catalogue(m: &QuaternionicModel) -> Vec<NamedForm> {
    let n = m.n();
    let mut out = Vec::new();
    for p in 1..=n {
        out.push(catalog::theta(m, p).unwrap());
        out.push(catalog::xi(m, p).unwrap());
        out.push(catalog::psi_pp(m, p).unwrap());
    }
    for p in 0..=n {
        let (re, im) = catalog::phi_coisotropic(m, p).unwrap();
        out.push(re);
        out.push(im);
    }
    for i in 0..=n {
        out.push(catalog::sl_forms(m, i).unwrap());
    }
    out
}

#[test]
fn c_constants_start_at_k_zero() {
    assert_eq!(catalog::c_constant(0), 1.0);
    assert_eq!(catalog::c_constant(1), 6.0);
    assert_eq!(catalog::c_constant(2), 120.0);
    assert_eq!(catalog::c_constant(3), 5040.0);
}

#[test]
fn theta_hodge_dual_is_complementary_theta() {
    for n in 2..=3 {
        let m = model(n);
        for p in 1..n {
            let star = catalog::theta(&m, p).unwrap().form.hodge_star();
            let other = catalog::theta(&m, n - p).unwrap().form;
            assert!(star.approx_eq(&other, 1e-12), "n = {n}, p = {p}");
        }
        assert!(catalog::theta(&m, n).unwrap().form.approx_eq(m.vol(), 1e-12));
    }
}

#[test]
fn coisotropic_form_at_p_zero_is_the_lagrangian_form() {
    for n in 1..=3 {
        let m = model(n);
        let (phi0, _) = catalog::phi_coisotropic(&m, 0).unwrap();
        let psi = catalog::psi_pp(&m, n).unwrap().form;
        assert!(phi0.form.approx_eq(&psi, 1e-12), "n = {n}");
    }
}

#[test]
fn top_coisotropic_form_is_the_volume() {
    for n in 1..=3 {
        let m = model(n);
        let (phi, _) = catalog::phi_coisotropic(&m, n).unwrap();
        assert!(phi.form.approx_eq(m.vol(), 1e-12), "n = {n}");
    }
}

#[test]
fn sl_forms_calibrate_j_complex_faces() {
    for n in 1..=3 {
        let m = model(n);
        let swapped = m.cycled();
        for i in 0..=n {
            let v = catalog::sl_forms(&m, i).unwrap();
            assert_eq!(v.face_structure, Structure::J);
            let kind = if i == 0 { FaceKind::ComplexLagrangian } else { FaceKind::ComplexCoisotropic(i) };
            let face = standard_face(&swapped, kind).unwrap();
            assert!((face.evaluate(&v.form).unwrap() - 1.0).abs() < 1e-12, "n = {n}, i = {i}");
        }
    }
}

#[test]
fn sl_forms_scale_conformally() {
    let c = 1.7;
    for n in 1..=2 {
        let base = model(n);
        let scaled = QuaternionicModel::with_metric_scale(n, c).unwrap();
        for i in 0..=n {
            let a = catalog::sl_forms(&base, i).unwrap().form;
            let b = catalog::sl_forms(&scaled, i).unwrap().form;
            assert!(b.approx_eq(&a.scale(c.powi((n + i) as i32)), 1e-10), "n = {n}, i = {i}");
        }
    }
}

#[test]
fn catalogue_forms_take_value_one_on_standard_faces() {
    for n in 1..=3 {
        let m = model(n);
        for nf in catalogue(&m) {
            if nf.name == FormName::PhiCoisoIm {
                continue;
            }
            let face_model = if nf.face_structure == Structure::J { m.cycled() } else { model(n) };
            let kind = nf.standard_face_kind().unwrap();
            let face = standard_face(&face_model, kind).unwrap();
            let v = face.evaluate(&nf.form).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{:?} {:?}: {v}", nf.name, nf.params);
        }
    }
}

#[test]
fn imaginary_coisotropic_part_vanishes_on_the_standard_face() {
    for n in 1..=3 {
        let m = model(n);
        for p in 0..=n {
            let (_, im) = catalog::phi_coisotropic(&m, p).unwrap();
            let face = standard_face(&m, FaceKind::ComplexCoisotropic(p)).unwrap();
            assert!(face.evaluate(&im.form).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn theta_and_xi_agree_on_quaternionic_faces_only() {
    let m = model(2);
    for p in 1..=2 {
        let t = catalog::theta(&m, p).unwrap().form;
        let x = catalog::xi(&m, p).unwrap().form;
        let face = standard_face(&m, FaceKind::Quaternionic(p)).unwrap();
        assert!((face.evaluate(&t).unwrap() - face.evaluate(&x).unwrap()).abs() < 1e-12);
    }
    let t = catalog::theta(&m, 1).unwrap().form;
    let x = catalog::xi(&m, 1).unwrap().form;
    assert!(!t.approx_eq(&x, 1e-6));
}

#[test]
fn psi_pp_is_weakly_positive_on_complex_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let m = model(n);
        let psi = catalog::psi_pp(&m, n).unwrap().form;
        let i = m.op(Structure::I);
        for _ in 0..100 {
            let mut cols = Vec::new();
            for _ in 0..n {
                let v = DVector::<f64>::from_fn(4 * n, |_, _| StandardNormal.sample(&mut rng));
                cols.push(v.clone());
                cols.push(i * v);
            }
            let w = DMatrix::from_columns(&cols);
            assert!(psi.evaluate_matrix(&w).unwrap() >= -1e-12);
        }
    }
}

#[test]
fn bryant_harvey_region_boundaries() {
    assert!(catalog::bryant_harvey_region(1.0, 0.0, 0.0));
    assert!(catalog::bryant_harvey_region(1.0, -1.0, -1.0));
    assert!(catalog::bryant_harvey_region(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));
    assert!(!catalog::bryant_harvey_region(1.0, 1.0, 0.0));
    assert!(!catalog::bryant_harvey_region(1.25, 0.0, 0.0));
    assert!(!catalog::bryant_harvey_region(-1.0, -1.0, 0.5));
}

#[test]
fn bryant_harvey_face_subfamilies() {
    assert_eq!(catalog::bryant_harvey_face_kind(0.5, 0.5, 0.0, 2), Some(FaceKind::Quaternionic(1)));
    assert_eq!(catalog::bryant_harvey_face_kind(1.0, -0.5, -0.25, 2), Some(FaceKind::ComplexLagrangian));
    assert_eq!(catalog::bryant_harvey_face_kind(1.0, -0.5, -0.25, 3), Some(FaceKind::ComplexIsotropic(2)));
    assert_eq!(catalog::bryant_harvey_face_kind(0.2, 0.2, 0.2, 2), None);
    let nf = catalog::bryant_harvey(&model(2), 1.0, -0.5, -0.25).unwrap();
    assert_eq!(nf.claimed_face_class, FaceClass::MixedPerRegion);
    assert_eq!(nf.effective_face_class(), FaceClass::ComplexLagrangian);
    assert_eq!(nf.region_ok, Some(true));
}

#[test]
fn lemma_constants_are_exact() {
    for n in 1..=3 {
        let m = model(n);
        assert!(catalog::lemma_holomorphic_volume(&m).unwrap().passes(catalog::IDENTITY_TOL));
        assert!(catalog::lemma_quartic_power(&m).unwrap().passes(catalog::IDENTITY_TOL));
        for k in 0..=n {
            let c = catalog::lemma_coisotropic_volume(&m, k).unwrap();
            assert!(c.passes(catalog::IDENTITY_TOL), "{c:?}");
        }
    }
}

#[test]
fn out_of_range_parameters_are_errors() {
    let m = model(2);
    assert!(catalog::theta(&m, 0).is_err());
    assert!(catalog::theta(&m, 3).is_err());
    assert!(catalog::phi_coisotropic(&m, 3).is_err());
    assert!(catalog::sl_forms(&m, 3).is_err());
}

#[test]
fn catalogue_entry_json_shape() {
    let nf = catalog::psi_pp(&model(2), 2).unwrap();
    let json = serde_json::to_value(nf.entry()).unwrap();
    let obj = json.as_object().unwrap();
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    assert_eq!(keys, ["coeff_vector", "degree", "face_class", "name", "params", "region_ok"]);
    assert_eq!(obj["name"], "psi_pp");
    assert_eq!(obj["face_class"], "complex_lagrangian");
    assert_eq!(obj["degree"], 4);
    assert_eq!(obj["coeff_vector"].as_array().unwrap().len(), 70);
    assert_eq!(obj["params"]["n"], 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn calibrations_are_bounded_by_one_on_random_planes(seed in any::<u64>()) {
        let m = model(2);
        for nf in catalogue(&m) {
            if nf.name == FormName::PhiCoisoIm {
                continue;
            }
            let w = random_plane(8, nf.degree(), seed).unwrap();
            let v = w.evaluate(&nf.form).unwrap();
            prop_assert!(v <= 1.0 + 1e-12, "{:?} {:?}: {}", nf.name, nf.params, v);
        }
    }

    #[test]
    fn bryant_harvey_is_linear_in_parameters(l in -1.0f64..1.0, mu in -1.0f64..1.0, nu in -1.0f64..1.0) {
        let m = model(2);
        let f = catalog::bryant_harvey(&m, l, mu, nu).unwrap().form;
        let parts: Vec<AlternatingForm> = Structure::ALL
            .iter()
            .map(|&s| m.omega(s).wedge(m.omega(s)).unwrap().scale(0.5))
            .collect();
        let expected = &(&parts[0].scale(l) + &parts[1].scale(mu)) + &parts[2].scale(nu);
        prop_assert!(f.approx_eq(&expected, 1e-14));
    }
}
