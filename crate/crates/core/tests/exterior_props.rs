use hkcalib::exterior::{binomial, AlternatingForm, FrameMatrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn form(dim: usize, degree: usize) -> impl Strategy<Value = AlternatingForm> {
    prop::collection::vec(coeff(), binomial(dim, degree))
        .prop_map(move |c| AlternatingForm::from_coeffs(dim, degree, c).unwrap())
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(coeff(), dim)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(coeff(), rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn dim_and_degrees() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=7).prop_flat_map(|d| (Just(d), 0..=d)).prop_flat_map(|(d, a)| (Just(d), Just(a), 0..=(d - a)))
}

#[test]
fn monomials_evaluate_on_their_own_basis() {
    let e = AlternatingForm::monomial(6, &[1, 3, 4]).unwrap();
    let frame = DMatrix::from_fn(6, 3, |r, c| if r == [1, 3, 4][c] { 1.0 } else { 0.0 });
    assert_eq!(e.evaluate_matrix(&frame).unwrap(), 1.0);
    let swapped = DMatrix::from_fn(6, 3, |r, c| if r == [3, 1, 4][c] { 1.0 } else { 0.0 });
    assert_eq!(e.evaluate_matrix(&swapped).unwrap(), -1.0);
}

#[test]
fn repeated_index_monomial_vanishes() {
    let e = AlternatingForm::monomial(5, &[2, 2]).unwrap();
    assert!(e.is_zero(0.0));
}

#[test]
fn hodge_star_of_one_is_volume() {
    for d in 1..=8 {
        let one = AlternatingForm::scalar(d, 1.0).unwrap();
        assert_eq!(one.hodge_star(), AlternatingForm::volume(d).unwrap());
    }
}

#[test]
fn wedge_past_top_degree_is_rejected() {
    let a = AlternatingForm::volume(4).unwrap();
    let b = AlternatingForm::one_form(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(a.wedge(&b).is_err());
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let a = AlternatingForm::zero(4, 1).unwrap();
    let b = AlternatingForm::zero(5, 1).unwrap();
    assert!(a.try_add(&b).is_err());
    assert!(a.wedge(&b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative((d, a, b) in dim_and_degrees(), seed in any::<u64>()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut draw = |k: usize| {
            let c = (0..binomial(d, k)).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
            AlternatingForm::from_coeffs(d, k, c).unwrap()
        };
        let (x, y) = (draw(a), draw(b));
        let sign = if (a * b) % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = x.wedge(&y).unwrap();
        let rhs = y.wedge(&x).unwrap().scale(sign);
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn wedge_is_associative(x in form(6, 1), y in form(6, 2), z in form(6, 2)) {
        let lhs = x.wedge(&y).unwrap().wedge(&z).unwrap();
        let rhs = x.wedge(&y.wedge(&z).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn double_star_sign(d in 1usize..=7, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = ((d + 1) as f64 * k_frac) as usize % (d + 1);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let c = (0..binomial(d, k)).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = AlternatingForm::from_coeffs(d, k, c).unwrap();
        let sign = if (k * (d - k)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(f.hodge_star().hodge_star().approx_eq(&f.scale(sign), 1e-12));
    }

    #[test]
    fn hodge_star_is_an_isometry(f in form(6, 3)) {
        prop_assert!((f.hodge_star().norm() - f.norm()).abs() <= 1e-12);
    }

    #[test]
    fn star_pairs_with_volume(f in form(5, 2), g in form(5, 2)) {
        let top = f.wedge(&g.hodge_star()).unwrap();
        let expected = AlternatingForm::volume(5).unwrap().scale(f.inner_product(&g).unwrap());
        prop_assert!(top.approx_eq(&expected, 1e-12));
    }

    #[test]
    fn contraction_is_adjoint_to_wedge(f in form(6, 3), g in form(6, 2), v in vector(6)) {
        let lhs = f.contract(&v).unwrap().inner_product(&g).unwrap();
        let rhs = f.inner_product(&g.wedge_vector(&v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn contraction_squares_to_zero(f in form(6, 3), v in vector(6)) {
        prop_assert!(f.contract(&v).unwrap().contract(&v).unwrap().is_zero(1e-12));
    }

    #[test]
    fn evaluation_matches_iterated_contraction(f in form(6, 3), m in matrix(6, 3)) {
        let mut g = f.clone();
        for c in 0..3 {
            let col: Vec<f64> = m.column(c).iter().copied().collect();
            g = g.contract(&col).unwrap();
        }
        let direct = f.evaluate_matrix(&m).unwrap();
        prop_assert!((g.coeffs()[0] - direct).abs() <= 1e-12);
    }

    #[test]
    fn evaluation_is_alternating(f in form(5, 3), m in matrix(5, 3)) {
        let mut swapped = m.clone();
        swapped.swap_columns(0, 2);
        let a = f.evaluate_matrix(&m).unwrap();
        let b = f.evaluate_matrix(&swapped).unwrap();
        prop_assert!((a + b).abs() <= 1e-12);
    }

    #[test]
    fn decomposable_forms_pair_by_gram_determinant(a in matrix(6, 2), b in matrix(6, 2)) {
        let fa = AlternatingForm::decomposable(&a).unwrap();
        let fb = AlternatingForm::decomposable(&b).unwrap();
        let gram = a.transpose() * &b;
        prop_assert!((fa.inner_product(&fb).unwrap() - gram.determinant()).abs() <= 1e-12);
        prop_assert!((fa.evaluate_matrix(&b).unwrap() - gram.determinant()).abs() <= 1e-12);
    }

    #[test]
    fn pullback_is_multiplicative(f in form(5, 2), g in form(5, 1), a in matrix(5, 5)) {
        let lhs = f.wedge(&g).unwrap().pullback(&a).unwrap();
        let rhs = f.pullback(&a).unwrap().wedge(&g.pullback(&a).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-11));
    }

    #[test]
    fn pullback_of_volume_is_determinant(a in matrix(5, 5)) {
        let vol = AlternatingForm::volume(5).unwrap();
        let pulled = vol.pullback(&a).unwrap();
        prop_assert!((pulled.coeffs()[0] - a.determinant()).abs() <= 1e-11);
    }

    #[test]
    fn derivation_is_the_derivative_of_pullback(f in form(5, 2), a in matrix(5, 5)) {
        let h = 1e-6;
        let plus = f.pullback(&(DMatrix::identity(5, 5) + &a * h)).unwrap();
        let minus = f.pullback(&(DMatrix::identity(5, 5) - &a * h)).unwrap();
        let fd = (&plus - &minus).scale(0.5 / h);
        prop_assert!(fd.approx_eq(&f.derivation(&a).unwrap(), 1e-7));
    }

    #[test]
    fn derivation_obeys_leibniz(f in form(5, 2), g in form(5, 2), a in matrix(5, 5)) {
        let lhs = f.wedge(&g).unwrap().derivation(&a).unwrap();
        let rhs = &f.derivation(&a).unwrap().wedge(&g).unwrap() + &f.wedge(&g.derivation(&a).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn frame_columns_round_trip(m in matrix(7, 3)) {
        let cols: Vec<DVector<f64>> = (0..3).map(|c| m.column(c).into_owned()).collect();
        let frame = FrameMatrix::from_columns(&cols);
        prop_assert_eq!(frame.matrix(), &m);
        prop_assert_eq!(frame.k(), 3);
        prop_assert_eq!(frame.ambient_dim(), 7);
    }
}
