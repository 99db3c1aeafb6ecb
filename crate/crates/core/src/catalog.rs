//! Named calibration forms on `H^n` and the normalization identities behind them.
//!
//! Each form carries the pairing it is defined with; no attempt is made to
//! reconcile different pairings that appear for the "same" object:
//!
//! | form | definition |
//! |------|-----------|
//! | `Omega_I` | `omega_J + i omega_K`, type (2,0) for `I` |
//! | `Omega_J` | `omega_I - i omega_K`, the pairing of `Psi_p` and `Phi_p` |
//! | `Theta_p` | `(omega_I^2 + omega_J^2 + omega_K^2)^p / c_p` |
//! | `Xi_p` | `(omega_J^2 + omega_K^2)^p / ((p!)^2 4^p)` |
//! | `Psi_p` | `Re(Omega_J^p) / p!`; `Psi^{p,p}_I` its (p,p)-part for `I` |
//! | `Phi_p + i Phi'_p` | (n+p,n+p)-parts of `Omega_J^n ^ omega_I^p / (2^p p! n!)` |
//! | `Psi_{l,m,v}` | `(l omega_I^2 + m omega_J^2 + v omega_K^2) / 2` |
//! | `Phi_I` | `(omega_J + i omega_K)^n / n!`, norm `2^n` |
//! | `V_{n+i,n+i}` | `Re((Phi_I)^{n,n}_J ^ omega_J^i) / (2^i i!)` |
//!
//! With `Omega_J = omega_I - i omega_K` the real form `Psi^{p,p}_I` evaluates to
//! `+1` on `span(e_1, Ie_1, ..., e_p, Ie_p)` in that order. The 4-form obtained
//! from the pairing `omega_K + i omega_I` is its negative,
//! `-omega_I^2/2 + (omega_J^2 + omega_K^2)/4`; see [`psi_pp_of_pairing`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, AlternatingForm};
use crate::quaternionic::{ComplexForm, QuaternionicModel, Structure};
use crate::subspaces::{standard_face, FaceKind};

pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormName {
    ThetaP,
    XiP,
    PsiP,
    PsiPp,
    PhiCoiso,
    PhiCoisoIm,
    BryantHarvey,
    VnnSl,
    VniSl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceClass {
    Quaternionic,
    ComplexLagrangian,
    ComplexIsotropic,
    ComplexCoisotropic,
    MixedPerRegion,
    /// Complex for the designated structure but of no narrower class.
    Complex,
    /// Faces not described by one of the other classes (e.g. the special
    /// Lagrangian faces of the full `Psi_p`).
    Unclassified,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FormParams {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedForm {
    pub name: FormName,
    pub params: FormParams,
    pub form: AlternatingForm,
    pub claimed_face_class: FaceClass,
    /// Complex structure in which the faces are complex.
    pub face_structure: Structure,
    pub region_ok: Option<bool>,
}

/// JSON shape of a catalogue entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: FormName,
    pub params: FormParams,
    pub degree: usize,
    pub coeff_vector: Vec<f64>,
    pub face_class: FaceClass,
    pub region_ok: Option<bool>,
}

impl NamedForm {
    pub fn degree(&self) -> usize {
        self.form.degree()
    }

    pub fn entry(&self) -> CatalogEntry {
        CatalogEntry {
            name: self.name,
            params: self.params.clone(),
            degree: self.form.degree(),
            coeff_vector: self.form.coeffs().to_vec(),
            face_class: self.claimed_face_class,
            region_ok: self.region_ok,
        }
    }

    /// Model face of the claimed class, when there is a single one.
    pub fn standard_face_kind(&self) -> Option<FaceKind> {
        let n = self.params.n;
        match self.name {
            FormName::ThetaP | FormName::XiP => self.params.p.map(FaceKind::Quaternionic),
            FormName::PsiPp => self.params.p.map(|p| {
                if p == n {
                    FaceKind::ComplexLagrangian
                } else {
                    FaceKind::ComplexIsotropic(p)
                }
            }),
            FormName::PhiCoiso | FormName::PhiCoisoIm => self.params.p.map(FaceKind::ComplexCoisotropic),
            FormName::VnnSl => Some(FaceKind::ComplexLagrangian),
            FormName::VniSl => self.params.i.map(FaceKind::ComplexCoisotropic),
            FormName::BryantHarvey => {
                let (l, m, v) = (self.params.lambda?, self.params.mu?, self.params.nu?);
                bryant_harvey_face_kind(l, m, v, n)
            }
            FormName::PsiP => None,
        }
    }

    /// The claimed class, narrowed to a single class where the parameters allow.
    pub fn effective_face_class(&self) -> FaceClass {
        match (self.claimed_face_class, self.standard_face_kind()) {
            (FaceClass::MixedPerRegion, Some(FaceKind::Quaternionic(_))) => FaceClass::Quaternionic,
            (FaceClass::MixedPerRegion, Some(FaceKind::ComplexLagrangian)) => FaceClass::ComplexLagrangian,
            (FaceClass::MixedPerRegion, Some(FaceKind::ComplexIsotropic(_))) => FaceClass::ComplexIsotropic,
            (c, _) => c,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_p(model: &QuaternionicModel, p: usize, min: usize) -> Result<()> {
    if p < min || p > model.n() {
        return Err(Error::OutOfRange(format!("p = {p} for n = {}", model.n())));
    }
    Ok(())
}

/// `c_p = sum_{k=0}^{p} (p!)^2 / (k!)^2 (2k)! 4^{p-k}`, exact in integers.
pub fn c_constant(p: usize) -> f64 {
    let fact = |m: usize| (1..=m as u128).product::<u128>();
    let total: u128 = (0..=p)
        .map(|k| {
            let ratio = fact(p) / fact(k);
            ratio * ratio * fact(2 * k) * 4u128.pow((p - k) as u32)
        })
        .sum();
    total as f64
}

fn square(f: &AlternatingForm) -> AlternatingForm {
    f.wedge(f).expect("2-form squares fit")
}

/// `omega_I^2 + omega_J^2 + omega_K^2`.
pub fn sp1_invariant_quartic(model: &QuaternionicModel) -> AlternatingForm {
    Structure::ALL.iter().map(|&s| square(model.omega(s))).reduce(|a, b| &a + &b).expect("three terms")
}

/// `omega_J^2 + omega_K^2 = Omega_I ^ conj(Omega_I)`.
pub fn transverse_quartic(model: &QuaternionicModel) -> AlternatingForm {
    &square(model.omega(Structure::J)) + &square(model.omega(Structure::K))
}

pub fn theta(model: &QuaternionicModel, p: usize) -> Result<NamedForm> {
    check_p(model, p, 1)?;
    let form = sp1_invariant_quartic(model).wedge_power(p)?.scale(1.0 / c_constant(p));
    Ok(NamedForm {
        name: FormName::ThetaP,
        params: FormParams { n: model.n(), p: Some(p), ..Default::default() },
        form,
        claimed_face_class: FaceClass::Quaternionic,
        face_structure: Structure::I,
        region_ok: None,
    })
}

pub fn xi(model: &QuaternionicModel, p: usize) -> Result<NamedForm> {
    check_p(model, p, 1)?;
    let norm = factorial(p).powi(2) * 4f64.powi(p as i32);
    let form = transverse_quartic(model).wedge_power(p)?.scale(1.0 / norm);
    Ok(NamedForm {
        name: FormName::XiP,
        params: FormParams { n: model.n(), p: Some(p), ..Default::default() },
        form,
        claimed_face_class: FaceClass::Quaternionic,
        face_structure: Structure::I,
        region_ok: None,
    })
}

/// `Omega_J = omega_I - i omega_K`.
pub fn omega_j_pairing(model: &QuaternionicModel) -> ComplexForm {
    ComplexForm { re: model.omega(Structure::I).clone(), im: -model.omega(Structure::K) }
}

/// `Re(Omega_J^p) / p!`, defined whenever `2p <= 4n`.
pub fn psi_form(model: &QuaternionicModel, p: usize) -> Result<AlternatingForm> {
    Ok(omega_j_pairing(model).wedge_power(p)?.re.scale(1.0 / factorial(p)))
}

pub fn psi(model: &QuaternionicModel, p: usize) -> Result<NamedForm> {
    check_p(model, p, 1)?;
    Ok(NamedForm {
        name: FormName::PsiP,
        params: FormParams { n: model.n(), p: Some(p), ..Default::default() },
        form: psi_form(model, p)?,
        claimed_face_class: FaceClass::Unclassified,
        face_structure: Structure::I,
        region_ok: None,
    })
}

/// `(p,p)_I`-part of `Re(Omega_J^p) / p!` through the weight projection; no
/// restriction on `p` beyond `2p <= 4n`.
pub fn projected_psi_pp(model: &QuaternionicModel, p: usize) -> Result<AlternatingForm> {
    model.real_pp_part(&psi_form(model, p)?, Structure::I)
}

pub fn psi_pp(model: &QuaternionicModel, p: usize) -> Result<NamedForm> {
    check_p(model, p, 1)?;
    let class = if p == model.n() { FaceClass::ComplexLagrangian } else { FaceClass::ComplexIsotropic };
    Ok(NamedForm {
        name: FormName::PsiPp,
        params: FormParams { n: model.n(), p: Some(p), ..Default::default() },
        form: projected_psi_pp(model, p)?,
        claimed_face_class: class,
        face_structure: Structure::I,
        region_ok: None,
    })
}

/// `(1/p!) sum_{k <= p/2} (-1)^k / 4^k C(p,2k) C(2k,k) omega_I^{p-2k} ^ (omega_K^2 + omega_J^2)^k`.
pub fn explicit_psi_pp(model: &QuaternionicModel, p: usize) -> Result<AlternatingForm> {
    let d = model.dim();
    if 2 * p > d {
        return Err(Error::DegreeOverflow { degree: 2 * p, dim: d });
    }
    let wi = model.omega(Structure::I);
    let q4 = transverse_quartic(model);
    let mut acc = AlternatingForm::zero(d, 2 * p)?;
    for k in 0..=p / 2 {
        let c = (-1f64).powi(k as i32) / 4f64.powi(k as i32)
            * binomial(p, 2 * k) as f64
            * binomial(2 * k, k) as f64;
        let term = wi.wedge_power(p - 2 * k)?.wedge(&q4.wedge_power(k)?)?;
        acc += &term.scale(c);
    }
    Ok(acc.scale(1.0 / factorial(p)))
}

/// `(p,p)_I`-part of `Re((re + i im)^p) / p!` for an arbitrary pair of real 2-forms.
pub fn psi_pp_of_pairing(
    model: &QuaternionicModel,
    re: &AlternatingForm,
    im: &AlternatingForm,
    p: usize,
) -> Result<AlternatingForm> {
    let z = ComplexForm::new(re.clone(), im.clone())?;
    let power = z.wedge_power(p)?.re.scale(1.0 / factorial(p));
    model.real_pp_part(&power, Structure::I)
}

/// `Re(omega_I + i omega_J)^n |^{n,n}_I` without factorial normalization, the
/// form entering the coisotropic volume identity.
pub fn lemma_psi_n(model: &QuaternionicModel) -> Result<AlternatingForm> {
    let n = model.n();
    Ok(psi_pp_of_pairing(model, model.omega(Structure::I), model.omega(Structure::J), n)?.scale(factorial(n)))
}

/// Real and imaginary `(n+p,n+p)_I`-parts of `Omega_J^n ^ omega_I^p / (2^p p! n!)`.
pub fn phi_coisotropic(model: &QuaternionicModel, p: usize) -> Result<(NamedForm, NamedForm)> {
    check_p(model, p, 0)?;
    let n = model.n();
    let norm = 2f64.powi(p as i32) * factorial(p) * factorial(n);
    let raw = omega_j_pairing(model)
        .wedge_power(n)?
        .wedge_real(&model.omega(Structure::I).wedge_power(p)?)?;
    let part = model.hodge_part(&raw, Structure::I, n + p, n + p)?;
    let make = |name, form: AlternatingForm| NamedForm {
        name,
        params: FormParams { n, p: Some(p), ..Default::default() },
        form: form.scale(1.0 / norm),
        claimed_face_class: FaceClass::ComplexCoisotropic,
        face_structure: Structure::I,
        region_ok: None,
    };
    Ok((make(FormName::PhiCoiso, part.re), make(FormName::PhiCoisoIm, part.im)))
}

/// Membership in `-1 <= l, m, v <= 1`, `-1 <= l + m + v <= 1`.
pub fn bryant_harvey_region(lambda: f64, mu: f64, nu: f64) -> bool {
    let inside = |x: f64| (-1.0..=1.0).contains(&x);
    inside(lambda) && inside(mu) && inside(nu) && inside(lambda + mu + nu)
}

/// Face kind of `Psi_{l,m,v}` on the two sub-families with a single face class:
/// quaternionic lines for `l, m, v >= 0` summing to 1 with two of them nonzero,
/// and `I`-complex `Omega_I`-isotropic 4-planes for `l = 1`, `m, v <= 0`,
/// `m + v >= -1` with two of the three inequalities strict.
pub fn bryant_harvey_face_kind(lambda: f64, mu: f64, nu: f64, n: usize) -> Option<FaceKind> {
    let eps = 1e-12;
    let params = [lambda, mu, nu];
    let nonzero = params.iter().filter(|x| x.abs() > eps).count();
    if params.iter().all(|&x| x >= -eps) && (lambda + mu + nu - 1.0).abs() <= eps && nonzero >= 2 {
        return Some(FaceKind::Quaternionic(1));
    }
    let strict = [mu < -eps, nu < -eps, mu + nu > -1.0 + eps].iter().filter(|&&b| b).count();
    if n >= 2 && (lambda - 1.0).abs() <= eps && mu <= eps && nu <= eps && mu + nu >= -1.0 - eps && strict >= 2 {
        return Some(if n == 2 { FaceKind::ComplexLagrangian } else { FaceKind::ComplexIsotropic(2) });
    }
    None
}

pub fn bryant_harvey(model: &QuaternionicModel, lambda: f64, mu: f64, nu: f64) -> Result<NamedForm> {
    let [a, b, c] = Structure::ALL.map(|s| square(model.omega(s)));
    let form = &(&a.scale(lambda / 2.0) + &b.scale(mu / 2.0)) + &c.scale(nu / 2.0);
    Ok(NamedForm {
        name: FormName::BryantHarvey,
        params: FormParams { n: model.n(), lambda: Some(lambda), mu: Some(mu), nu: Some(nu), ..Default::default() },
        form,
        claimed_face_class: FaceClass::MixedPerRegion,
        face_structure: Structure::I,
        region_ok: Some(bryant_harvey_region(lambda, mu, nu)),
    })
}

/// `Phi_I = (omega_J + i omega_K)^n / n!`.
pub fn holomorphic_volume(model: &QuaternionicModel) -> Result<ComplexForm> {
    let n = model.n();
    Ok(model
        .holomorphic_symplectic(Structure::I)
        .wedge_power(n)?
        .scale(num_complex::Complex64::new(1.0 / factorial(n), 0.0)))
}

/// `V_{n+i,n+i} = Re((Phi_I)^{n,n}_J ^ omega_J^i) / (2^i i!)`; `i = 0` is the
/// Lagrangian form `Re((Phi_I)^{n,n}_J)`. Faces are `J`-complex.
pub fn sl_forms(model: &QuaternionicModel, i: usize) -> Result<NamedForm> {
    let n = model.n();
    if i > n {
        return Err(Error::OutOfRange(format!("i = {i} for n = {n}")));
    }
    let phi = holomorphic_volume(model)?;
    let nn = model.hodge_part(&phi, Structure::J, n, n)?;
    let form = nn.re.wedge(&model.omega(Structure::J).wedge_power(i)?)?;
    let form = form.scale(1.0 / (2f64.powi(i as i32) * factorial(i)));
    let (name, class) = if i == 0 {
        (FormName::VnnSl, FaceClass::ComplexLagrangian)
    } else {
        (FormName::VniSl, FaceClass::ComplexCoisotropic)
    };
    Ok(NamedForm {
        name,
        params: FormParams { n, i: Some(i), ..Default::default() },
        form,
        claimed_face_class: class,
        face_structure: Structure::J,
        region_ok: None,
    })
}

/// Outcome of one exact identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub n: usize,
    pub k: Option<usize>,
    pub measured: f64,
    pub expected: f64,
    /// Largest coefficient deviation from `expected * Vol` (or `|measured - expected|`).
    pub residual: f64,
}

impl IdentityCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// `Omega_I^n ^ conj(Omega_I)^n = 4^n (n!)^2 Vol`.
pub fn lemma_holomorphic_volume(model: &QuaternionicModel) -> Result<IdentityCheck> {
    let n = model.n();
    let omega = model.holomorphic_symplectic(Structure::I);
    let lhs = omega.wedge_power(n)?.wedge(&omega.conj().wedge_power(n)?)?;
    let expected = 4f64.powi(n as i32) * factorial(n).powi(2);
    let target = model.vol().scale(expected);
    let residual = lhs.re.max_abs_diff(&target).max(lhs.im.max_abs());
    Ok(IdentityCheck {
        name: "holomorphic_volume".into(),
        n,
        k: None,
        measured: lhs.re.coeffs()[0],
        expected,
        residual,
    })
}

/// `(omega_I^2 + omega_J^2 + omega_K^2)^n = c_n Vol`.
pub fn lemma_quartic_power(model: &QuaternionicModel) -> Result<IdentityCheck> {
    let n = model.n();
    let lhs = sp1_invariant_quartic(model).wedge_power(n)?;
    let expected = c_constant(n);
    Ok(IdentityCheck {
        name: "quartic_power".into(),
        n,
        k: None,
        measured: lhs.coeffs()[0],
        expected,
        residual: lhs.max_abs_diff(&model.vol().scale(expected)),
    })
}

/// `(omega_I^k ^ Psi^n)(E_{n+k}) = 2^k k! n!` on the standard coisotropic frame.
pub fn lemma_coisotropic_volume(model: &QuaternionicModel, k: usize) -> Result<IdentityCheck> {
    let n = model.n();
    check_p(model, k, 0)?;
    let form = model.omega(Structure::I).wedge_power(k)?.wedge(&lemma_psi_n(model)?)?;
    let frame = standard_face(model, FaceKind::ComplexCoisotropic(k))?;
    let measured = frame.evaluate(&form)?;
    let expected = 2f64.powi(k as i32) * factorial(k) * factorial(n);
    Ok(IdentityCheck {
        name: "coisotropic_volume".into(),
        n,
        k: Some(k),
        measured,
        expected,
        residual: (measured - expected).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize) -> QuaternionicModel {
        QuaternionicModel::new(n).unwrap()
    }

    #[test]
    fn c_constant_values() {
        assert_eq!(c_constant(1), 6.0);
        assert_eq!(c_constant(2), 120.0);
        // the k = p summand alone is (2p)!
        assert_eq!(c_constant(3) - c_constant_partial(3), 720.0);
    }

    fn c_constant_partial(p: usize) -> f64 {
        (0..p)
            .map(|k| (factorial(p) / factorial(k)).powi(2) * factorial(2 * k) * 4f64.powi((p - k) as i32))
            .sum()
    }

    #[test]
    fn theta_1_is_volume_on_r4() {
        let m = model(1);
        assert!(theta(&m, 1).unwrap().form.approx_eq(m.vol(), IDENTITY_TOL));
        assert!(theta(&m, 2).is_err());
    }

    #[test]
    fn psi_pp_small_cases() {
        let m = model(1);
        assert!(projected_psi_pp(&m, 1).unwrap().approx_eq(m.omega(Structure::I), IDENTITY_TOL));
        let m2 = model(2);
        let [a, b, c] = Structure::ALL.map(|s| square(m2.omega(s)));
        let expected = &a.scale(0.5) - &(&b + &c).scale(0.25);
        assert!(projected_psi_pp(&m2, 2).unwrap().approx_eq(&expected, IDENTITY_TOL));
        let pairing = psi_pp_of_pairing(&m2, m2.omega(Structure::K), m2.omega(Structure::I), 2).unwrap();
        assert!(pairing.approx_eq(&expected.scale(-1.0), IDENTITY_TOL));
    }

    #[test]
    fn explicit_formula_collapses_at_p1() {
        let m = model(2);
        assert!(explicit_psi_pp(&m, 1).unwrap().approx_eq(m.omega(Structure::I), 0.0));
    }

    #[test]
    fn bryant_harvey_examples() {
        let m = model(1);
        let kahler = bryant_harvey(&m, 1.0, 0.0, 0.0).unwrap();
        assert!(kahler.form.approx_eq(&square(m.omega(Structure::I)).scale(0.5), 0.0));
        assert_eq!(kahler.region_ok, Some(true));
        let third = bryant_harvey(&m, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert_eq!(third.region_ok, Some(true));
        let line = standard_face(&m, FaceKind::Quaternionic(1)).unwrap();
        let all = bryant_harvey(&m, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(all.region_ok, Some(false));
        assert!((line.evaluate(&all.form).unwrap() - 3.0).abs() < IDENTITY_TOL);
    }

    #[test]
    fn sl_lagrangian_form_for_n1_is_omega_j() {
        let m = model(1);
        assert!(sl_forms(&m, 0).unwrap().form.approx_eq(m.omega(Structure::J), IDENTITY_TOL));
        assert!(sl_forms(&m, 2).is_err());
    }

    #[test]
    fn catalog_entry_json_shape() {
        let m = model(1);
        let v: serde_json::Value = serde_json::to_value(theta(&m, 1).unwrap().entry()).unwrap();
        assert_eq!(v["name"], "theta_p");
        assert_eq!(v["degree"], 4);
        assert_eq!(v["face_class"], "quaternionic");
        assert_eq!(v["params"]["p"], 1);
        assert_eq!(v["coeff_vector"].as_array().unwrap().len(), 1);
    }
}
