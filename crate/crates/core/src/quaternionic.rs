//! The model quaternionic Hermitian space `H^n = R^{4n}`.
//!
//! Coordinates are ordered `(e_1, Ie_1, Je_1, Ke_1, e_2, ..., Ke_n)`, so basis
//! index `4i + 0..4` is `e_i, Ie_i, Je_i, Ke_i`. Identifying `x0 + x1 i + x2 j + x3 k`
//! with the coordinates in the basis `(1, -i, -j, -k)`, the operators are right
//! multiplication by conjugate units, `I x = x * conj(i)` and likewise for `J`,
//! `K`; with that choice `I J = K` holds as a composition of operators. The
//! relations are checked when a model is built.
//!
//! Operators act on forms by precomposition in every slot, `(A.f)(v..) = f(Av..)`.
//! With `rho_L(t) = cos t + sin t L` a form of type `(p,q)` for `L` has weight
//! `p - q`: `rho_L(t).f = e^{i(p-q)t} f`. The infinitesimal generators satisfy
//! `[h_I, h_J] = -2 h_K` (precomposition reverses brackets) and
//! `h_I(omega_J) = -2 omega_K`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::ops::{Add, Sub};
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, tables, AlternatingForm};

/// Tolerance for the algebraic identities of the model.
pub const MODEL_TOL: f64 = 1e-12;

/// Ratio between the top Casimir eigenvalue on the weight-m component and
/// `m(m+2)`; fixed against the triplet `omega_I, omega_J, omega_K` on `Lambda^2(R^4)`,
/// which has eigenvalue 8.
pub const CASIMIR_NORMALIZATION: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Structure {
    I,
    J,
    K,
}

impl Structure {
    pub const ALL: [Structure; 3] = [Structure::I, Structure::J, Structure::K];
}

/// A complex-valued form `re + i im`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexForm {
    pub re: AlternatingForm,
    pub im: AlternatingForm,
}

impl ComplexForm {
    pub fn new(re: AlternatingForm, im: AlternatingForm) -> Result<Self> {
        if re.dim() != im.dim() {
            return Err(Error::DimensionMismatch(re.dim(), im.dim()));
        }
        if re.degree() != im.degree() {
            return Err(Error::DegreeMismatch(re.degree(), im.degree()));
        }
        Ok(Self { re, im })
    }

    pub fn real(re: AlternatingForm) -> Self {
        let im = AlternatingForm::zero(re.dim(), re.degree()).expect("valid shape");
        Self { re, im }
    }

    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        Ok(Self::real(AlternatingForm::zero(dim, degree)?))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn degree(&self) -> usize {
        self.re.degree()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            re: &self.re.scale(z.re) - &self.im.scale(z.im),
            im: &self.im.scale(z.re) + &self.re.scale(z.im),
        }
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let rr = self.re.wedge(&other.re)?;
        let ii = self.im.wedge(&other.im)?;
        let ri = self.re.wedge(&other.im)?;
        let ir = self.im.wedge(&other.re)?;
        Ok(Self { re: &rr - &ii, im: &ri + &ir })
    }

    pub fn wedge_real(&self, other: &AlternatingForm) -> Result<Self> {
        Ok(Self { re: self.re.wedge(other)?, im: self.im.wedge(other)? })
    }

    pub fn wedge_power(&self, k: usize) -> Result<Self> {
        let mut acc = Self::real(AlternatingForm::scalar(self.dim(), 1.0)?);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// `|f|^2 = |Re f|^2 + |Im f|^2`.
    pub fn norm(&self) -> f64 {
        (self.re.norm().powi(2) + self.im.norm().powi(2)).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.re.max_abs_diff(&other.re).max(self.im.max_abs_diff(&other.im))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.re.is_zero(tol) && self.im.is_zero(tol)
    }

    pub fn pullback(&self, a: &DMatrix<f64>) -> Result<Self> {
        Ok(Self { re: self.re.pullback(a)?, im: self.im.pullback(a)? })
    }

    pub fn evaluate_complex(&self, vs: &[Vec<Complex64>]) -> Result<Complex64> {
        let r = self.re.evaluate_complex(vs)?;
        let i = self.im.evaluate_complex(vs)?;
        Ok(r + Complex64::i() * i)
    }

    /// Complex value on a real frame.
    pub fn evaluate_matrix(&self, m: &DMatrix<f64>) -> Result<Complex64> {
        Ok(Complex64::new(self.re.evaluate_matrix(m)?, self.im.evaluate_matrix(m)?))
    }
}

impl Add for &ComplexForm {
    type Output = ComplexForm;
    fn add(self, rhs: Self) -> ComplexForm {
        ComplexForm { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &ComplexForm {
    type Output = ComplexForm;
    fn sub(self, rhs: Self) -> ComplexForm {
        ComplexForm { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

/// Components of a form under the circle action of one complex structure.
#[derive(Clone, Debug)]
pub struct WeightDecomposition {
    pub structure: Structure,
    pub components: BTreeMap<i32, ComplexForm>,
}

impl WeightDecomposition {
    pub fn sum(&self) -> Option<ComplexForm> {
        let mut it = self.components.values();
        let first = it.next()?.clone();
        Some(it.fold(first, |acc, c| &acc + c))
    }
}

/// Eigen-structure of a degree-2 form as a Hermitian pairing on `T^{1,0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Positivity {
    pub eigenvalues: Vec<f64>,
    /// Largest imaginary part of the diagonal, and largest `|H - H^*|` entry.
    pub hermitian_defect: f64,
}

impl Positivity {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn is_strictly_positive(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol
    }
}

type OperatorCache = RwLock<HashMap<(Structure, usize), Arc<DMatrix<f64>>>>;

pub struct QuaternionicModel {
    n: usize,
    metric_scale: f64,
    ops: [DMatrix<f64>; 3],
    omegas: [AlternatingForm; 3],
    vol: AlternatingForm,
    cartan: OperatorCache,
}

impl std::fmt::Debug for QuaternionicModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuaternionicModel")
            .field("n", &self.n)
            .field("metric_scale", &self.metric_scale)
            .finish()
    }
}

impl Clone for QuaternionicModel {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            metric_scale: self.metric_scale,
            ops: self.ops.clone(),
            omegas: self.omegas.clone(),
            vol: self.vol.clone(),
            cartan: RwLock::new(HashMap::new()),
        }
    }
}

fn block_operator(n: usize, block: [[f64; 4]; 4]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..n {
        for r in 0..4 {
            for c in 0..4 {
                m[(4 * i + r, 4 * i + c)] = block[r][c];
            }
        }
    }
    m
}

/// `omega(x, y) = scale * g(Lx, y)`.
fn fundamental_form(l: &DMatrix<f64>, scale: f64) -> AlternatingForm {
    let d = l.nrows();
    let t = tables(d);
    let coeffs = t
        .masks(2)
        .iter()
        .map(|&m| {
            let a = m.trailing_zeros() as usize;
            let b = 31 - m.leading_zeros() as usize;
            scale * l[(b, a)]
        })
        .collect();
    AlternatingForm::from_coeffs(d, 2, coeffs).expect("valid shape")
}

impl QuaternionicModel {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_metric_scale(n, 1.0)
    }

    /// Model whose metric is `c` times the coordinate metric; the fundamental
    /// forms scale by `c`. Forms are still paired with the coordinate inner product.
    pub fn with_metric_scale(n: usize, c: f64) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(Error::UnsupportedQuaternionicDimension(n));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::OutOfRange(format!("metric scale {c}")));
        }
        // columns are images of (e, Ie, Je, Ke)
        let i_block = [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        let j_block = [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ];
        let i = block_operator(n, i_block);
        let j = block_operator(n, j_block);
        let k = &i * &j;
        Self::from_operators(n, c, [i, j, k])
    }

    fn from_operators(n: usize, c: f64, ops: [DMatrix<f64>; 3]) -> Result<Self> {
        let d = 4 * n;
        let omegas = [
            fundamental_form(&ops[0], c),
            fundamental_form(&ops[1], c),
            fundamental_form(&ops[2], c),
        ];
        let vol = AlternatingForm::volume(d)?.scale(c.powi(2 * n as i32));
        let model = Self { n, metric_scale: c, ops, omegas, vol, cartan: RwLock::new(HashMap::new()) };
        model.check_relations()?;
        Ok(model)
    }

    /// The same space with the roles `(I, J, K)` replaced by `(J, K, I)`.
    pub fn cycled(&self) -> Self {
        let ops = [self.ops[1].clone(), self.ops[2].clone(), self.ops[0].clone()];
        Self::from_operators(self.n, self.metric_scale, ops).expect("cyclic permutation keeps relations")
    }

    fn check_relations(&self) -> Result<()> {
        let d = self.dim();
        let id = DMatrix::<f64>::identity(d, d);
        let [i, j, k] = &self.ops;
        let checks = [
            ("I^2 = -1", (i * i + &id).amax()),
            ("J^2 = -1", (j * j + &id).amax()),
            ("K^2 = -1", (k * k + &id).amax()),
            ("IJ = K", (i * j - k).amax()),
            ("JI = -K", (j * i + k).amax()),
            ("I orthogonal", (i.transpose() * i - &id).amax()),
            ("J orthogonal", (j.transpose() * j - &id).amax()),
            ("K orthogonal", (k.transpose() * k - &id).amax()),
        ];
        for (name, defect) in checks {
            if defect > MODEL_TOL {
                return Err(Error::ModelInvariant(format!("{name}: defect {defect:.3e}")));
            }
        }
        for (l, w) in self.ops.iter().zip(&self.omegas) {
            let skew = (l.transpose() + l).amax();
            if skew > MODEL_TOL {
                return Err(Error::ModelInvariant(format!("g L not skew: {skew:.3e}")));
            }
            for b in 0..self.n {
                let e = self.basis_vector(b, 0);
                let le = l * &e;
                let val = w.evaluate_vectors(&[e, le])?;
                if (val - self.metric_scale).abs() > MODEL_TOL {
                    return Err(Error::ModelInvariant(format!("omega(e, Le) = {val}")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    pub fn op(&self, s: Structure) -> &DMatrix<f64> {
        &self.ops[s as usize]
    }

    pub fn omega(&self, s: Structure) -> &AlternatingForm {
        &self.omegas[s as usize]
    }

    pub fn vol(&self) -> &AlternatingForm {
        &self.vol
    }

    /// Basis vector with label `(e, Ie, Je, Ke)[slot]` of the quaternionic line `line`.
    ///
    /// Slots 1..3 are obtained by applying this model's `I, J, K` to `e_line`,
    /// so a cycled model yields the cycled labels.
    pub fn basis_vector(&self, line: usize, slot: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim());
        e[4 * line] = 1.0;
        match slot {
            0 => e,
            s => &self.ops[s - 1] * e,
        }
    }

    /// `a I + b J + c K`, a complex structure when `a^2 + b^2 + c^2 = 1`.
    pub fn direction(&self, a: f64, b: f64, c: f64) -> DMatrix<f64> {
        &self.ops[0] * a + &self.ops[1] * b + &self.ops[2] * c
    }

    /// The fundamental 2-form of an arbitrary operator, `x, y -> g(Lx, y)`.
    pub fn fundamental_form_of(&self, l: &DMatrix<f64>) -> AlternatingForm {
        fundamental_form(l, self.metric_scale)
    }

    /// `Omega_I = omega_J + i omega_K`, of type (2,0) for `I`; cyclically for `J`, `K`.
    pub fn holomorphic_symplectic(&self, s: Structure) -> ComplexForm {
        let (a, b) = match s {
            Structure::I => (Structure::J, Structure::K),
            Structure::J => (Structure::K, Structure::I),
            Structure::K => (Structure::I, Structure::J),
        };
        ComplexForm { re: self.omega(a).clone(), im: self.omega(b).clone() }
    }

    pub fn rho(&self, s: Structure, t: f64) -> DMatrix<f64> {
        rho_of(self.op(s), t)
    }

    /// Precomposition action of a matrix on a form.
    pub fn act_on_form(&self, a: &DMatrix<f64>, f: &AlternatingForm) -> Result<AlternatingForm> {
        if a.nrows() != self.dim() || f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), a.nrows().max(f.dim())));
        }
        f.pullback(a)
    }

    pub fn act_on_complex(&self, a: &DMatrix<f64>, f: &ComplexForm) -> Result<ComplexForm> {
        Ok(ComplexForm { re: self.act_on_form(a, &f.re)?, im: self.act_on_form(a, &f.im)? })
    }

    /// Projection onto weight `w` for the circle generated by `s`.
    pub fn weight_project(&self, f: &ComplexForm, s: Structure, w: i32) -> Result<ComplexForm> {
        weight_project_with(self.op(s), f, w)
    }

    pub fn weight_decomposition(&self, f: &ComplexForm, s: Structure) -> Result<WeightDecomposition> {
        let k = f.degree() as i32;
        let mut components = BTreeMap::new();
        for w in (-k..=k).step_by(2) {
            components.insert(w, self.weight_project(f, s, w)?);
        }
        Ok(WeightDecomposition { structure: s, components })
    }

    /// `(p,q)`-part with respect to `s`, i.e. the weight `p - q` component.
    pub fn hodge_part(&self, f: &ComplexForm, s: Structure, p: usize, q: usize) -> Result<ComplexForm> {
        if p + q != f.degree() {
            return Err(Error::DegreeMismatch(p + q, f.degree()));
        }
        self.weight_project(f, s, p as i32 - q as i32)
    }

    /// Real `(p,p)`-part of a real form.
    pub fn real_pp_part(&self, f: &AlternatingForm, s: Structure) -> Result<AlternatingForm> {
        if f.degree() % 2 != 0 {
            return Err(Error::OutOfRange(format!("odd degree {} has no (p,p)-part", f.degree())));
        }
        let p = f.degree() / 2;
        Ok(self.hodge_part(&ComplexForm::real(f.clone()), s, p, p)?.re)
    }

    /// Matrix of `h_s = d/dt rho_s(t)|_{t=0}` on `Lambda^k` in the monomial basis.
    pub fn su2_cartan(&self, s: Structure, k: usize) -> Result<Arc<DMatrix<f64>>> {
        if let Some(m) = self.cartan.read().expect("cartan lock").get(&(s, k)) {
            return Ok(m.clone());
        }
        let m = Arc::new(derivation_matrix(self.op(s), self.dim(), k)?);
        self.cartan.write().expect("cartan lock").insert((s, k), m.clone());
        Ok(m)
    }

    /// `h_s` applied to a form.
    pub fn cartan_apply(&self, s: Structure, f: &AlternatingForm) -> Result<AlternatingForm> {
        f.derivation(self.op(s))
    }

    /// `C = -(h_I^2 + h_J^2 + h_K^2)`, scaled by [`CASIMIR_NORMALIZATION`].
    pub fn casimir_apply(&self, f: &AlternatingForm) -> Result<AlternatingForm> {
        let mut acc = AlternatingForm::zero(f.dim(), f.degree())?;
        for s in Structure::ALL {
            let h = self.op(s);
            acc += &f.derivation(h)?.derivation(h)?;
        }
        Ok(acc.scale(-CASIMIR_NORMALIZATION))
    }

    pub fn casimir_matrix(&self, k: usize) -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::zeros(binomial(self.dim(), k), binomial(self.dim(), k));
        for s in Structure::ALL {
            let h = self.su2_cartan(s, k)?;
            acc += h.as_ref() * h.as_ref();
        }
        Ok(acc * -CASIMIR_NORMALIZATION)
    }

    /// Highest weights occurring in `Lambda^k`: `m = k, k-2, ...` down to 0 or 1,
    /// capped by `4n - k`.
    pub fn casimir_weights(&self, k: usize) -> Vec<usize> {
        let top = k.min(self.dim() - k);
        (0..=top).rev().filter(|m| m % 2 == k % 2).collect()
    }

    /// Spectral projector onto the top Casimir eigenvalue, applied as the
    /// Lagrange polynomial `prod (C - lambda_m) / (lambda_top - lambda_m)`.
    pub fn casimir_projector_max(&self, f: &AlternatingForm) -> Result<AlternatingForm> {
        let weights = self.casimir_weights(f.degree());
        let eig = |m: usize| CASIMIR_NORMALIZATION * (m * (m + 2)) as f64;
        let top = eig(weights[0]);
        let mut acc = f.clone();
        for &m in &weights[1..] {
            let lambda = eig(m);
            let c = self.casimir_apply(&acc)?;
            acc = (&c - &acc.scale(lambda)).scale(1.0 / (top - lambda));
        }
        Ok(acc)
    }

    /// Matrix of `L_omega: Lambda^k -> Lambda^{k+2}`, `f -> f ^ omega`.
    pub fn lefschetz_matrix(&self, omega: &AlternatingForm, k: usize) -> Result<DMatrix<f64>> {
        let d = self.dim();
        if k + omega.degree() > d {
            return Err(Error::DegreeOverflow { degree: k + omega.degree(), dim: d });
        }
        let t = tables(d);
        let rows = binomial(d, k + omega.degree());
        let cols = binomial(d, k);
        let mut m = DMatrix::zeros(rows, cols);
        for (c, &mask) in t.masks(k).iter().enumerate() {
            let idx: Vec<usize> = crate::exterior::mask_indices(mask).collect();
            let img = AlternatingForm::monomial(d, &idx)?.wedge(omega)?;
            m.set_column(c, &DVector::from_column_slice(img.coeffs()));
        }
        Ok(m)
    }

    pub fn lefschetz(&self, f: &AlternatingForm, omega: &AlternatingForm) -> Result<AlternatingForm> {
        f.wedge(omega)
    }

    /// Adjoint of `L_omega` for the monomial inner product, as a matrix transpose.
    pub fn lefschetz_adjoint(&self, f: &AlternatingForm, omega: &AlternatingForm) -> Result<AlternatingForm> {
        let od = omega.degree();
        if f.degree() < od {
            return Err(Error::DegreeUnderflow { degree: f.degree(), needed: od });
        }
        let m = self.lefschetz_matrix(omega, f.degree() - od)?;
        let v = m.transpose() * DVector::from_column_slice(f.coeffs());
        AlternatingForm::from_coeffs(self.dim(), f.degree() - od, v.as_slice().to_vec())
    }

    /// `[L_a, Lambda_b] f` for 2-forms `a, b`; terms leaving the range of
    /// degrees vanish.
    pub fn lefschetz_commutator(
        &self,
        f: &AlternatingForm,
        a: &AlternatingForm,
        b: &AlternatingForm,
    ) -> Result<AlternatingForm> {
        let (k, d) = (f.degree(), self.dim());
        let mut out = AlternatingForm::zero(d, k)?;
        if k >= b.degree() {
            out += &self.lefschetz(&self.lefschetz_adjoint(f, b)?, a)?;
        }
        if k + a.degree() <= d {
            out += &self.lefschetz_adjoint(&self.lefschetz(f, a)?, b)?.scale(-1.0);
        }
        Ok(out)
    }

    /// `(-1)^k * L *` on a k-form; agrees with [`Self::lefschetz_adjoint`] for an
    /// even-degree `omega` in even dimension.
    pub fn lefschetz_adjoint_via_star(
        &self,
        f: &AlternatingForm,
        omega: &AlternatingForm,
    ) -> Result<AlternatingForm> {
        if f.degree() < omega.degree() {
            return Err(Error::DegreeUnderflow { degree: f.degree(), needed: omega.degree() });
        }
        let sign = if f.degree() % 2 == 0 { 1.0 } else { -1.0 };
        Ok(omega.wedge(&f.hodge_star())?.hodge_star().scale(sign))
    }

    /// Checks that `f` has pure type `(deg, 0)` for `I`.
    fn require_holomorphic_type(&self, f: &ComplexForm, tol: f64) -> Result<()> {
        let deg = f.degree();
        let part = self.hodge_part(f, Structure::I, deg, 0)?;
        let residual = part.max_abs_diff(f);
        if residual > tol {
            return Err(Error::NotPureType { p: deg, q: 0, residual });
        }
        Ok(())
    }

    /// `J(conj f) = f` for a form of pure type `(2p, 0)` with respect to `I`.
    pub fn is_h_real(&self, f: &ComplexForm) -> Result<bool> {
        if f.degree() % 2 != 0 {
            return Err(Error::NotPureType { p: f.degree(), q: 0, residual: f64::NAN });
        }
        self.require_holomorphic_type(f, 1e-10)?;
        let jf = self.act_on_complex(self.op(Structure::J), &f.conj())?;
        Ok(jf.approx_eq(f, 1e-10))
    }

    /// `I`-holomorphic basis vectors `v - i I v` for `v` in `(e_1, Je_1, ..., e_n, Je_n)`.
    pub fn holomorphic_basis(&self) -> Vec<Vec<Complex64>> {
        let i = self.op(Structure::I);
        let mut out = Vec::with_capacity(2 * self.n);
        for line in 0..self.n {
            for slot in [0, 2] {
                let v = self.basis_vector(line, slot);
                let iv = i * &v;
                out.push(v.iter().zip(iv.iter()).map(|(&a, &b)| Complex64::new(a, -b)).collect());
            }
        }
        out
    }

    /// Hermitian matrix `H_ab = f(x_a, J conj(x_b))` of an `H`-real (2,0)-form.
    pub fn q_positivity(&self, f: &ComplexForm) -> Result<Positivity> {
        if f.degree() != 2 {
            return Err(Error::DegreeMismatch(2, f.degree()));
        }
        self.require_holomorphic_type(f, 1e-10)?;
        let basis = self.holomorphic_basis();
        let j = self.op(Structure::J);
        let jbar: Vec<Vec<Complex64>> = basis
            .iter()
            .map(|x| {
                let re = j * DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
                let im = j * DVector::from_iterator(x.len(), x.iter().map(|z| -z.im));
                re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
            })
            .collect();
        let m = basis.len();
        let mut h = DMatrix::<Complex64>::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                h[(a, b)] = f.evaluate_complex(&[basis[a].clone(), jbar[b].clone()])?;
            }
        }
        let defect = (&h - h.adjoint()).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let herm = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        Ok(Positivity { eigenvalues: eig.eigenvalues.iter().copied().collect(), hermitian_defect: defect })
    }

    pub fn is_q_positive(&self, f: &ComplexForm) -> Result<bool> {
        Ok(self.is_h_real(f)? && self.q_positivity(f)?.is_positive(1e-10))
    }

    pub fn is_strictly_q_positive(&self, f: &ComplexForm) -> Result<bool> {
        Ok(self.is_h_real(f)? && self.q_positivity(f)?.is_strictly_positive(1e-10))
    }
}

pub fn rho_of(l: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let d = l.nrows();
    DMatrix::<f64>::identity(d, d) * t.cos() + l * t.sin()
}

/// Exact discrete Fourier projection onto weight `w` for the circle
/// `rho(t) = cos t + sin t L`: averages `e^{-iwt_j} rho(t_j).f` over
/// `N = 2 deg + 2` equally spaced angles. Weights lie in `[-deg, deg]`, so
/// no other weight aliases onto `w`.
pub fn weight_project_with(l: &DMatrix<f64>, f: &ComplexForm, w: i32) -> Result<ComplexForm> {
    let deg = f.degree() as i32;
    if w.abs() > deg || (w - deg) % 2 != 0 {
        return ComplexForm::zero(f.dim(), f.degree());
    }
    let n = 2 * f.degree() + 2;
    let mut acc = ComplexForm::zero(f.dim(), f.degree())?;
    for j in 0..n {
        let t = 2.0 * PI * j as f64 / n as f64;
        let rotated = f.pullback(&rho_of(l, t))?;
        let phase = Complex64::from_polar(1.0 / n as f64, -(w as f64) * t);
        acc = &acc + &rotated.scale(phase);
    }
    Ok(acc)
}

/// Matrix of the derivation action of `a` on `Lambda^k(R^d)`.
pub fn derivation_matrix(a: &DMatrix<f64>, d: usize, k: usize) -> Result<DMatrix<f64>> {
    let t = tables(d);
    let size = binomial(d, k);
    let mut m = DMatrix::zeros(size, size);
    for (c, &mask) in t.masks(k).iter().enumerate() {
        let idx: Vec<usize> = crate::exterior::mask_indices(mask).collect();
        let img = AlternatingForm::monomial(d, &idx)?.derivation(a)?;
        m.set_column(c, &DVector::from_column_slice(img.coeffs()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize) -> QuaternionicModel {
        QuaternionicModel::new(n).unwrap()
    }

    /// Hamilton product on (1, i, j, k) coordinates.
    fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
        [
            a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
        ]
    }

    #[test]
    fn operators_are_right_multiplication_by_conjugate_units() {
        let m = model(1);
        // model coordinates (x0, x1, x2, x3) mean x0 - x1 i - x2 j - x3 k
        let to_h = |v: &DVector<f64>| [v[0], -v[1], -v[2], -v[3]];
        let units = [[0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
        for (s, u) in Structure::ALL.iter().zip(units) {
            for c in 0..4 {
                let v = m.basis_vector(0, 0).map(|_| 0.0);
                let mut v = v;
                v[c] = 1.0;
                let lv = m.op(*s) * &v;
                assert_eq!(to_h(&lv), qmul(to_h(&v), u));
            }
        }
    }

    #[test]
    fn model_range() {
        assert!(matches!(QuaternionicModel::new(0), Err(Error::UnsupportedQuaternionicDimension(0))));
        assert!(QuaternionicModel::new(5).is_err());
        let m = model(1);
        let i = m.op(Structure::I);
        let j = m.op(Structure::J);
        assert!((i * i + DMatrix::<f64>::identity(4, 4)).amax() == 0.0);
        assert!((i * j - m.op(Structure::K)).amax() == 0.0);
    }

    #[test]
    fn omega_i_on_basis_lines() {
        let m = model(1);
        let e = m.basis_vector(0, 0);
        let ie = m.basis_vector(0, 1);
        let je = m.basis_vector(0, 2);
        assert_eq!(m.omega(Structure::I).evaluate_vectors(&[e.clone(), ie]).unwrap(), 1.0);
        assert_eq!(m.omega(Structure::I).evaluate_vectors(&[e, je]).unwrap(), 0.0);
    }

    #[test]
    fn identity_action_is_trivial() {
        let m = model(2);
        let f = m.omega(Structure::J).wedge(m.omega(Structure::K)).unwrap();
        let id = DMatrix::<f64>::identity(8, 8);
        assert!(m.act_on_form(&id, &f).unwrap().approx_eq(&f, 0.0));
        let w = m.act_on_form(m.op(Structure::I), m.omega(Structure::I)).unwrap();
        assert!(w.approx_eq(m.omega(Structure::I), MODEL_TOL));
    }

    #[test]
    fn cartan_sign_conventions() {
        let m = model(1);
        let hj = m.cartan_apply(Structure::I, m.omega(Structure::J)).unwrap();
        assert!(hj.approx_eq(&m.omega(Structure::K).scale(-2.0), MODEL_TOL));
        for k in 0..=4 {
            let hi = m.su2_cartan(Structure::I, k).unwrap();
            let hj = m.su2_cartan(Structure::J, k).unwrap();
            let hk = m.su2_cartan(Structure::K, k).unwrap();
            let br = hi.as_ref() * hj.as_ref() - hj.as_ref() * hi.as_ref();
            assert!((br + hk.as_ref() * 2.0).amax() < MODEL_TOL);
        }
    }

    #[test]
    fn cartan_on_one_forms_has_eigenvalues_plus_minus_i() {
        let m = model(1);
        let h = m.su2_cartan(Structure::I, 1).unwrap();
        let ev = h.as_ref().clone().complex_eigenvalues();
        let mut plus = 0;
        let mut minus = 0;
        for z in ev.iter() {
            assert!(z.re.abs() < 1e-12);
            if (z.im - 1.0).abs() < 1e-12 {
                plus += 1;
            } else if (z.im + 1.0).abs() < 1e-12 {
                minus += 1;
            }
        }
        assert_eq!((plus, minus), (2, 2));
    }

    #[test]
    fn weight_examples() {
        let m = model(1);
        let wi = ComplexForm::real(m.omega(Structure::I).clone());
        assert!(m.weight_project(&wi, Structure::I, 0).unwrap().approx_eq(&wi, MODEL_TOL));
        let wj = ComplexForm::real(m.omega(Structure::J).clone());
        assert!(m.weight_project(&wj, Structure::I, 0).unwrap().is_zero(MODEL_TOL));
        let plus = m.weight_project(&wj, Structure::I, 2).unwrap();
        let minus = m.weight_project(&wj, Structure::I, -2).unwrap();
        assert!((&plus + &minus).approx_eq(&wj, MODEL_TOL));
        // (2,0)-part of omega_J is Omega/2
        let omega = m.holomorphic_symplectic(Structure::I);
        let part = m.hodge_part(&wj, Structure::I, 2, 0).unwrap();
        assert!(part.approx_eq(&omega.scale(Complex64::new(0.5, 0.0)), MODEL_TOL));
        // out-of-range and wrong-parity weights vanish
        assert!(m.weight_project(&wj, Structure::I, 4).unwrap().is_zero(0.0));
        assert!(m.weight_project(&wj, Structure::I, 1).unwrap().is_zero(0.0));
        assert!(m.hodge_part(&wj, Structure::I, 2, 1).is_err());
    }

    #[test]
    fn j_swaps_types() {
        // J maps Lambda^{2,0}_I to Lambda^{0,2}_I
        let m = model(1);
        let omega = m.holomorphic_symplectic(Structure::I);
        assert!(m.weight_project(&omega, Structure::I, 2).unwrap().approx_eq(&omega, MODEL_TOL));
        let j_omega = m.act_on_complex(m.op(Structure::J), &omega).unwrap();
        assert!(m.weight_project(&j_omega, Structure::I, -2).unwrap().approx_eq(&j_omega, MODEL_TOL));
    }

    #[test]
    fn casimir_on_lambda2_of_r4() {
        let m = model(1);
        let c = m.casimir_matrix(2).unwrap();
        let eig = c.symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let expected = [0.0, 0.0, 0.0, 8.0, 8.0, 8.0];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{ev:?}");
        }
        for s in Structure::ALL {
            let w = m.omega(s);
            assert!(m.casimir_projector_max(w).unwrap().approx_eq(w, 1e-12));
        }
        // an anti-self-dual form is killed
        let asd = &AlternatingForm::monomial(4, &[0, 1]).unwrap() - &AlternatingForm::monomial(4, &[2, 3]).unwrap();
        assert!(m.casimir_projector_max(&asd).unwrap().is_zero(1e-12));
    }

    #[test]
    fn lefschetz_adjoint_examples() {
        let m = model(1);
        let wi = m.omega(Structure::I);
        let s = m.lefschetz_adjoint(wi, wi).unwrap();
        assert!((s.coeffs()[0] - 2.0).abs() < 1e-12);
        let e12 = AlternatingForm::monomial(4, &[0, 2]).unwrap();
        assert!(m.lefschetz_adjoint(&e12, wi).unwrap().is_zero(0.0));
        let one = AlternatingForm::scalar(4, 1.0).unwrap();
        assert!(m.lefschetz_adjoint(&one, wi).is_err());
    }

    #[test]
    fn h_reality_and_positivity() {
        let m = model(2);
        let omega = m.holomorphic_symplectic(Structure::I);
        assert!(m.is_h_real(&omega).unwrap());
        assert!(m.is_strictly_q_positive(&omega).unwrap());
        let neg = omega.scale(Complex64::new(-1.0, 0.0));
        assert!(m.is_h_real(&neg).unwrap());
        assert!(!m.is_q_positive(&neg).unwrap());
        let rot = omega.scale(Complex64::i());
        assert!(!m.is_h_real(&rot).unwrap());
        let wi = ComplexForm::real(m.omega(Structure::I).clone());
        assert!(matches!(m.is_h_real(&wi), Err(Error::NotPureType { .. })));
    }

    #[test]
    fn cycled_model_keeps_volume_orientation() {
        let m = model(2);
        let c = m.cycled();
        assert!(c.vol().approx_eq(m.vol(), 0.0));
        assert!(c.omega(Structure::I).approx_eq(m.omega(Structure::J), 0.0));
        assert_eq!(c.basis_vector(1, 1), m.basis_vector(1, 2));
    }
}
