//! Alternating multilinear forms on a Euclidean space `R^d`, `d <= 16`.
//!
//! A k-form is stored densely over strictly increasing index tuples in
//! lexicographic order. Tuples are encoded as bitmasks; a per-dimension table
//! maps every mask to its rank inside its degree, so all operations reduce to
//! mask arithmetic plus one table lookup.
//!
//! Conventions: `e^T(e_T) = 1` for the monomial `e^T = e^{t_1} ^ ... ^ e^{t_k}`,
//! evaluation on vectors is the determinant pairing, and the monomials form an
//! orthonormal basis for [`AlternatingForm::inner_product`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// Index tables for one ambient dimension.
#[derive(Debug)]
pub struct Tables {
    dim: usize,
    masks: Vec<Vec<u32>>,
    rank: Vec<u32>,
}

impl Tables {
    fn build(dim: usize) -> Self {
        let mut masks = vec![Vec::new(); dim + 1];
        let mut rank = vec![0u32; 1usize << dim];
        for (k, slot) in masks.iter_mut().enumerate() {
            for (r, combo) in (0..dim).combinations(k).enumerate() {
                let m = combo.iter().fold(0u32, |m, &i| m | (1 << i));
                rank[m as usize] = r as u32;
                slot.push(m);
            }
        }
        Tables { dim, masks, rank }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Masks of degree `k` in lexicographic order of their index tuples.
    pub fn masks(&self, k: usize) -> &[u32] {
        &self.masks[k]
    }

    #[inline]
    pub fn rank(&self, mask: u32) -> usize {
        self.rank[mask as usize] as usize
    }
}

static TABLES: OnceLock<RwLock<HashMap<usize, Arc<Tables>>>> = OnceLock::new();

/// Shared index tables for `dim`, built on first use.
pub fn tables(dim: usize) -> Arc<Tables> {
    let cache = TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().expect("tables lock").get(&dim) {
        return t.clone();
    }
    let mut w = cache.write().expect("tables lock");
    w.entry(dim).or_insert_with(|| Arc::new(Tables::build(dim))).clone()
}

/// Indices set in `mask`, ascending.
pub fn mask_indices(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Sign of the permutation sorting the concatenation `S ++ T` of two disjoint
/// increasing tuples.
#[inline]
pub fn merge_sign(s: u32, t: u32) -> f64 {
    let mut inversions = 0u32;
    for j in mask_indices(t) {
        inversions += (s >> (j + 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn sign_of(parity: u32) -> f64 {
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

/// A real k-form on `R^dim`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternatingForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for AlternatingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = tables(self.dim);
        write!(f, "Form(d={}, k={}: ", self.dim, self.degree)?;
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.abs() > 1e-14 {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let idx: Vec<usize> = mask_indices(t.masks(self.degree)[i]).collect();
                write!(f, "{c:.6}e{idx:?}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl AlternatingForm {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        check_dim(dim)?;
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, dim });
        }
        Ok(Self { dim, degree, coeffs: vec![0.0; binomial(dim, degree)] })
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let z = Self::zero(dim, degree)?;
        if coeffs.len() != z.coeffs.len() {
            return Err(Error::OutOfRange(format!(
                "expected {} coefficients, got {}",
                z.coeffs.len(),
                coeffs.len()
            )));
        }
        Ok(Self { coeffs, ..z })
    }

    pub fn scalar(dim: usize, c: f64) -> Result<Self> {
        Self::from_coeffs(dim, 0, vec![c])
    }

    /// `e^0 ^ e^1 ^ ... ^ e^{d-1}`.
    pub fn volume(dim: usize) -> Result<Self> {
        Self::from_coeffs(dim, dim, vec![1.0])
    }

    /// The 1-form `x -> <v, x>`.
    pub fn one_form(v: &[f64]) -> Result<Self> {
        Self::from_coeffs(v.len(), 1, v.to_vec())
    }

    /// `e^{i_1} ^ ... ^ e^{i_k}` for arbitrary (distinct) indices, sign included.
    pub fn monomial(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut f = Self::zero(dim, indices.len())?;
        if indices.iter().any(|&i| i >= dim) {
            return Err(Error::OutOfRange(format!("index out of range in {indices:?}")));
        }
        if !indices.iter().all_unique() {
            return Ok(f);
        }
        let mut inversions = 0u32;
        for (a, &i) in indices.iter().enumerate() {
            inversions += indices[a + 1..].iter().filter(|&&j| j < i).count() as u32;
        }
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        let r = tables(dim).rank(mask);
        f.coeffs[r] = sign_of(inversions);
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn tables(&self) -> Arc<Tables> {
        tables(self.dim)
    }

    /// Coefficient on the increasing tuple `indices`.
    pub fn coeff(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        if mask.count_ones() as usize != self.degree {
            return 0.0;
        }
        self.coeffs[tables(self.dim).rank(mask)]
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient difference; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim || self.degree != other.degree {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| c * x).collect(), ..self.clone() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree)?;
        let t = tables(self.dim);
        let (ma, mb) = (t.masks(self.degree), t.masks(other.degree));
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let sa = ma[i];
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                let sb = mb[j];
                if sa & sb != 0 {
                    continue;
                }
                out.coeffs[t.rank(sa | sb)] += merge_sign(sa, sb) * a * b;
            }
        }
        Ok(out)
    }

    /// `self ^ self ^ ... ^ self` (`k` factors); `k = 0` gives the constant 1.
    pub fn wedge_power(&self, k: usize) -> Result<Self> {
        let mut acc = Self::scalar(self.dim, 1.0)?;
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }

    /// `self ^ v^flat`, specialised for a 1-form given by its coefficients.
    pub fn wedge_vector(&self, v: &[f64]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        let mut out = Self::zero(self.dim, self.degree + 1)?;
        let t = tables(self.dim);
        let masks = t.masks(self.degree);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let s = masks[i];
            for (a, &va) in v.iter().enumerate() {
                if va == 0.0 || s & (1 << a) != 0 {
                    continue;
                }
                let sign = sign_of((s >> (a + 1)).count_ones());
                out.coeffs[t.rank(s | (1 << a))] += sign * c * va;
            }
        }
        Ok(out)
    }

    /// Interior product `(i_v f)(w_2, ..., w_k) = f(v, w_2, ..., w_k)`.
    pub fn contract(&self, v: &[f64]) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::DegreeUnderflow { degree: 0, needed: 1 });
        }
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.len()));
        }
        let mut out = Self::zero(self.dim, self.degree - 1)?;
        self.contract_into(v, &mut out.coeffs);
        Ok(out)
    }

    fn contract_into(&self, v: &[f64], out: &mut [f64]) {
        let t = tables(self.dim);
        let masks = t.masks(self.degree);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let s = masks[i];
            for (pos, a) in mask_indices(s).enumerate() {
                let va = v[a];
                if va != 0.0 {
                    out[t.rank(s & !(1 << a))] += sign_of(pos as u32) * va * c;
                }
            }
        }
    }

    /// Coefficients of the decomposable multivector `q_1 ^ ... ^ q_k` of the columns.
    pub fn decomposable(frame: &DMatrix<f64>) -> Result<Self> {
        let mut xi = Self::scalar(frame.nrows(), 1.0)?;
        for col in frame.column_iter() {
            xi = xi.wedge_vector(col.as_slice())?;
        }
        Ok(xi)
    }

    /// `f(q_1, ..., q_k)` on the columns of `frame`.
    pub fn evaluate(&self, frame: &FrameMatrix) -> Result<f64> {
        self.evaluate_matrix(frame.matrix())
    }

    pub fn evaluate_matrix(&self, m: &DMatrix<f64>) -> Result<f64> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, m.nrows()));
        }
        if m.ncols() != self.degree {
            return Err(Error::DegreeMismatch(self.degree, m.ncols()));
        }
        let xi = Self::decomposable(m)?;
        Ok(self.dot(&xi))
    }

    pub fn evaluate_vectors(&self, vs: &[DVector<f64>]) -> Result<f64> {
        if vs.is_empty() {
            return self.evaluate_matrix(&DMatrix::zeros(self.dim, 0));
        }
        self.evaluate_matrix(&DMatrix::from_columns(vs))
    }

    /// Complex-multilinear extension evaluated on complex vectors.
    pub fn evaluate_complex(&self, vs: &[Vec<Complex64>]) -> Result<Complex64> {
        if vs.len() != self.degree {
            return Err(Error::DegreeMismatch(self.degree, vs.len()));
        }
        let t = tables(self.dim);
        let mut xi = vec![Complex64::new(1.0, 0.0)];
        for (k, v) in vs.iter().enumerate() {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch(self.dim, v.len()));
            }
            let mut next = vec![Complex64::new(0.0, 0.0); binomial(self.dim, k + 1)];
            for (i, c) in xi.iter().enumerate() {
                let s = t.masks(k)[i];
                for (a, va) in v.iter().enumerate() {
                    if s & (1 << a) != 0 {
                        continue;
                    }
                    let sign = sign_of((s >> (a + 1)).count_ones());
                    next[t.rank(s | (1 << a))] += c * va * sign;
                }
            }
            xi = next;
        }
        Ok(self.coeffs.iter().zip(&xi).map(|(f, x)| x * *f).sum())
    }

    #[inline]
    fn dot(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.dot(other))
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Hodge star for the Euclidean metric and orientation `e^0 ^ ... ^ e^{d-1}`:
    /// `f ^ *g = <f, g> Vol`.
    pub fn hodge_star(&self) -> Self {
        let t = tables(self.dim);
        let full = (1u32 << self.dim) - 1;
        let mut out = Self::zero(self.dim, self.dim - self.degree).expect("valid shape");
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let s = t.masks(self.degree)[i];
            let comp = full & !s;
            out.coeffs[t.rank(comp)] += merge_sign(s, comp) * c;
        }
        out
    }

    /// Pullback `(A.f)(v_1, ..., v_k) = f(A v_1, ..., A v_k)`.
    ///
    /// Coefficients are `f(A e_{t_1}, ..., A e_{t_k})`, computed by successive
    /// contraction with the columns of `A` while sharing common tuple prefixes.
    pub fn pullback(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, a.nrows()));
        }
        let mut out = Self::zero(self.dim, self.degree)?;
        let cols: Vec<Vec<f64>> = a.column_iter().map(|c| c.iter().copied().collect()).collect();
        let t = tables(self.dim);
        pullback_rec(self, &cols, 0, 0, &t, &mut out.coeffs);
        Ok(out)
    }

    /// Derivation action `(D_A f)(v_1..v_k) = sum_i f(.., A v_i, ..)`, the
    /// derivative at zero of `t -> exp(tA).f`.
    pub fn derivation(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, a.nrows()));
        }
        let mut out = Self::zero(self.dim, self.degree)?;
        let t = tables(self.dim);
        let masks = t.masks(self.degree);
        // D_A = sum_{a,b} A_ab e^b ^ i_{e_a}
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let s = masks[i];
            for (pos, ai) in mask_indices(s).enumerate() {
                let rest = s & !(1 << ai);
                let base = sign_of(pos as u32) * c;
                for b in 0..self.dim {
                    let x = a[(ai, b)];
                    if x == 0.0 || rest & (1 << b) != 0 {
                        continue;
                    }
                    let sign = sign_of((rest & ((1u32 << b) - 1)).count_ones());
                    out.coeffs[t.rank(rest | (1 << b))] += sign * base * x;
                }
            }
        }
        Ok(out)
    }
}

fn pullback_rec(
    f: &AlternatingForm,
    cols: &[Vec<f64>],
    start: usize,
    prefix: u32,
    t: &Tables,
    out: &mut [f64],
) {
    let d = f.dim;
    if f.degree == 0 {
        out[t.rank(prefix)] = f.coeffs[0];
        return;
    }
    if f.is_zero(0.0) {
        return;
    }
    for j in start..=(d - f.degree) {
        let mut g = AlternatingForm::zero(d, f.degree - 1).expect("valid shape");
        f.contract_into(&cols[j], &mut g.coeffs);
        pullback_rec(&g, cols, j + 1, prefix | (1 << j), t, out);
    }
}

impl Add for &AlternatingForm {
    type Output = AlternatingForm;
    fn add(self, rhs: Self) -> AlternatingForm {
        self.try_add(rhs).expect("form shapes must agree")
    }
}

impl Add for AlternatingForm {
    type Output = AlternatingForm;
    fn add(self, rhs: Self) -> AlternatingForm {
        &self + &rhs
    }
}

impl AddAssign<&AlternatingForm> for AlternatingForm {
    fn add_assign(&mut self, rhs: &AlternatingForm) {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree), "form shapes must agree");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &AlternatingForm {
    type Output = AlternatingForm;
    fn sub(self, rhs: Self) -> AlternatingForm {
        self + &rhs.scale(-1.0)
    }
}

impl Sub for AlternatingForm {
    type Output = AlternatingForm;
    fn sub(self, rhs: Self) -> AlternatingForm {
        &self - &rhs
    }
}

impl Neg for &AlternatingForm {
    type Output = AlternatingForm;
    fn neg(self) -> AlternatingForm {
        self.scale(-1.0)
    }
}

impl Mul<&AlternatingForm> for f64 {
    type Output = AlternatingForm;
    fn mul(self, rhs: &AlternatingForm) -> AlternatingForm {
        rhs.scale(self)
    }
}

impl Mul<AlternatingForm> for f64 {
    type Output = AlternatingForm;
    fn mul(self, rhs: AlternatingForm) -> AlternatingForm {
        rhs.scale(self)
    }
}

/// A list of `k` vectors in `R^d`, stored as the columns of a `d x k` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix(DMatrix<f64>);

impl FrameMatrix {
    pub fn new(m: DMatrix<f64>) -> Self {
        FrameMatrix(m)
    }

    pub fn from_columns(cols: &[DVector<f64>]) -> Self {
        FrameMatrix(DMatrix::from_columns(cols))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    /// `max |Q^T Q - Id|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.0.transpose() * &self.0;
        let id = DMatrix::<f64>::identity(self.k(), self.k());
        (g - id).amax()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.orthonormality_defect() <= tol
    }
}

impl Serialize for FrameMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cols: Vec<Vec<f64>> = self.0.column_iter().map(|c| c.iter().copied().collect()).collect();
        cols.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrameMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cols: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != rows) {
            return Err(serde::de::Error::custom("ragged frame columns"));
        }
        let data: Vec<f64> = cols.into_iter().flatten().collect();
        let k = if rows == 0 { 0 } else { data.len() / rows };
        Ok(FrameMatrix(DMatrix::from_vec(rows, k, data)))
    }
}
