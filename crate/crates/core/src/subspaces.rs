//! Oriented planes in `H^n`: random Grassmannian samples, the standard model
//! faces and their `Sp(n)` orbits, and the classification predicates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{AlternatingForm, FrameMatrix};
use crate::quaternionic::{ComplexForm, QuaternionicModel, Structure};

/// Threshold for the subspace predicates.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// An orthonormal frame with an orientation sign; a negative sign reverses
/// the orientation given by the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFrame {
    pub frame: FrameMatrix,
    pub orientation: f64,
}

impl SubspaceFrame {
    pub fn new(m: DMatrix<f64>) -> Self {
        Self { frame: FrameMatrix::new(m), orientation: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.frame.k()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.ambient_dim()
    }

    /// Columns with the orientation folded into the first one.
    pub fn oriented_matrix(&self) -> DMatrix<f64> {
        let mut m = self.frame.matrix().clone();
        if self.orientation < 0.0 && m.ncols() > 0 {
            m.column_mut(0).scale_mut(-1.0);
        }
        m
    }

    pub fn reversed(&self) -> Self {
        Self { frame: self.frame.clone(), orientation: -self.orientation }
    }

    pub fn evaluate(&self, f: &AlternatingForm) -> Result<f64> {
        f.evaluate_matrix(&self.oriented_matrix())
    }

    /// `g W` for a linear map `g`.
    pub fn transformed(&self, g: &DMatrix<f64>) -> Self {
        Self { frame: FrameMatrix::new(g * self.frame.matrix()), orientation: self.orientation }
    }

    pub fn projector(&self) -> DMatrix<f64> {
        let q = self.frame.matrix();
        q * q.transpose()
    }

    /// Principal angles (radians) to another plane of the same dimension.
    pub fn principal_angles(&self, other: &Self) -> Vec<f64> {
        let m = self.frame.matrix().transpose() * other.frame.matrix();
        m.singular_values().iter().map(|s| s.clamp(-1.0, 1.0).acos()).collect()
    }
}

/// The model faces used throughout the catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceKind {
    /// Quaternionic subspace of quaternionic dimension `p`.
    Quaternionic(usize),
    /// `I`-complex subspace of complex dimension `n`, isotropic for `Omega_I`.
    ComplexLagrangian,
    /// `I`-complex isotropic subspace of complex dimension `p < n`.
    ComplexIsotropic(usize),
    /// `I`-complex coisotropic subspace of complex dimension `n + extra`.
    ComplexCoisotropic(usize),
}

impl FaceKind {
    pub fn real_dim(&self, n: usize) -> usize {
        match *self {
            FaceKind::Quaternionic(p) => 4 * p,
            FaceKind::ComplexLagrangian => 2 * n,
            FaceKind::ComplexIsotropic(p) => 2 * p,
            FaceKind::ComplexCoisotropic(k) => 2 * (n + k),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let ok = match *self {
            FaceKind::Quaternionic(p) => (1..=n).contains(&p),
            FaceKind::ComplexLagrangian => true,
            FaceKind::ComplexIsotropic(p) => p >= 1 && p < n,
            FaceKind::ComplexCoisotropic(k) => k <= n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange(format!("{self:?} for n = {n}")))
        }
    }
}

/// Result of [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceClass {
    pub dim: usize,
    /// `|P L - L P|` for `L = I, J, K`.
    pub complex_defect: [f64; 3],
    pub complex: [bool; 3],
    pub quaternionic: bool,
    /// Structure of the designated holomorphic 2-form.
    pub structure: Structure,
    /// `max |Omega(w_a, w_b)|` over frame columns.
    pub isotropy_defect: f64,
    pub isotropic: bool,
    pub restricted_singular_values: Vec<f64>,
    /// Complex rank of `Omega` restricted to the plane.
    pub restricted_rank: usize,
    pub lagrangian: bool,
    pub coisotropic: bool,
    /// Smallest distance, in decades, between any tested quantity and the threshold.
    pub margin: f64,
}

impl SubspaceClass {
    pub fn is_complex(&self, s: Structure) -> bool {
        self.complex[s as usize]
    }

    /// Whether the plane belongs to `kind` for the designated structure.
    pub fn matches(&self, kind: FaceKind, n: usize) -> bool {
        if self.dim != kind.real_dim(n) {
            return false;
        }
        let cx = self.is_complex(self.structure);
        match kind {
            FaceKind::Quaternionic(_) => self.quaternionic,
            FaceKind::ComplexLagrangian => cx && self.lagrangian,
            FaceKind::ComplexIsotropic(_) => cx && self.isotropic,
            FaceKind::ComplexCoisotropic(_) => cx && self.coisotropic,
        }
    }
}

fn decades(value: f64, tol: f64) -> f64 {
    if value <= 0.0 {
        f64::INFINITY
    } else {
        (value / tol).log10().abs()
    }
}

/// Classifies `w` against the complex structures of `model` and the
/// holomorphic 2-form `omega` of structure `s`.
pub fn classify(w: &SubspaceFrame, model: &QuaternionicModel, omega: &ComplexForm, s: Structure) -> SubspaceClass {
    let p = w.projector();
    let mut complex_defect = [0.0; 3];
    let mut margin = f64::INFINITY;
    for l in Structure::ALL {
        let op = model.op(l);
        let defect = (&p * op - op * &p).norm();
        complex_defect[l as usize] = defect;
        margin = margin.min(decades(defect, CLASSIFY_TOL));
    }
    let complex = complex_defect.map(|d| d < CLASSIFY_TOL);
    let q = w.frame.matrix();
    let k = q.ncols();
    let cols: Vec<DVector<f64>> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut gram = DMatrix::<Complex64>::zeros(k, k);
    let mut isotropy_defect: f64 = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            let pair = DMatrix::from_columns(&[cols[a].clone(), cols[b].clone()]);
            let z = omega.evaluate_matrix(&pair).expect("2-form on a pair");
            gram[(a, b)] = z;
            gram[(b, a)] = -z;
            isotropy_defect = isotropy_defect.max(z.norm());
        }
    }
    let isotropic = isotropy_defect < CLASSIFY_TOL;
    margin = margin.min(decades(isotropy_defect, CLASSIFY_TOL));
    let mut sv: Vec<f64> = if k == 0 { Vec::new() } else { gram.singular_values().iter().copied().collect() };
    sv.sort_by(|a, b| b.total_cmp(a));
    let restricted_rank = sv.iter().filter(|&&x| x > CLASSIFY_TOL).count();
    for &x in &sv {
        margin = margin.min(decades(x, CLASSIFY_TOL));
    }
    let n = model.n();
    let cx = complex[s as usize];
    let m = k / 2;
    let lagrangian = cx && isotropic && m == n;
    let coisotropic = cx && m >= n && restricted_rank == 2 * (m - n);
    SubspaceClass {
        dim: k,
        complex_defect,
        complex,
        quaternionic: complex.iter().all(|&c| c),
        structure: s,
        isotropy_defect,
        isotropic,
        restricted_singular_values: sv,
        restricted_rank,
        lagrangian,
        coisotropic,
        margin,
    }
}

/// Classification with `Omega_I = omega_J + i omega_K`.
pub fn classify_default(w: &SubspaceFrame, model: &QuaternionicModel) -> SubspaceClass {
    classify(w, model, &model.holomorphic_symplectic(Structure::I), Structure::I)
}

/// Haar-uniform `k`-plane in `R^dim`: QR of a Gaussian matrix with the signs of
/// `diag(R)` made positive.
pub fn random_plane(dim: usize, k: usize, seed: u64) -> Result<SubspaceFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_plane_with(dim, k, &mut rng)
}

pub fn random_plane_with<R: rand::Rng>(dim: usize, k: usize, rng: &mut R) -> Result<SubspaceFrame> {
    if k == 0 || k > dim {
        return Err(Error::OutOfRange(format!("plane dimension {k} in R^{dim}")));
    }
    let g = DMatrix::<f64>::from_fn(dim, k, |_, _| StandardNormal.sample(rng));
    Ok(SubspaceFrame::new(orthonormalize(g)))
}

/// Q factor of a thin QR decomposition with positive `diag(R)`.
pub fn orthonormalize(m: DMatrix<f64>) -> DMatrix<f64> {
    let k = m.ncols();
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).scale_mut(-1.0);
        }
    }
    q
}

/// Random element of `Sp(n)`: the exponential of a random skew matrix projected
/// onto the commutant of `I, J, K`.
pub fn random_sp_n(model: &QuaternionicModel, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_sp_n_with(model, &mut rng)
}

pub fn random_sp_n_with<R: rand::Rng>(model: &QuaternionicModel, rng: &mut R) -> Result<DMatrix<f64>> {
    let d = model.dim();
    let a = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let a = &a - a.transpose();
    let mut x = a.clone();
    for s in Structure::ALL {
        let l = model.op(s);
        x -= l * &a * l;
    }
    let x = x * 0.25;
    let g = x.exp();
    let residual = sp_n_residual(model, &g);
    if residual > 1e-10 {
        return Err(Error::ModelInvariant(format!("Sp(n) sample residual {residual:.3e}")));
    }
    Ok(g)
}

/// Largest of `|gL - Lg|` and `|g^T g - 1|`.
pub fn sp_n_residual(model: &QuaternionicModel, g: &DMatrix<f64>) -> f64 {
    let d = model.dim();
    let mut r = (g.transpose() * g - DMatrix::<f64>::identity(d, d)).amax();
    for s in Structure::ALL {
        let l = model.op(s);
        r = r.max((g * l - l * g).amax());
    }
    r
}

/// Coordinate frame of a model face, in the model's own `I, J, K` labels.
pub fn standard_face(model: &QuaternionicModel, kind: FaceKind) -> Result<SubspaceFrame> {
    let n = model.n();
    kind.validate(n)?;
    let mut cols = Vec::new();
    match kind {
        FaceKind::Quaternionic(p) => {
            for line in 0..p {
                for slot in 0..4 {
                    cols.push(model.basis_vector(line, slot));
                }
            }
        }
        FaceKind::ComplexLagrangian | FaceKind::ComplexIsotropic(_) | FaceKind::ComplexCoisotropic(_) => {
            let lines = match kind {
                FaceKind::ComplexIsotropic(p) => p,
                _ => n,
            };
            for line in 0..lines {
                cols.push(model.basis_vector(line, 0));
                cols.push(model.basis_vector(line, 1));
            }
            if let FaceKind::ComplexCoisotropic(k) = kind {
                for line in 0..k {
                    cols.push(model.basis_vector(line, 2));
                    cols.push(model.basis_vector(line, 3));
                }
            }
        }
    }
    Ok(SubspaceFrame::new(DMatrix::from_columns(&cols)))
}

/// The standard face moved by a random element of `Sp(n)`.
pub fn random_face(model: &QuaternionicModel, kind: FaceKind, seed: u64) -> Result<SubspaceFrame> {
    let base = standard_face(model, kind)?;
    let g = random_sp_n(model, seed)?;
    Ok(base.transformed(&g))
}
