//! Comass estimation by multi-start Riemannian ascent on the Stiefel manifold,
//! the exact 2-form comass, face verification and stabilizer dimensions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{FaceClass, NamedForm};
use crate::error::{Error, Result};
use crate::exterior::AlternatingForm;
use crate::quaternionic::{QuaternionicModel, Structure};
use crate::subspaces::{classify, orthonormalize, random_plane_with, SubspaceClass, SubspaceFrame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComassOptions {
    pub max_iters: usize,
    /// Riemannian gradient norm at which a start counts as converged.
    pub grad_tol: f64,
    /// Sufficient-increase constant of the Armijo test.
    pub armijo: f64,
    /// Values within this distance of the best are reported as ties.
    pub tie_tol: f64,
    pub histogram_bin: usize,
}

impl Default for ComassOptions {
    fn default() -> Self {
        Self { max_iters: 500, grad_tol: 1e-9, armijo: 1e-4, tie_tol: 1e-9, histogram_bin: 50 }
    }
}

pub const DEFAULT_STARTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComassStatus {
    Converged,
    /// No start reached the gradient tolerance; the value is a lower bound only.
    NotConverged,
    ZeroForm,
}

/// Outcome of one ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartStats {
    pub start: usize,
    /// `+1` when maximizing `F`, `-1` for `-F`.
    pub sign: i8,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Maximizer {
    pub start: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub frame: SubspaceFrame,
    pub face_class: Option<FaceClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComassReport {
    pub form: String,
    pub comass: f64,
    pub status: ComassStatus,
    pub frame: Option<SubspaceFrame>,
    pub face_class: Option<FaceClass>,
    pub starts: usize,
    pub seed: u64,
    pub grad_norm: f64,
    pub converged_runs: usize,
    pub iters_histogram: Vec<HistogramBin>,
    /// Distinct frames attaining the best value up to the tie tolerance.
    pub maximizers: Vec<Maximizer>,
    #[serde(skip)]
    pub runs: Vec<StartStats>,
}

impl ComassReport {
    /// Classifies every maximizer against `model` with the holomorphic
    /// 2-form of structure `s`.
    pub fn classify_faces(&mut self, model: &QuaternionicModel, s: Structure) {
        for m in &mut self.maximizers {
            m.face_class = Some(face_class_of(&classify_for(&m.frame, model, s), model.n()));
        }
        self.face_class = self.maximizers.first().and_then(|m| m.face_class);
    }
}

pub fn classify_for(w: &SubspaceFrame, model: &QuaternionicModel, s: Structure) -> SubspaceClass {
    classify(w, model, &model.holomorphic_symplectic(s), s)
}

pub fn face_class_of(class: &SubspaceClass, n: usize) -> FaceClass {
    let m = class.dim / 2;
    if class.dim > 0 && class.quaternionic {
        FaceClass::Quaternionic
    } else if !class.is_complex(class.structure) {
        FaceClass::Unclassified
    } else if class.lagrangian {
        FaceClass::ComplexLagrangian
    } else if m < n && class.isotropic {
        FaceClass::ComplexIsotropic
    } else if m > n && class.coisotropic {
        FaceClass::ComplexCoisotropic
    } else {
        FaceClass::Complex
    }
}

/// `F(Q)` and the Euclidean gradient, column `i` being the 1-form
/// `x -> f(q_1, .., x, .., q_k)`.
pub fn value_and_gradient(f: &AlternatingForm, q: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let k = f.degree();
    if q.ncols() != k {
        return Err(Error::DegreeMismatch(k, q.ncols()));
    }
    if q.nrows() != f.dim() {
        return Err(Error::DimensionMismatch(f.dim(), q.nrows()));
    }
    let cols: Vec<Vec<f64>> = q.column_iter().map(|c| c.iter().copied().collect()).collect();
    let mut grad = DMatrix::zeros(f.dim(), k);
    let mut prefix = f.clone();
    for i in 0..k {
        let mut h = prefix.clone();
        for c in &cols[i + 1..] {
            h = h.contract(c)?;
        }
        let sign = if (k - 1 - i) % 2 == 0 { 1.0 } else { -1.0 };
        for (a, &x) in h.coeffs().iter().enumerate() {
            grad[(a, i)] = sign * x;
        }
        if i + 1 < k {
            prefix = prefix.contract(&cols[i])?;
        }
    }
    let value = grad.column(k - 1).dot(&q.column(k - 1));
    Ok((value, grad))
}

/// Projection of `g` onto the tangent space of the Stiefel manifold at `q`.
pub fn tangent_projection(q: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let m = q.transpose() * g;
    let sym = (&m + m.transpose()) * 0.5;
    g - q * sym
}

/// Gradient ascent of `sign * F` from `q0`.
fn ascend(f: &AlternatingForm, q0: DMatrix<f64>, sign: f64, opts: &ComassOptions) -> Result<(DMatrix<f64>, f64, usize, bool)> {
    let mut q = q0;
    let (v, g) = value_and_gradient(f, &q)?;
    let mut value = sign * v;
    let mut r = tangent_projection(&q, &(g * sign));
    let mut norm = r.norm();
    let mut alpha = 1.0;
    let mut iters = 0;
    while iters < opts.max_iters && norm >= opts.grad_tol {
        iters += 1;
        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = orthonormalize(&q + &r * step);
            let tv = sign * f.evaluate_matrix(&trial)?;
            // rounding slack, so that steps near a maximizer are not all rejected
            let slack = 4.0 * f64::EPSILON * value.abs().max(1.0);
            if tv >= value + opts.armijo * step * norm * norm - slack {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else { break };
        let (nv, ng) = value_and_gradient(f, &next)?;
        let nr = tangent_projection(&next, &(ng * sign));
        let s = &next - &q;
        let y = &nr - &r;
        let sy = s.dot(&y).abs();
        alpha = if sy > 0.0 { (s.dot(&s) / sy).clamp(1e-6, 1e3) } else { 1.0 };
        q = next;
        value = sign * nv;
        r = nr;
        norm = r.norm();
    }
    Ok((q, norm, iters, norm < opts.grad_tol))
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

fn same_plane(a: &SubspaceFrame, b: &SubspaceFrame) -> bool {
    let m = a.oriented_matrix().transpose() * b.oriented_matrix();
    m.determinant() > 1.0 - 1e-6
}

fn histogram(runs: &[StartStats], bin: usize, max_iters: usize) -> Vec<HistogramBin> {
    let bin = bin.max(1);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in runs {
        *counts.entry(r.iterations.min(max_iters) / bin).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(b, count)| HistogramBin { lo: b * bin, hi: (b + 1) * bin - 1, count })
        .collect()
}

/// Multi-start estimate of `max |f(Q)|` over orthonormal frames.
pub fn comass_estimate(f: &AlternatingForm, starts: usize, seed: u64, opts: &ComassOptions) -> Result<ComassReport> {
    comass_estimate_named(f, "form", starts, seed, opts)
}

pub fn comass_estimate_named(
    f: &AlternatingForm,
    name: &str,
    starts: usize,
    seed: u64,
    opts: &ComassOptions,
) -> Result<ComassReport> {
    let k = f.degree();
    if k == 0 {
        return Err(Error::DegreeUnderflow { degree: 0, needed: 1 });
    }
    if starts == 0 {
        return Err(Error::OutOfRange("starts must be positive".into()));
    }
    let mut report = ComassReport {
        form: name.to_string(),
        comass: 0.0,
        status: ComassStatus::ZeroForm,
        frame: None,
        face_class: None,
        starts,
        seed,
        grad_norm: 0.0,
        converged_runs: 0,
        iters_histogram: Vec::new(),
        maximizers: Vec::new(),
        runs: Vec::new(),
    };
    if f.is_zero(0.0) {
        return Ok(report);
    }
    let d = f.dim();
    let per_start: Vec<Result<Vec<(StartStats, SubspaceFrame)>>> = (0..starts)
        .into_par_iter()
        .map(|start| {
            let mut rng = start_rng(seed, start);
            let q0 = random_plane_with(d, k, &mut rng)?.frame.into_matrix();
            let mut out = Vec::with_capacity(2);
            for sign in [1.0, -1.0] {
                let (q, grad_norm, iterations, converged) = ascend(f, q0.clone(), sign, opts)?;
                let mut frame = SubspaceFrame::new(q);
                if sign < 0.0 {
                    frame = frame.reversed();
                }
                let value = frame.evaluate(f)?;
                let stats = StartStats { start, sign: sign as i8, value, iterations, grad_norm, converged };
                out.push((stats, frame));
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(2 * starts);
    for r in per_start {
        all.extend(r?);
    }
    let top = all.iter().map(|(s, _)| s.value).fold(f64::NEG_INFINITY, f64::max);
    // Prefer converged runs among the ties; their frames classify cleanly.
    let tied = |s: &StartStats| s.value >= top - opts.tie_tol;
    let any_converged_tie = all.iter().any(|(s, _)| s.converged && tied(s));
    let mut maximizers: Vec<Maximizer> = Vec::new();
    for (stats, frame) in &all {
        let eligible = if any_converged_tie { stats.converged && tied(stats) } else { stats.value == top };
        if eligible && !maximizers.iter().any(|m| same_plane(&m.frame, frame)) {
            maximizers.push(Maximizer {
                start: stats.start,
                value: stats.value,
                grad_norm: stats.grad_norm,
                frame: frame.clone(),
                face_class: None,
            });
        }
    }
    maximizers.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.start.cmp(&b.start)));
    let best_value = maximizers[0].value;
    let runs: Vec<StartStats> = all.into_iter().map(|(s, _)| s).collect();
    report.converged_runs = runs.iter().filter(|r| r.converged).count();
    report.status = if report.converged_runs > 0 { ComassStatus::Converged } else { ComassStatus::NotConverged };
    report.comass = best_value;
    report.grad_norm = maximizers[0].grad_norm;
    report.frame = Some(maximizers[0].frame.clone());
    report.iters_histogram = histogram(&runs, opts.histogram_bin, opts.max_iters);
    report.maximizers = maximizers;
    report.runs = runs;
    Ok(report)
}

/// Largest singular value of the coefficient matrix of a 2-form.
pub fn comass_exact_2form(f: &AlternatingForm) -> Result<f64> {
    if f.degree() != 2 {
        return Err(Error::DegreeMismatch(2, f.degree()));
    }
    let d = f.dim();
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let c = f.coeff(&[i, j]);
            a[(i, j)] = c;
            a[(j, i)] = -c;
        }
    }
    Ok(a.singular_values().max())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceVerdict {
    pub form: String,
    pub claimed: FaceClass,
    pub positives: usize,
    pub positives_at_one: usize,
    pub min_positive: f64,
    pub negatives: usize,
    pub negatives_below: usize,
    pub max_negative: f64,
    /// Face classes of the optimizer's maximizers, when a report was supplied.
    pub maximizer_classes: Vec<FaceClass>,
    pub maximizers_in_class: Option<bool>,
    pub offending: Vec<SubspaceFrame>,
}

impl FaceVerdict {
    pub fn passed(&self) -> bool {
        self.positives_at_one == self.positives
            && self.negatives_below == self.negatives
            && self.maximizers_in_class != Some(false)
    }
}

pub const FACE_TOL: f64 = 1e-9;

/// Checks that `nf` is 1 on every positive frame and below `1 - margin` on
/// every negative one, and that the optimizer's maximizers lie in the claimed
/// class.
pub fn verify_faces(
    nf: &NamedForm,
    model: &QuaternionicModel,
    positives: &[SubspaceFrame],
    negatives: &[SubspaceFrame],
    margin: f64,
    report: Option<&ComassReport>,
) -> Result<FaceVerdict> {
    let mut verdict = FaceVerdict {
        form: format!("{:?}", nf.name),
        claimed: nf.effective_face_class(),
        positives: positives.len(),
        positives_at_one: 0,
        min_positive: f64::INFINITY,
        negatives: negatives.len(),
        negatives_below: 0,
        max_negative: f64::NEG_INFINITY,
        maximizer_classes: Vec::new(),
        maximizers_in_class: None,
        offending: Vec::new(),
    };
    for w in positives {
        let v = w.evaluate(&nf.form)?;
        verdict.min_positive = verdict.min_positive.min(v);
        if (v - 1.0).abs() <= FACE_TOL {
            verdict.positives_at_one += 1;
        } else {
            verdict.offending.push(w.clone());
        }
    }
    for w in negatives {
        let v = w.evaluate(&nf.form)?;
        verdict.max_negative = verdict.max_negative.max(v);
        if v < 1.0 - margin {
            verdict.negatives_below += 1;
        } else {
            verdict.offending.push(w.clone());
        }
    }
    if let Some(report) = report {
        verdict.maximizer_classes = report
            .maximizers
            .iter()
            .map(|m| face_class_of(&classify_for(&m.frame, model, nf.face_structure), model.n()))
            .collect();
        let claimed = nf.effective_face_class();
        let ok = verdict.maximizer_classes.iter().all(|&c| class_within(c, claimed));
        verdict.maximizers_in_class = Some(ok);
    }
    Ok(verdict)
}

/// Whether a detected class is compatible with a claimed one. Coisotropic
/// planes of complex dimension `2n` are the whole space, which is quaternionic.
pub fn class_within(found: FaceClass, claimed: FaceClass) -> bool {
    match claimed {
        FaceClass::MixedPerRegion | FaceClass::Unclassified => true,
        FaceClass::ComplexCoisotropic => {
            matches!(found, FaceClass::ComplexCoisotropic | FaceClass::ComplexLagrangian | FaceClass::Quaternionic)
        }
        c => found == c,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct U1Verdict {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `d/dt f(rho(t) W)` at the grid points.
    pub derivatives: Vec<f64>,
    pub grid_verdict: bool,
    /// Value of the weight-zero part on `W`.
    pub weight_zero_value: f64,
    pub direct_verdict: bool,
    pub agree: bool,
}

/// Compares "`rho_L(t) W` is a face of `f` on a `2 deg + 2` point grid" with
/// "`W` is a face of the weight-zero part of `f`".
pub fn u1_face_criterion(
    f: &AlternatingForm,
    w: &SubspaceFrame,
    model: &QuaternionicModel,
    s: Structure,
) -> Result<U1Verdict> {
    let deg = f.degree();
    if w.dim() != deg {
        return Err(Error::DegreeMismatch(deg, w.dim()));
    }
    let steps = 2 * deg + 2;
    let l = model.op(s);
    let mut grid = Vec::with_capacity(steps);
    let mut values = Vec::with_capacity(steps);
    let mut derivatives = Vec::with_capacity(steps);
    for j in 0..steps {
        let t = 2.0 * std::f64::consts::PI * j as f64 / steps as f64;
        let q = model.rho(s, t) * w.oriented_matrix();
        let (v, g) = value_and_gradient(f, &q)?;
        grid.push(t);
        values.push(v);
        derivatives.push(g.dot(&(l * &q)));
    }
    let grid_verdict = values.iter().all(|&v| v >= 1.0 - FACE_TOL) && derivatives.iter().all(|d| d.abs() <= 1e-6);
    let zero = model.real_pp_part(f, s)?;
    let weight_zero_value = w.evaluate(&zero)?;
    let direct_verdict = weight_zero_value >= 1.0 - FACE_TOL;
    Ok(U1Verdict {
        grid,
        values,
        derivatives,
        grid_verdict,
        weight_zero_value,
        direct_verdict,
        agree: grid_verdict == direct_verdict,
    })
}

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Largest acceptable ratio of the biggest discarded to the smallest kept singular value.
pub const GAP_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerReport {
    pub ambient_dim: usize,
    pub degree: usize,
    pub kernel_dim: usize,
    pub rank: usize,
    pub gap_ratio: f64,
    pub well_conditioned: bool,
}

/// Matrix of `X -> D_X f` on `gl(d)`, columns indexed by `E_ab` in row-major order.
pub fn stabilizer_map(f: &AlternatingForm) -> Result<DMatrix<f64>> {
    let d = f.dim();
    let rows = f.coeffs().len();
    let mut m = DMatrix::zeros(rows, d * d);
    let mut e = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            e[(a, b)] = 1.0;
            let image = f.derivation(&e)?;
            m.column_mut(a * d + b).copy_from_slice(image.coeffs());
            e[(a, b)] = 0.0;
        }
    }
    Ok(m)
}

/// Dimension of the Lie algebra of `GL(d)` fixing `f`, with the rank-gap diagnostic.
pub fn stabilizer_report(f: &AlternatingForm) -> Result<StabilizerReport> {
    let m = stabilizer_map(f)?;
    let d = f.dim();
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let threshold = RANK_TOL * top;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let smallest_kept = if rank > 0 { sv[rank - 1] } else { 0.0 };
    let largest_dropped = sv.get(rank).copied().unwrap_or(0.0);
    let gap_ratio = if smallest_kept > 0.0 { largest_dropped / smallest_kept } else { 0.0 };
    Ok(StabilizerReport {
        ambient_dim: d,
        degree: f.degree(),
        kernel_dim: d * d - rank,
        rank,
        gap_ratio,
        well_conditioned: gap_ratio <= GAP_TOL,
    })
}

/// Kernel dimension of `X -> D_X f`; errors when the rank decision is ill-conditioned.
pub fn stabilizer_dimension(f: &AlternatingForm) -> Result<usize> {
    let r = stabilizer_report(f)?;
    if !r.well_conditioned {
        return Err(Error::RankGap { ratio: r.gap_ratio });
    }
    Ok(r.kernel_dim)
}

/// One node of a sweep over the `Psi_{l,m,v}` family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionNode {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub comass: f64,
    pub in_region_predicted: bool,
    /// Interior nodes: comass at most `1 + tol`; exterior nodes: a witness above 1.
    pub consistent: bool,
    pub status: ComassStatus,
}

/// Grid `{-range, -range + step, .., range}` per axis.
pub fn region_grid(step: f64, range: f64) -> Result<Vec<[f64; 3]>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::OutOfRange(format!("grid step {step}")));
    }
    let half = (range / step + 1e-9).floor() as i64;
    let axis: Vec<f64> = (-half..=half).map(|i| i as f64 * step).collect();
    let mut nodes = Vec::with_capacity(axis.len().pow(3));
    for &l in &axis {
        for &m in &axis {
            for &v in &axis {
                nodes.push([l, m, v]);
            }
        }
    }
    Ok(nodes)
}

pub fn sweep_region(
    model: &QuaternionicModel,
    nodes: &[[f64; 3]],
    starts: usize,
    seed: u64,
    opts: &ComassOptions,
    tol: f64,
) -> Result<Vec<RegionNode>> {
    let results: Vec<Result<RegionNode>> = nodes
        .par_iter()
        .enumerate()
        .map(|(idx, &[l, m, v])| {
            let nf = crate::catalog::bryant_harvey(model, l, m, v)?;
            let node_seed = seed.wrapping_add((idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let report = comass_estimate_named(&nf.form, "bryant_harvey", starts, node_seed, opts)?;
            let inside = nf.region_ok.unwrap_or(false);
            let consistent = if inside { report.comass <= 1.0 + tol } else { report.comass > 1.0 };
            Ok(RegionNode {
                lambda: l,
                mu: m,
                nu: v,
                comass: report.comass,
                in_region_predicted: inside,
                consistent,
                status: report.status,
            })
        })
        .collect();
    results.into_iter().collect()
}
