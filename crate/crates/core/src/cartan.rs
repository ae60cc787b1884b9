//! Cartan splits g = k ⊕ p of semisimple matrix Lie algebras, the Mostow
//! compatibility solver (finding an inner product S whose Cartan involution
//! of sl(n,ℝ) restricts to the given split), ambient decompositions
//! sl(n,ℝ) = 𝒜 ⊕ 𝒮 induced by S, and the normal Lie triple system
//! n = {Y ∈ 𝒮 : Y ⊥ p, [Y,p] = 0}.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::liealg::{
    self, bracket, expand_in_span, LieAlgError, LieAlgebraPresentation,
};
use crate::numerics::{self, NumericsError, SpdFunction, SymMatrix};
use crate::spdspace::{SpdError, SpdPoint};

/// Threshold on normalized expansion residuals for bracket membership
/// ([k,k] ⊂ k and friends).
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Relative eigenvalue threshold for the Killing sign checks on k and p.
pub const KILLING_SIGN_REL_TOL: f64 = 1e-8;
/// Default relative tolerance for the compatibility kernel.
pub const DEFAULT_KERNEL_REL_TOL: f64 = 1e-9;
/// A kernel element is accepted as positive definite when
/// λ_min > PD_ACCEPT_RATIO · λ_max.
pub const PD_ACCEPT_RATIO: f64 = 1e-6;
/// Residual bound certified by [`CompatibilityCertificate`].
pub const CERTIFICATE_RESIDUAL_TOL: f64 = 1e-9;
/// Gram–Schmidt drop tolerance for the ambient eigenspace bases.
const AMBIENT_DROP_TOL: f64 = 1e-10;
/// Precondition bound for [`normal_triple_system`].
pub const COMPATIBILITY_PRECONDITION_TOL: f64 = 1e-9;
/// Kernel tolerance for the triple-system nullspace.
const TRIPLE_KERNEL_REL_TOL: f64 = 1e-9;

/// Subgradient-ascent schedule for the positive-definite search.
const PD_SEARCH_ITERATIONS: usize = 500;
const PD_SEARCH_RANDOM_RESTARTS: usize = 8;

#[derive(Debug, Error)]
pub enum CartanError {
    #[error("invalid index partition: {reason}")]
    InvalidPartition { reason: String },
    #[error("compatibility kernel is empty; closest-to-failing input invariant: {diagnosis}")]
    EmptyKernel { diagnosis: Box<SplitDiagnosis> },
    #[error(
        "no positive definite element found in the compatibility kernel; \
         closest-to-failing input invariant: {diagnosis}"
    )]
    NoPositiveDefiniteElement { diagnosis: Box<SplitDiagnosis> },
    #[error("matrix is singular")]
    Singular,
    #[error("ambient {part} eigenspace has dimension {got}, expected {expected}")]
    EigenspaceDimension { part: &'static str, expected: usize, got: usize },
    #[error(
        "split is not compatible with the ambient decomposition \
         (k residual {k_residual:e}, p residual {p_residual:e})"
    )]
    IncompatibleInputs { k_residual: f64, p_residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lie(#[from] LieAlgError),
    #[error(transparent)]
    Spd(#[from] SpdError),
}

/// A Cartan split of a presented algebra: which basis indices span k and
/// which span p. The basis must be adapted to the split (every element lies
/// in exactly one part).
#[derive(Debug, Clone)]
pub struct CartanSplit {
    g: LieAlgebraPresentation,
    k_idx: Vec<usize>,
    p_idx: Vec<usize>,
}

impl CartanSplit {
    pub fn new(
        g: LieAlgebraPresentation,
        k_idx: Vec<usize>,
        p_idx: Vec<usize>,
    ) -> Result<Self, CartanError> {
        let d = g.dim();
        let mut seen = vec![false; d];
        for &i in k_idx.iter().chain(p_idx.iter()) {
            if i >= d {
                return Err(CartanError::InvalidPartition {
                    reason: format!("index {i} out of range for dimension {d}"),
                });
            }
            if seen[i] {
                return Err(CartanError::InvalidPartition {
                    reason: format!("index {i} appears twice"),
                });
            }
            seen[i] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(CartanError::InvalidPartition {
                reason: format!("index {missing} belongs to neither k nor p"),
            });
        }
        Ok(CartanSplit { g, k_idx, p_idx })
    }

    pub fn g(&self) -> &LieAlgebraPresentation {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn k_idx(&self) -> &[usize] {
        &self.k_idx
    }

    pub fn p_idx(&self) -> &[usize] {
        &self.p_idx
    }

    pub fn k_mats(&self) -> Vec<DMatrix<f64>> {
        self.k_idx.iter().map(|&i| self.g.basis()[i].clone()).collect()
    }

    pub fn p_mats(&self) -> Vec<DMatrix<f64>> {
        self.p_idx.iter().map(|&i| self.g.basis()[i].clone()).collect()
    }
}

/// Measured invariants of a [`CartanSplit`], one clause per field. Residuals
/// that cannot be computed (degenerate basis, non-closed brackets) are set to
/// `f64::MAX`; the Killing eigenvalue fields are `None` when the clause is
/// vacuous (empty part) or the Killing form is not computable.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SplitReport {
    pub kk_residual: f64,
    pub kp_residual: f64,
    pub pp_residual: f64,
    pub killing_k_max_eig: Option<f64>,
    pub killing_p_min_eig: Option<f64>,
    pub killing_scale: Option<f64>,
    pub kk_ok: bool,
    pub kp_ok: bool,
    pub pp_ok: bool,
    pub killing_k_negative: bool,
    pub killing_p_positive: bool,
    pub pass: bool,
}

/// Worst-margin analysis of a [`SplitReport`], attached to solver failures:
/// when the compatibility kernel is empty or contains no positive definite
/// element, the input was not actually a Cartan split of a semisimple
/// algebra, and this names the invariant closest to (or past) failing.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SplitDiagnosis {
    pub closest_to_failing: String,
    /// Measured value over threshold; above 1 the clause actually fails.
    pub severity: f64,
    pub report: SplitReport,
}

impl std::fmt::Display for SplitDiagnosis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (severity {:.3e})", self.closest_to_failing, self.severity)
    }
}

fn membership_residual(
    pairs: &[(&DMatrix<f64>, &DMatrix<f64>)],
    span: &[DMatrix<f64>],
) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in pairs {
        let br = match bracket(x, y) {
            Ok(b) => b,
            Err(_) => return f64::MAX,
        };
        let scale = numerics::frob(&br).max(1.0);
        match expand_in_span(span, &br) {
            Ok((_, rem)) => worst = worst.max(rem / scale),
            Err(_) => return f64::MAX,
        }
    }
    worst
}

/// Measures every invariant of the split: the three bracket-membership
/// clauses and the two Killing sign clauses. Never fails; broken inputs
/// produce a failing report.
pub fn validate_cartan_split(split: &CartanSplit) -> SplitReport {
    let k = split.k_mats();
    let p = split.p_mats();

    let kk_pairs: Vec<_> = k.iter().flat_map(|x| k.iter().map(move |y| (x, y))).collect();
    let kp_pairs: Vec<_> = k.iter().flat_map(|x| p.iter().map(move |y| (x, y))).collect();
    let pp_pairs: Vec<_> = p.iter().flat_map(|x| p.iter().map(move |y| (x, y))).collect();

    let kk_residual = membership_residual(&kk_pairs, &k);
    let kp_residual = membership_residual(&kp_pairs, &p);
    let pp_residual = membership_residual(&pp_pairs, &k);

    // Killing sign clauses from the intrinsic Killing matrix.
    let killing = liealg::structure_constants(split.g())
        .and_then(|sc| liealg::killing_matrix(&sc));
    let (killing_k_max_eig, killing_p_min_eig, killing_scale, k_neg, p_pos) = match killing {
        Err(_) => (None, None, None, false, false),
        Ok(b) => {
            let eig = match numerics::sym_eig(b.as_sym()) {
                Ok(e) => e,
                Err(_) => {
                    return SplitReport {
                        kk_residual,
                        kp_residual,
                        pp_residual,
                        killing_k_max_eig: None,
                        killing_p_min_eig: None,
                        killing_scale: None,
                        kk_ok: kk_residual <= MEMBERSHIP_TOL,
                        kp_ok: kp_residual <= MEMBERSHIP_TOL,
                        pp_ok: pp_residual <= MEMBERSHIP_TOL,
                        killing_k_negative: false,
                        killing_p_positive: false,
                        pass: false,
                    }
                }
            };
            let d = b.d();
            let scale = eig.eigenvalues[0].abs().max(eig.eigenvalues[d - 1].abs());
            let sub_eig = |idx: &[usize]| -> Option<(f64, f64)> {
                if idx.is_empty() {
                    return None;
                }
                let m = idx.len();
                let sub = SymMatrix::from_fn(m, |i, j| b.as_matrix()[(idx[i], idx[j])]);
                let e = numerics::sym_eig(&sub).ok()?;
                Some((e.eigenvalues[0], e.eigenvalues[m - 1]))
            };
            let k_eigs = sub_eig(split.k_idx());
            let p_eigs = sub_eig(split.p_idx());
            let k_max = k_eigs.map(|(_, max)| max);
            let p_min = p_eigs.map(|(min, _)| min);
            let k_neg = match k_max {
                None => true, // vacuous: empty k
                Some(m) => scale > 0.0 && m < -KILLING_SIGN_REL_TOL * scale,
            };
            let p_pos = match p_min {
                None => true, // vacuous: empty p
                Some(m) => scale > 0.0 && m > KILLING_SIGN_REL_TOL * scale,
            };
            (k_max, p_min, Some(scale), k_neg, p_pos)
        }
    };

    let kk_ok = kk_residual <= MEMBERSHIP_TOL;
    let kp_ok = kp_residual <= MEMBERSHIP_TOL;
    let pp_ok = pp_residual <= MEMBERSHIP_TOL;
    SplitReport {
        kk_residual,
        kp_residual,
        pp_residual,
        killing_k_max_eig,
        killing_p_min_eig,
        killing_scale,
        kk_ok,
        kp_ok,
        pp_ok,
        killing_k_negative: k_neg,
        killing_p_positive: p_pos,
        pass: kk_ok && kp_ok && pp_ok && k_neg && p_pos,
    }
}

fn lower_bound_score(margin: Option<f64>, tol: f64) -> f64 {
    match margin {
        None => 0.0, // vacuous clause: maximally safe
        Some(m) if m <= 0.0 => 1e12 * (1.0 + (-m)),
        Some(m) => tol / m,
    }
}

/// Names the clause of the split report with the worst margin.
pub fn diagnose_split(split: &CartanSplit) -> SplitDiagnosis {
    let report = validate_cartan_split(split);
    let mut scores: Vec<(&str, f64)> = vec![
        ("bracket relation [k,k] ⊂ k", report.kk_residual / MEMBERSHIP_TOL),
        ("bracket relation [k,p] ⊂ p", report.kp_residual / MEMBERSHIP_TOL),
        ("bracket relation [p,p] ⊂ k", report.pp_residual / MEMBERSHIP_TOL),
    ];
    match (report.killing_scale, report.killing_k_max_eig, report.killing_p_min_eig) {
        (Some(scale), k_max, p_min) if scale > 0.0 => {
            scores.push((
                "Killing form negative definite on k",
                lower_bound_score(k_max.map(|m| -m / scale), KILLING_SIGN_REL_TOL),
            ));
            scores.push((
                "Killing form positive definite on p",
                lower_bound_score(p_min.map(|m| m / scale), KILLING_SIGN_REL_TOL),
            ));
        }
        _ => scores.push(("Killing form computable and nonzero", 1e12)),
    }
    let (name, severity) = scores
        .into_iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("clause list is nonempty");
    SplitDiagnosis { closest_to_failing: name.to_string(), severity, report }
}

/// A Mostow-compatible inner product for a Cartan split: a positive definite
/// S with det S = 1 such that k acts S-antisymmetrically and p acts
/// S-symmetrically.
#[derive(Debug, Clone)]
pub struct CompatibilityCertificate {
    pub s: SymMatrix,
    /// max over the k-basis of ‖XᵀS + SX‖_F / ‖S‖_F.
    pub k_residual: f64,
    /// max over the p-basis of ‖YᵀS − SY‖_F / ‖S‖_F.
    pub p_residual: f64,
    pub min_eig_s: f64,
    pub max_eig_s: f64,
    /// Dimension of the full solution space of the compatibility equations.
    pub kernel_dim: usize,
}

/// The residual pair certified by [`CompatibilityCertificate`], for an
/// arbitrary candidate S: (max k-antisymmetry defect, max p-symmetry defect),
/// both relative to ‖S‖_F.
pub fn compatibility_residuals(split: &CartanSplit, s: &SymMatrix) -> (f64, f64) {
    let sm = s.as_matrix();
    let scale = numerics::frob(sm).max(f64::MIN_POSITIVE);
    let mut k_res: f64 = 0.0;
    for x in split.k_mats() {
        k_res = k_res.max(numerics::frob(&(x.transpose() * sm + sm * &x)) / scale);
    }
    let mut p_res: f64 = 0.0;
    for y in split.p_mats() {
        p_res = p_res.max(numerics::frob(&(y.transpose() * sm - sm * &y)) / scale);
    }
    (k_res, p_res)
}

/// The compatibility equations as one matrix acting on vectorized symmetric
/// matrices: rows are the entries of XᵀS + SX for X in the k-basis followed
/// by YᵀS − SY for Y in the p-basis; columns index the orthonormal symmetric
/// basis of [`numerics::sym_basis`].
pub fn compatibility_operator(split: &CartanSplit) -> DMatrix<f64> {
    let n = split.n();
    let cols = numerics::sym_dim(n);
    let k = split.k_mats();
    let p = split.p_mats();
    let d = k.len() + p.len();
    let basis = numerics::sym_basis(n);
    let mut op = DMatrix::zeros(d * n * n, cols);
    for (b, eb) in basis.iter().enumerate() {
        let em = eb.as_matrix();
        for (block, x) in k.iter().enumerate() {
            let c = x.transpose() * em + em * x;
            for r in 0..n {
                for s in 0..n {
                    op[(block * n * n + r * n + s, b)] = c[(r, s)];
                }
            }
        }
        for (j, y) in p.iter().enumerate() {
            let block = k.len() + j;
            let c = y.transpose() * em - em * y;
            for r in 0..n {
                for s in 0..n {
                    op[(block * n * n + r * n + s, b)] = c[(r, s)];
                }
            }
        }
    }
    op
}

/// A positive definite element found inside a span of symmetric matrices.
#[derive(Debug, Clone)]
pub(crate) struct SpanPdElement {
    pub matrix: SymMatrix,
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Searches span{K₁..K_m} for a positive definite element by maximizing
/// λ_min(Σ cᵢKᵢ) over the unit sphere ‖c‖ = 1: exact ± test when m = 1,
/// projected subgradient ascent (500 iterations, step 1/√t, restarts from
/// every ±Kᵢ and 8 seeded random directions) otherwise. λ_min is concave in
/// c and the PD elements form an open convex cone, so when that cone is
/// nonempty the ascent enters it. Deterministic for a fixed seed.
pub(crate) fn positive_definite_in_span(
    span: &[SymMatrix],
    seed: u64,
) -> Option<SpanPdElement> {
    let m = span.len();
    if m == 0 {
        return None;
    }
    let combine = |c: &DVector<f64>| {
        let mut a = SymMatrix::zeros(span[0].n());
        for (i, k) in span.iter().enumerate() {
            a = a.add(&k.scale(c[i]));
        }
        a
    };
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut consider = |c: &DVector<f64>| -> Option<DVector<f64>> {
        let a = combine(c);
        let eig = numerics::sym_eig(&a).ok()?;
        let min_eig = eig.eigenvalues[0];
        if best.as_ref().is_none_or(|(b, _)| min_eig > *b) {
            best = Some((min_eig, c.clone()));
        }
        // Subgradient of λ_min at c: the Rayleigh quotients of the minimal
        // eigenvector against each span element.
        let v0 = eig.eigenvectors.column(0);
        Some(DVector::from_fn(m, |i, _| {
            (v0.transpose() * span[i].as_matrix() * v0)[(0, 0)]
        }))
    };

    if m == 1 {
        let e1 = DVector::from_element(1, 1.0);
        consider(&e1);
        consider(&(-e1));
    } else {
        let mut starts: Vec<DVector<f64>> = Vec::new();
        for i in 0..m {
            let mut e = DVector::zeros(m);
            e[i] = 1.0;
            starts.push(e.clone());
            starts.push(-e);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..PD_SEARCH_RANDOM_RESTARTS {
            let mut c = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
            let norm = c.norm();
            if norm < 1e-12 {
                c = DVector::from_element(m, 1.0 / (m as f64).sqrt());
            } else {
                c /= norm;
            }
            starts.push(c);
        }
        for start in starts {
            let mut c = start;
            for t in 1..=PD_SEARCH_ITERATIONS {
                let Some(grad) = consider(&c) else { break };
                c += grad * (1.0 / (t as f64).sqrt());
                let norm = c.norm();
                if norm < 1e-12 {
                    break;
                }
                c /= norm;
            }
            consider(&c);
        }
    }

    let (_, c) = best?;
    let a = combine(&c);
    let eig = numerics::sym_eig(&a).ok()?;
    let (min_eig, max_eig) = (eig.eigenvalues[0], eig.eigenvalues[a.n() - 1]);
    if min_eig > PD_ACCEPT_RATIO * max_eig && min_eig > 0.0 {
        Some(SpanPdElement { matrix: a, min_eig, max_eig })
    } else {
        None
    }
}

/// Solves the Mostow compatibility equations for the split: assembles the
/// constraint operator, computes its kernel at relative tolerance `rel_tol`,
/// and searches the kernel for a positive definite element, normalized to
/// det S = 1. The search is deterministic for a fixed `seed`.
pub fn compatible_metric(
    split: &CartanSplit,
    rel_tol: f64,
    seed: u64,
) -> Result<CompatibilityCertificate, CartanError> {
    let n = split.n();
    let op = compatibility_operator(split);
    let kernel_vecs = numerics::nullspace(&op, rel_tol);
    if kernel_vecs.is_empty() {
        return Err(CartanError::EmptyKernel { diagnosis: Box::new(diagnose_split(split)) });
    }
    let kernel: Vec<SymMatrix> = kernel_vecs.iter().map(numerics::unvech).collect();
    let kernel_dim = kernel.len();

    let found = positive_definite_in_span(&kernel, seed).ok_or_else(|| {
        CartanError::NoPositiveDefiniteElement { diagnosis: Box::new(diagnose_split(split)) }
    })?;

    // Normalize det S = 1 through the eigenvalues of the accepted element.
    let eig = numerics::sym_eig(&found.matrix)?;
    let mean_log: f64 = eig.eigenvalues.iter().map(|x| x.ln()).sum::<f64>() / n as f64;
    let c = mean_log.exp();
    let s = eig.recompose_mapped(|x| x / c);
    let (k_residual, p_residual) = compatibility_residuals(split, &s);
    Ok(CompatibilityCertificate {
        s,
        k_residual,
        p_residual,
        min_eig_s: found.min_eig / c,
        max_eig_s: found.max_eig / c,
        kernel_dim,
    })
}

/// The Cartan decomposition of the ambient sl(n,ℝ) induced by an inner
/// product S: the involution θ(X) = −S⁻¹XᵀS splits traceless matrices into
/// its +1 eigenspace 𝒜 (S-antisymmetric) and −1 eigenspace 𝒮 (S-symmetric,
/// traceless).
#[derive(Debug, Clone)]
pub struct AmbientSplit {
    s: SymMatrix,
    s_inv: SymMatrix,
    a_basis: Vec<DMatrix<f64>>,
    s_basis: Vec<DMatrix<f64>>,
}

impl AmbientSplit {
    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// The Cartan involution θ(X) = −S⁻¹XᵀS.
    pub fn theta(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        -(self.s_inv.as_matrix() * x.transpose() * self.s.as_matrix())
    }

    /// Orthonormal basis of the S-antisymmetric part 𝒜 (dimension n(n−1)/2).
    pub fn a_basis(&self) -> &[DMatrix<f64>] {
        &self.a_basis
    }

    /// Orthonormal basis of the S-symmetric traceless part 𝒮
    /// (dimension n(n+1)/2 − 1).
    pub fn s_basis(&self) -> &[DMatrix<f64>] {
        &self.s_basis
    }
}

/// The standard basis of sl(n,ℝ): off-diagonal units e_ij and the diagonal
/// differences e_ii − e_{i+1,i+1}.
fn sl_traceless_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = DMatrix::zeros(n, n);
                m[(i, j)] = 1.0;
                out.push(m);
            }
        }
    }
    for i in 0..(n - 1) {
        let mut m = DMatrix::zeros(n, n);
        m[(i, i)] = 1.0;
        m[(i + 1, i + 1)] = -1.0;
        out.push(m);
    }
    out
}

fn mgs_frobenius(mats: Vec<DMatrix<f64>>, drop_tol: f64) -> Vec<DMatrix<f64>> {
    let mut basis: Vec<DMatrix<f64>> = Vec::new();
    for mut m in mats {
        let before = numerics::frob(&m);
        for e in &basis {
            let c = numerics::frob_inner(e, &m);
            m -= e * c;
        }
        let after = numerics::frob(&m);
        if after > drop_tol * before.max(1.0) {
            basis.push(m / after);
        }
    }
    basis
}

/// Builds the ambient split for a positive definite S by projecting the
/// standard traceless basis onto the ±1 eigenspaces of θ and orthonormalizing.
pub fn ambient_split(s: &SymMatrix) -> Result<AmbientSplit, CartanError> {
    let n = s.n();
    let s_inv = numerics::spd_map(s, SpdFunction::Inv)?;
    let amb = AmbientSplit {
        s: s.clone(),
        s_inv,
        a_basis: Vec::new(),
        s_basis: Vec::new(),
    };
    let mut a_parts = Vec::new();
    let mut s_parts = Vec::new();
    for t in sl_traceless_basis(n) {
        let th = amb.theta(&t);
        a_parts.push((&t + &th) * 0.5);
        s_parts.push((&t - &th) * 0.5);
    }
    let a_basis = mgs_frobenius(a_parts, AMBIENT_DROP_TOL);
    let s_basis = mgs_frobenius(s_parts, AMBIENT_DROP_TOL);
    let a_expected = n * (n - 1) / 2;
    let s_expected = numerics::sym_dim(n) - 1;
    if a_basis.len() != a_expected {
        return Err(CartanError::EigenspaceDimension {
            part: "S-antisymmetric",
            expected: a_expected,
            got: a_basis.len(),
        });
    }
    if s_basis.len() != s_expected {
        return Err(CartanError::EigenspaceDimension {
            part: "S-symmetric",
            expected: s_expected,
            got: s_basis.len(),
        });
    }
    Ok(AmbientSplit { a_basis, s_basis, ..amb })
}

/// The point of 𝒫 fixed by the S-compatible copy of the maximal compact
/// group: P = S⁻¹ (det-normalized). Killing fields of k vanish there.
pub fn base_point(s: &SymMatrix) -> Result<SpdPoint, CartanError> {
    let p = numerics::spd_map(s, SpdFunction::Inv)?;
    Ok(SpdPoint::new(p)?)
}

/// Conjugates the whole presentation by g₀ (normalized to |det| = 1),
/// keeping the index partition. Structure constants are preserved exactly in
/// exact arithmetic.
pub fn conjugate_presentation(
    g0: &DMatrix<f64>,
    split: &CartanSplit,
) -> Result<CartanSplit, CartanError> {
    let n = split.n();
    if g0.nrows() != n || g0.ncols() != n {
        return Err(CartanError::Lie(LieAlgError::DimensionMismatch {
            expected: (n, n),
            got: (g0.nrows(), g0.ncols()),
        }));
    }
    let det = g0.determinant();
    if !det.is_finite() || det.abs() < 1e-250 {
        return Err(CartanError::Singular);
    }
    let gn = g0 / det.abs().powf(1.0 / n as f64);
    let inv = gn.clone().try_inverse().ok_or(CartanError::Singular)?;
    let basis: Vec<DMatrix<f64>> = split.g().basis().iter().map(|x| &gn * x * &inv).collect();
    let g = LieAlgebraPresentation::new(n, basis)?;
    CartanSplit::new(g, split.k_idx.clone(), split.p_idx.clone())
}

/// The normal Lie triple system of a compatible pair: the S-symmetric
/// traceless matrices orthogonal to p (trace pairing) that commute with p.
#[derive(Debug, Clone)]
pub struct TripleSystemBasis {
    /// Frobenius-orthonormal basis of n.
    pub basis: Vec<DMatrix<f64>>,
    /// max |tr(Y·pⱼ)| over the basis of n and the p-basis.
    pub orthogonality_residual: f64,
    /// max ‖[Y, pⱼ]‖_F likewise.
    pub commutation_residual: f64,
    /// Normalized expansion defect of [[n,n],n] inside n.
    pub triple_residual: f64,
    /// Normalized expansion defect of [[p⊕n, p⊕n], p⊕n] inside p⊕n.
    pub extended_triple_residual: f64,
}

impl TripleSystemBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn triple_law_residual(span: &[DMatrix<f64>]) -> Result<f64, CartanError> {
    let mut worst: f64 = 0.0;
    for (a, x) in span.iter().enumerate() {
        for y in span.iter().skip(a + 1) {
            let inner = bracket(x, y)?;
            for z in span {
                let w = bracket(&inner, z)?;
                let scale = numerics::frob(&w).max(1.0);
                let (_, rem) = expand_in_span(span, &w)?;
                worst = worst.max(rem / scale);
            }
        }
    }
    Ok(worst)
}

/// Computes n = {Y S-symmetric traceless : tr(Y·pⱼ) = 0 and [Y,pⱼ] = 0} as a
/// nullspace in the coordinates of the ambient 𝒮-basis, and verifies the
/// Lie-triple-system laws for n and for p ⊕ n.
pub fn normal_triple_system(
    split: &CartanSplit,
    amb: &AmbientSplit,
) -> Result<TripleSystemBasis, CartanError> {
    let (k_residual, p_residual) = compatibility_residuals(split, amb.s());
    if k_residual > COMPATIBILITY_PRECONDITION_TOL || p_residual > COMPATIBILITY_PRECONDITION_TOL
    {
        return Err(CartanError::IncompatibleInputs { k_residual, p_residual });
    }
    let n = split.n();
    let p_mats = split.p_mats();
    let q = amb.s_basis().len();
    let rows = p_mats.len() * (n * n + 1);
    let mut mat = DMatrix::zeros(rows, q);
    for (a, b) in amb.s_basis().iter().enumerate() {
        for (j, y) in p_mats.iter().enumerate() {
            let c = bracket(b, y)?;
            for r in 0..n {
                for s in 0..n {
                    mat[(j * n * n + r * n + s, a)] = c[(r, s)];
                }
            }
            mat[(p_mats.len() * n * n + j, a)] = (b * y).trace();
        }
    }
    let kernel = numerics::nullspace(&mat, TRIPLE_KERNEL_REL_TOL);
    let basis: Vec<DMatrix<f64>> = kernel
        .iter()
        .map(|v| {
            let mut m = DMatrix::zeros(n, n);
            for (a, b) in amb.s_basis().iter().enumerate() {
                m += b * v[a];
            }
            m
        })
        .collect();

    let mut orthogonality_residual: f64 = 0.0;
    let mut commutation_residual: f64 = 0.0;
    for y in &basis {
        for pj in &p_mats {
            orthogonality_residual = orthogonality_residual.max((y * pj).trace().abs());
            commutation_residual = commutation_residual.max(numerics::frob(&bracket(y, pj)?));
        }
    }

    let triple_residual = triple_law_residual(&basis)?;
    let mut extended: Vec<DMatrix<f64>> = p_mats.clone();
    extended.extend(basis.iter().cloned());
    let extended_triple_residual = triple_law_residual(&extended)?;

    Ok(TripleSystemBasis {
        basis,
        orthogonality_residual,
        commutation_residual,
        triple_residual,
        extended_triple_residual,
    })
}
