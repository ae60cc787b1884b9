//! Orbit-volume minimization over the fixed set of the compact factor: the
//! chart Σ = {P ∈ SPD, det P = 1 : X·P + P·Xᵀ = 0 ∀X ∈ k}, the scale
//! function λ comparing induced orbit metrics, Riemannian descent of the
//! log orbit-volume density, and a minimality certificate that cross-checks
//! the result against the Mostow compatibility equations.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::cartan::{self, CartanSplit, SplitDiagnosis};
use crate::numerics::{self, NumericsError, SymMatrix};
use crate::spdspace::{self, SpdError, SpdPoint, TangentVector};

/// Relative tolerance for the fixed-set constraint kernel.
pub const CHART_KERNEL_REL_TOL: f64 = 1e-9;
/// Membership bound on evaluation points of λ and descent starts.
pub const CHART_CONSTRAINT_TOL: f64 = 1e-9;
/// Descent terminates when the orbit's mean curvature norm drops below this.
pub const MEAN_CURVATURE_TOL: f64 = 1e-8;
/// Chart basis elements satisfy their defining constraint to this bound.
pub const CHART_BASIS_TOL: f64 = 1e-10;
/// Drop tolerance for the chart tangent-space orthonormalization.
const TANGENT_DROP_TOL: f64 = 1e-10;
/// Eigenvalue ratio below which the orbit Gram matrix counts as singular.
const GRAM_CONDITION_FLOOR: f64 = 1e-12;
/// Backtracking gives up below this step size.
const STEP_FLOOR: f64 = 1e-16;
/// A gradient this small with mean curvature still large means the chart
/// parametrization has stalled; descent stops and reports honestly.
const GRADIENT_STALL_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum OrbitMinError {
    #[error(
        "the fixed-point cone of the compact factor is empty; \
         closest-to-failing input invariant: {diagnosis}"
    )]
    EmptyFixedSet { diagnosis: Box<SplitDiagnosis> },
    #[error("point violates the fixed-set chart constraints (residual {residual:e})")]
    ConstraintViolated { residual: f64 },
    #[error("orbit Gram matrix is numerically singular (eigenvalue ratio {ratio:e})")]
    DegenerateGram { ratio: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Spd(#[from] SpdError),
}

/// Linear chart of Σ, the fixed-point set of K = exp(k) acting by
/// congruence: an orthonormal basis of {U ∈ sym(n) : XU + UXᵀ = 0 ∀X ∈ k}
/// together with an interior SPD point of determinant one.
#[derive(Debug, Clone)]
pub struct FixedSetChart {
    basis: Vec<SymMatrix>,
    p0: SpdPoint,
}

impl FixedSetChart {
    /// Dimension of the linear chart (Σ itself is one lower, det = 1).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[SymMatrix] {
        &self.basis
    }

    pub fn p0(&self) -> &SpdPoint {
        &self.p0
    }

    /// Frobenius distance from `p` to its projection onto the chart span,
    /// relative to ‖p‖.
    pub fn membership_residual(&self, p: &SpdPoint) -> f64 {
        let pm = p.matrix();
        let mut rem = pm.clone();
        for l in &self.basis {
            let c = numerics::frob_inner(l.as_matrix(), pm);
            rem -= l.as_matrix() * c;
        }
        numerics::frob(&rem) / numerics::frob(pm).max(f64::MIN_POSITIVE)
    }
}

/// max over the k-basis of ‖X·P + P·Xᵀ‖_F / ‖P‖_F — the defining constraint
/// of the fixed set (equivalently: every k-Killing field vanishes at P).
pub fn chart_residual(split: &CartanSplit, p: &SpdPoint) -> f64 {
    let pm = p.matrix();
    let scale = numerics::frob(pm).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for x in split.k_mats() {
        worst = worst.max(numerics::frob(&(&x * pm + pm * x.transpose())) / scale);
    }
    worst
}

/// Computes the fixed-set chart: the nullspace of the stacked constraints
/// X·U + U·Xᵀ = 0 over the orthonormal symmetric basis, plus an interior
/// positive definite point found by the same λ_min maximization as the
/// compatibility solver. An empty cone contradicts the fixed-point theorem
/// for compact groups, so the error diagnoses the input (typically: Killing
/// form not negative definite on k).
pub fn fixed_set(
    split: &CartanSplit,
    rel_tol: f64,
    seed: u64,
) -> Result<FixedSetChart, OrbitMinError> {
    let n = split.n();
    let k = split.k_mats();
    let cols = numerics::sym_dim(n);
    let sym = numerics::sym_basis(n);
    let mut op = DMatrix::zeros(k.len() * n * n, cols);
    for (b, eb) in sym.iter().enumerate() {
        let em = eb.as_matrix();
        for (block, x) in k.iter().enumerate() {
            let c = x * em + em * x.transpose();
            for r in 0..n {
                for s in 0..n {
                    op[(block * n * n + r * n + s, b)] = c[(r, s)];
                }
            }
        }
    }
    let kernel = numerics::nullspace(&op, rel_tol);
    if kernel.is_empty() {
        return Err(OrbitMinError::EmptyFixedSet {
            diagnosis: Box::new(cartan::diagnose_split(split)),
        });
    }
    let basis: Vec<SymMatrix> = kernel.iter().map(numerics::unvech).collect();
    let found = cartan::positive_definite_in_span(&basis, seed).ok_or_else(|| {
        OrbitMinError::EmptyFixedSet { diagnosis: Box::new(cartan::diagnose_split(split)) }
    })?;
    let p0 = SpdPoint::new(found.matrix)?;
    Ok(FixedSetChart { basis, p0 })
}

/// The scale function λ at P relative to P_ref, with the Gram matrix of the
/// p-Killing fields and the defect of exact proportionality
/// G(P) = λ·G(P_ref).
#[derive(Debug, Clone)]
pub struct LambdaProfile {
    pub point: SpdPoint,
    pub gram: DMatrix<f64>,
    pub lambda: f64,
    pub proportionality_residual: f64,
}

fn gram_matrix(gens: &[DMatrix<f64>], p: &SpdPoint) -> Result<DMatrix<f64>, SpdError> {
    let m = gens.len();
    let mut fields = Vec::with_capacity(m);
    for x in gens {
        fields.push(spdspace::killing_field(x, p)?);
    }
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = spdspace::metric(&fields[i], &fields[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Evaluates λ(P) = tr G(P) / tr G(P_ref) over the p-basis, enforcing chart
/// membership of both points. With p empty the orbits are points and λ ≡ 1.
pub fn lambda_value(
    split: &CartanSplit,
    chart: &FixedSetChart,
    p: &SpdPoint,
    p_ref: &SpdPoint,
) -> Result<LambdaProfile, OrbitMinError> {
    for point in [p, p_ref] {
        let residual = chart.membership_residual(point).max(chart_residual(split, point));
        if residual > CHART_CONSTRAINT_TOL {
            return Err(OrbitMinError::ConstraintViolated { residual });
        }
    }
    let p_mats = split.p_mats();
    if p_mats.is_empty() {
        return Ok(LambdaProfile {
            point: p.clone(),
            gram: DMatrix::zeros(0, 0),
            lambda: 1.0,
            proportionality_residual: 0.0,
        });
    }
    let gram = gram_matrix(&p_mats, p)?;
    let gram_ref = gram_matrix(&p_mats, p_ref)?;
    let tr_ref = gram_ref.trace();
    if tr_ref <= 0.0 {
        return Err(OrbitMinError::DegenerateGram { ratio: 0.0 });
    }
    let lambda = gram.trace() / tr_ref;
    let proportionality_residual =
        (&gram - &gram_ref * lambda).norm() / gram_ref.norm().max(f64::MIN_POSITIVE);
    Ok(LambdaProfile { point: p.clone(), gram, lambda, proportionality_residual })
}

/// The log orbit-volume density F(P) = log det G(P), with the p-basis
/// Killing-orthonormalized at a reference point so that G(P_ref) = I. The
/// orthonormalization shifts F by a constant and leaves its gradient
/// unchanged.
pub struct VolumeObjective {
    generators: Vec<DMatrix<f64>>,
}

impl VolumeObjective {
    pub fn new(split: &CartanSplit, p_ref: &SpdPoint) -> Result<Self, OrbitMinError> {
        let p_mats = split.p_mats();
        if p_mats.is_empty() {
            return Ok(VolumeObjective { generators: Vec::new() });
        }
        let g = gram_matrix(&p_mats, p_ref)?;
        let eig = numerics::sym_eig(&SymMatrix::symmetrize(&g))?;
        let m = p_mats.len();
        let (min, max) = (eig.eigenvalues[0], eig.eigenvalues[m - 1]);
        if !(min > 0.0 && min > GRAM_CONDITION_FLOOR * max) {
            return Err(OrbitMinError::DegenerateGram {
                ratio: min / max.max(f64::MIN_POSITIVE),
            });
        }
        let n = split.n();
        let mut generators = Vec::with_capacity(m);
        for b in 0..m {
            let s = eig.eigenvalues[b].sqrt().recip();
            let mut x = DMatrix::zeros(n, n);
            for (i, pi) in p_mats.iter().enumerate() {
                x += pi * (eig.eigenvectors[(i, b)] * s);
            }
            generators.push(x);
        }
        Ok(VolumeObjective { generators })
    }

    /// The orthonormalized p-generators.
    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// F(P) = log det G(P); zero for empty p (point orbits).
    pub fn value(&self, p: &SpdPoint) -> Result<f64, OrbitMinError> {
        if self.generators.is_empty() {
            return Ok(0.0);
        }
        let g = gram_matrix(&self.generators, p)?;
        let eig = numerics::sym_eig(&SymMatrix::symmetrize(&g))?;
        let m = self.generators.len();
        let (min, max) = (eig.eigenvalues[0], eig.eigenvalues[m - 1]);
        if !(min > 0.0 && min > GRAM_CONDITION_FLOOR * max) {
            return Err(OrbitMinError::DegenerateGram {
                ratio: min / max.max(f64::MIN_POSITIVE),
            });
        }
        Ok(eig.eigenvalues.iter().map(|x| x.ln()).sum())
    }

    /// Analytic directional derivative dF_P[V] = tr(G⁻¹ dG[V]), with
    /// dG from differentiating both the Killing-field values and the metric
    /// base point along V.
    pub fn directional_derivative(
        &self,
        p: &SpdPoint,
        v: &TangentVector,
    ) -> Result<f64, OrbitMinError> {
        if self.generators.is_empty() {
            return Ok(0.0);
        }
        if !v.base().same_point(p) {
            return Err(OrbitMinError::Spd(SpdError::BaseMismatch));
        }
        let m = self.generators.len();
        let a = p.inv();
        let pm = p.matrix();
        let vm = v.matrix();
        let da = -(a * vm * a);
        let us: Vec<DMatrix<f64>> = self
            .generators
            .iter()
            .map(|x| x * pm + pm * x.transpose())
            .collect();
        let dus: Vec<DMatrix<f64>> = self
            .generators
            .iter()
            .map(|x| x * vm + vm * x.transpose())
            .collect();
        let mut g = DMatrix::zeros(m, m);
        let mut dg = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = (a * &us[i] * a * &us[j]).trace();
                dg[(i, j)] = (&da * &us[i] * a * &us[j]).trace()
                    + (a * &dus[i] * a * &us[j]).trace()
                    + (a * &us[i] * &da * &us[j]).trace()
                    + (a * &us[i] * a * &dus[j]).trace();
            }
        }
        let eig = numerics::sym_eig(&SymMatrix::symmetrize(&g))?;
        let (min, max) = (eig.eigenvalues[0], eig.eigenvalues[m - 1]);
        if !(min > 0.0 && min > GRAM_CONDITION_FLOOR * max) {
            return Err(OrbitMinError::DegenerateGram {
                ratio: min / max.max(f64::MIN_POSITIVE),
            });
        }
        let g_inv = eig.recompose_mapped(|x| x.recip());
        Ok((g_inv.as_matrix() * dg).trace())
    }
}

/// Metric-orthonormal basis of the tangent space of Σ at P: the chart span,
/// with the radial direction P (which changes the determinant) removed. P
/// itself always lies in the chart span, so the result has one dimension
/// fewer than the chart.
pub fn chart_tangent_basis(
    chart: &FixedSetChart,
    p: &SpdPoint,
) -> Result<Vec<TangentVector>, OrbitMinError> {
    let a = p.inv();
    let pm = p.matrix();
    let inner = |x: &DMatrix<f64>, y: &DMatrix<f64>| (a * x * a * y).trace();
    let p_norm2 = p.n() as f64; // ⟨P,P⟩_P = tr(I·I) = n
    let mut out: Vec<TangentVector> = Vec::new();
    for l in chart.basis() {
        let mut v = l.as_matrix().clone();
        let before = inner(&v, &v).max(0.0).sqrt();
        v -= pm * (inner(&v, pm) / p_norm2);
        for e in &out {
            v -= e.matrix() * inner(&v, e.matrix());
        }
        let after = inner(&v, &v).max(0.0).sqrt();
        if after > TANGENT_DROP_TOL * before.max(1.0) {
            out.push(TangentVector::new(p.clone(), SymMatrix::symmetrize(&(v / after)))?);
        }
    }
    Ok(out)
}

/// F, its Riemannian gradient in T_PΣ, and the gradient norm.
pub fn objective_gradient(
    obj: &VolumeObjective,
    chart: &FixedSetChart,
    p: &SpdPoint,
) -> Result<(f64, TangentVector, f64), OrbitMinError> {
    let f = obj.value(p)?;
    let mut grad = SymMatrix::zeros(p.n());
    let mut norm_sq = 0.0;
    for e in chart_tangent_basis(chart, p)? {
        let d = obj.directional_derivative(p, &e)?;
        grad = grad.add(&e.sym().scale(d));
        norm_sq += d * d;
    }
    Ok((f, TangentVector::new(p.clone(), grad)?, norm_sq.sqrt()))
}

/// Backtracking line-search configuration for [`minimize_volume`].
#[derive(Debug, Clone)]
pub struct StepConfig {
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub sufficient_decrease: f64,
    /// Distance from P₀ beyond which descent reports divergence.
    pub divergence_radius: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            initial_step: 1.0,
            backtrack_factor: 0.5,
            sufficient_decrease: 1e-4,
            divergence_radius: 50.0,
        }
    }
}

/// Result of the descent. `diverged` is reported, not thrown: descent that
/// escapes the divergence radius stops and hands back the norm history as
/// its escape certificate, claiming nothing about minimality.
#[derive(Debug, Clone)]
pub struct MinimizationOutcome {
    pub p_star: SpdPoint,
    /// Accepted descent steps.
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub mean_curvature_norm: f64,
    /// F(P*) in the objective's normalization.
    pub objective: f64,
    pub diverged: bool,
    /// ‖P‖_F at every visited iterate (including P*).
    pub norm_history: Vec<f64>,
    /// F at every visited iterate where it was evaluated (including P*).
    pub objective_history: Vec<f64>,
}

/// Riemannian gradient descent of F = log det G over Σ starting from the
/// chart's interior point. Terminates when the orbit mean curvature drops
/// below [`MEAN_CURVATURE_TOL`], when `max_iter` accepted steps are spent,
/// or when the iterate leaves the divergence radius.
pub fn minimize_volume(
    split: &CartanSplit,
    chart: &FixedSetChart,
    max_iter: usize,
    cfg: &StepConfig,
) -> Result<MinimizationOutcome, OrbitMinError> {
    let start = chart.p0().clone();
    minimize_volume_from(split, chart, &start, max_iter, cfg)
}

/// [`minimize_volume`] from an explicit chart point.
pub fn minimize_volume_from(
    split: &CartanSplit,
    chart: &FixedSetChart,
    start: &SpdPoint,
    max_iter: usize,
    cfg: &StepConfig,
) -> Result<MinimizationOutcome, OrbitMinError> {
    let residual = chart.membership_residual(start).max(chart_residual(split, start));
    if residual > CHART_CONSTRAINT_TOL {
        return Err(OrbitMinError::ConstraintViolated { residual });
    }
    let obj = VolumeObjective::new(split, chart.p0())?;
    let mut p = start.clone();
    let mut iterations = 0usize;
    let mut diverged = false;
    let mut norm_history = Vec::new();
    let mut objective_history = Vec::new();

    let (p_star, mean_curvature_norm) = loop {
        norm_history.push(numerics::frob(p.matrix()));
        let h = spdspace::mean_curvature(split, &p)?;
        let h_norm = spdspace::metric_norm(&h)?;
        if h_norm <= MEAN_CURVATURE_TOL {
            break (p, h_norm);
        }
        if spdspace::distance(chart.p0(), &p)? > cfg.divergence_radius {
            diverged = true;
            break (p, h_norm);
        }
        if iterations >= max_iter {
            break (p, h_norm);
        }
        let (f, grad, grad_norm) = objective_gradient(&obj, chart, &p)?;
        objective_history.push(f);
        if grad_norm <= GRADIENT_STALL_FLOOR {
            break (p, h_norm);
        }
        let mut eta = cfg.initial_step;
        let mut next = None;
        while eta >= STEP_FLOOR {
            let step = TangentVector::new(p.clone(), grad.sym().scale(-eta))?;
            let q = spdspace::geodesic(&step)?.evaluate(1.0)?;
            let fq = obj.value(&q)?;
            if fq <= f - cfg.sufficient_decrease * eta * grad_norm * grad_norm {
                next = Some(q);
                break;
            }
            eta *= cfg.backtrack_factor;
        }
        match next {
            Some(q) => {
                p = q;
                iterations += 1;
            }
            None => break (p, h_norm),
        }
    };

    let (f_final, _, final_gradient_norm) = objective_gradient(&obj, chart, &p_star)?;
    objective_history.push(f_final);
    Ok(MinimizationOutcome {
        p_star,
        iterations,
        final_gradient_norm,
        mean_curvature_norm,
        objective: f_final,
        diverged,
        norm_history,
        objective_history,
    })
}

/// Cross-module certificate for a candidate minimal point: the orbit's mean
/// curvature norm, the compatibility residuals of S := (P*)⁻¹ against the
/// Mostow equations (minimal ⇒ totally geodesic ⇒ compatible), and the
/// largest second-fundamental-form norm over all generator pairs.
#[derive(Debug, Clone)]
pub struct MinimalityCertificate {
    pub mean_curvature_norm: f64,
    pub compat_k_residual: f64,
    pub compat_p_residual: f64,
    pub tg_residual: f64,
}

pub fn certify_minimal(
    split: &CartanSplit,
    p_star: &SpdPoint,
) -> Result<MinimalityCertificate, OrbitMinError> {
    let h = spdspace::mean_curvature(split, p_star)?;
    let mean_curvature_norm = spdspace::metric_norm(&h)?;

    // det P* = 1, so the inverse is already det-normalized.
    let s = numerics::spd_map(p_star.sym(), numerics::SpdFunction::Inv)?;
    let (compat_k_residual, compat_p_residual) = cartan::compatibility_residuals(split, &s);

    let d = split.g().dim();
    let mut tg_residual: f64 = 0.0;
    for u in 0..d {
        for v in 0..d {
            let ii = spdspace::second_fundamental_form(split, p_star, u, v)?;
            tg_residual = tg_residual.max(spdspace::metric_norm(&ii)?);
        }
    }
    Ok(MinimalityCertificate {
        mean_curvature_norm,
        compat_k_residual,
        compat_p_residual,
        tg_residual,
    })
}
