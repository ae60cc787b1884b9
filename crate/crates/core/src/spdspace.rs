//! The symmetric space 𝒫 = SL(n,ℝ)/SO(n), modeled as determinant-1 positive
//! definite matrices with the affine-invariant metric
//! ⟨U,V⟩_P = tr(P⁻¹UP⁻¹V), together with the orbit geometry needed to certify
//! totally geodesic group orbits: Killing fields, their covariant derivatives,
//! second fundamental forms, mean curvature, and the variational function
//! f(t) = ⟨∇_{γ̇}(X·γ), X·γ⟩ along geodesics normal to an orbit.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cartan::CartanSplit;
use crate::numerics::{self, NumericsError, SpdFunction, SymMatrix, EXP_NORM_GUARD};

/// Tolerance for the |det P − 1| invariant of [`SpdPoint`].
pub const DET_NORMALIZATION_TOL: f64 = 1e-10;
/// Tolerance on |tr(P⁻¹U)| for a vector to count as tangent to the det-1 slice.
pub const TRACE_TANGENCY_TOL: f64 = 1e-10;
/// Tolerance on |tr X| for Killing-field generators.
pub const GENERATOR_TRACE_TOL: f64 = 1e-10;
/// Two points are treated as the same base point below this relative distance.
const BASE_MATCH_TOL: f64 = 1e-12;
/// Modified Gram–Schmidt drop tolerance for orbit tangent bases.
pub const ORBIT_BASIS_DROP_TOL: f64 = 1e-10;
/// Relative Gram-determinant floor below which a plane is degenerate.
const DEGENERATE_PLANE_RATIO: f64 = 1e-12;
/// Central-difference step for the finite-difference derivative of f.
pub const FD_STEP: f64 = 1e-4;
/// Maximum tangential component (relative) for a geodesic to count as normal.
pub const NORMALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SpdError {
    #[error("matrix is not positive definite (min eigenvalue {min_eig:e}, max {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix dimensions {got:?} do not match expected {expected:?}")]
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("generator is not traceless (trace {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("vector is not tangent to the det-1 slice (trace residual {residual:e})")]
    NotTangent { residual: f64 },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("plane is degenerate (relative Gram determinant {gram_ratio:e})")]
    DegeneratePlane { gram_ratio: f64 },
    #[error("orbit dimension is ambiguous at this point (projection residual ratio {ratio:e})")]
    DegenerateOrbit { ratio: f64 },
    #[error("geodesic velocity at t = {t} is not normal to the orbit (tangential residual {residual:e})")]
    NotNormal { t: f64, residual: f64 },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("computation produced a non-finite value")]
    NonFinite,
}

impl From<NumericsError> for SpdError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::NonFinite => SpdError::NonFinite,
            NumericsError::NotPositiveDefinite { min_eig, max_eig } => {
                SpdError::NotPositiveDefinite { min_eig, max_eig }
            }
        }
    }
}

/// A point of 𝒫 = SL(n,ℝ)/SO(n): a positive definite matrix normalized to
/// determinant 1. The inverse and the symmetric square root (and its inverse)
/// are precomputed, since every metric and geodesic operation needs them.
#[derive(Debug, Clone)]
pub struct SpdPoint {
    p: SymMatrix,
    p_inv: SymMatrix,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl SpdPoint {
    /// Builds a point from a positive definite symmetric matrix, rescaling it
    /// to determinant 1.
    pub fn new(a: SymMatrix) -> Result<Self, SpdError> {
        let n = a.n();
        if n == 0 {
            return Err(SpdError::DimensionMismatch { expected: (1, 1), got: (0, 0) });
        }
        let eig = numerics::sym_eig(&a)?;
        let min_eig = eig.eigenvalues[0];
        let max_eig = eig.eigenvalues[n - 1];
        if max_eig <= 0.0 || min_eig <= numerics::SPD_EIG_FLOOR * max_eig {
            return Err(SpdError::NotPositiveDefinite { min_eig, max_eig });
        }
        // Normalize det to 1 through the eigenvalues: c = exp(mean log λ).
        let mean_log: f64 = eig.eigenvalues.iter().map(|x| x.ln()).sum::<f64>() / n as f64;
        let c = mean_log.exp();
        let p = eig.recompose_mapped(|x| x / c);
        let p_inv = eig.recompose_mapped(|x| c / x);
        let sqrt = eig.recompose_mapped(|x| (x / c).sqrt()).into_matrix();
        let inv_sqrt = eig.recompose_mapped(|x| (c / x).sqrt()).into_matrix();
        Ok(SpdPoint { p, p_inv, sqrt, inv_sqrt })
    }

    pub fn identity(n: usize) -> Self {
        SpdPoint::new(SymMatrix::identity(n)).expect("identity is positive definite")
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.p.as_matrix()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.p
    }

    pub fn inv(&self) -> &DMatrix<f64> {
        self.p_inv.as_matrix()
    }

    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.inv_sqrt
    }

    /// Whether two points coincide up to floating-point reconstruction error.
    pub fn same_point(&self, other: &SpdPoint) -> bool {
        if self.n() != other.n() {
            return false;
        }
        let diff = numerics::frob(&(self.matrix() - other.matrix()));
        let scale = 1.0 + numerics::frob(self.matrix()).max(numerics::frob(other.matrix()));
        diff <= BASE_MATCH_TOL * scale
    }
}

/// A tangent vector at an [`SpdPoint`]: a symmetric matrix U with
/// tr(P⁻¹U) = 0, the linearization of the det-1 constraint.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: SpdPoint,
    u: SymMatrix,
}

impl TangentVector {
    pub fn new(base: SpdPoint, u: SymMatrix) -> Result<Self, SpdError> {
        if u.n() != base.n() {
            return Err(SpdError::DimensionMismatch {
                expected: (base.n(), base.n()),
                got: (u.n(), u.n()),
            });
        }
        if !u.is_finite() {
            return Err(SpdError::NonFinite);
        }
        let trace = (base.inv() * u.as_matrix()).trace();
        let residual = trace.abs();
        if residual > TRACE_TANGENCY_TOL * (1.0 + numerics::frob(u.as_matrix())) {
            return Err(SpdError::NotTangent { residual });
        }
        Ok(TangentVector { base, u })
    }

    pub fn zero(base: SpdPoint) -> Self {
        let n = base.n();
        TangentVector { base, u: SymMatrix::zeros(n) }
    }

    pub fn base(&self) -> &SpdPoint {
        &self.base
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.u
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.u.as_matrix()
    }
}

fn check_same_base(a: &TangentVector, b: &TangentVector) -> Result<(), SpdError> {
    if a.base.same_point(&b.base) {
        Ok(())
    } else {
        Err(SpdError::BaseMismatch)
    }
}

/// The metric ⟨U,V⟩_P = tr(P⁻¹UP⁻¹V). Both vectors must share a base point.
pub fn metric(u: &TangentVector, v: &TangentVector) -> Result<f64, SpdError> {
    check_same_base(u, v)?;
    let p_inv = u.base.inv();
    let m = p_inv * u.matrix() * p_inv * v.matrix();
    let value = m.trace();
    if !value.is_finite() {
        return Err(SpdError::NonFinite);
    }
    Ok(value)
}

/// ‖U‖_P = √⟨U,U⟩_P.
pub fn metric_norm(u: &TangentVector) -> Result<f64, SpdError> {
    Ok(metric(u, u)?.max(0.0).sqrt())
}

fn det_normalized(g: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>, SpdError> {
    if g.nrows() != n || g.ncols() != n {
        return Err(SpdError::DimensionMismatch { expected: (n, n), got: (g.nrows(), g.ncols()) });
    }
    let det = g.determinant();
    if !det.is_finite() || det.abs() < 1e-250 {
        return Err(SpdError::Singular);
    }
    let scale = det.abs().powf(1.0 / n as f64);
    let gn = g / scale;
    if !gn.iter().all(|x| x.is_finite()) {
        return Err(SpdError::NonFinite);
    }
    Ok(gn)
}

/// The isometric SL(n,ℝ)-action g·P = gPgᵀ (g is det-normalized first).
pub fn act(g: &DMatrix<f64>, p: &SpdPoint) -> Result<SpdPoint, SpdError> {
    let gn = det_normalized(g, p.n())?;
    SpdPoint::new(SymMatrix::symmetrize(&(&gn * p.matrix() * gn.transpose())))
}

/// Differential of the action: (g, U at P) ↦ gUgᵀ at gPgᵀ.
pub fn push_forward(g: &DMatrix<f64>, v: &TangentVector) -> Result<TangentVector, SpdError> {
    let gn = det_normalized(g, v.base.n())?;
    let new_base = SpdPoint::new(SymMatrix::symmetrize(&(&gn * v.base.matrix() * gn.transpose())))?;
    let u = SymMatrix::symmetrize(&(&gn * v.matrix() * gn.transpose()));
    TangentVector::new(new_base, u)
}

/// The Killing field of a traceless generator X evaluated at P:
/// X·P = XP + PXᵀ, the derivative of t ↦ exp(tX)·P at t = 0.
pub fn killing_field(x: &DMatrix<f64>, p: &SpdPoint) -> Result<TangentVector, SpdError> {
    let n = p.n();
    if x.nrows() != n || x.ncols() != n {
        return Err(SpdError::DimensionMismatch { expected: (n, n), got: (x.nrows(), x.ncols()) });
    }
    let trace = x.trace();
    if trace.abs() > GENERATOR_TRACE_TOL * (1.0 + numerics::frob(x)) {
        return Err(SpdError::NotTraceless { trace });
    }
    let u = SymMatrix::symmetrize(&(x * p.matrix() + p.matrix() * x.transpose()));
    TangentVector::new(p.clone(), u)
}

/// A constant-speed geodesic γ(t) = P^{1/2} exp(t·P^{−1/2}VP^{−1/2}) P^{1/2},
/// stored through the eigendecomposition of Λ = P^{−1/2}VP^{−1/2} so that
/// evaluation at any t is a single congruence.
#[derive(Debug, Clone)]
pub struct GeodesicSegment {
    direction: TangentVector,
    /// M = P^{1/2}Q, where the columns of Q are the eigenvectors of Λ.
    m: DMatrix<f64>,
    lambda: DVector<f64>,
}

/// Builds the geodesic through `v.base()` with initial velocity `v`.
pub fn geodesic(v: &TangentVector) -> Result<GeodesicSegment, SpdError> {
    let lam = SymMatrix::symmetrize(&(v.base.inv_sqrt() * v.matrix() * v.base.inv_sqrt()));
    let eig = numerics::sym_eig(&lam)?;
    let m = v.base.sqrt() * &eig.eigenvectors;
    Ok(GeodesicSegment { direction: v.clone(), m, lambda: eig.eigenvalues })
}

impl GeodesicSegment {
    pub fn base(&self) -> &SpdPoint {
        self.direction.base()
    }

    pub fn direction(&self) -> &TangentVector {
        &self.direction
    }

    fn congruence(&self, diag: impl Fn(f64) -> f64) -> Result<SymMatrix, SpdError> {
        let n = self.lambda.len();
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| diag(self.lambda[i])));
        let out = &self.m * d * self.m.transpose();
        if !out.iter().all(|x| x.is_finite()) {
            return Err(SpdError::NonFinite);
        }
        Ok(SymMatrix::symmetrize(&out))
    }

    /// γ(t). Errors with `NonFinite` when t·λ would overflow the exponential.
    pub fn evaluate(&self, t: f64) -> Result<SpdPoint, SpdError> {
        Ok(self.point_and_velocity(t)?.0)
    }

    /// γ̇(t) based at γ(t).
    pub fn velocity(&self, t: f64) -> Result<TangentVector, SpdError> {
        Ok(self.point_and_velocity(t)?.1)
    }

    /// (γ(t), γ̇(t)) sharing one base point.
    pub fn point_and_velocity(&self, t: f64) -> Result<(SpdPoint, TangentVector), SpdError> {
        let max_arg = self.lambda.iter().map(|l| (t * l).abs()).fold(0.0, f64::max);
        if !max_arg.is_finite() || max_arg > EXP_NORM_GUARD {
            return Err(SpdError::NonFinite);
        }
        let point = SpdPoint::new(self.congruence(|l| (t * l).exp())?)?;
        let vel = self.congruence(|l| l * (t * l).exp())?;
        let vel = TangentVector::new(point.clone(), vel)?;
        Ok((point, vel))
    }
}

/// Riemannian logarithm: the tangent vector at P whose geodesic reaches Q at
/// t = 1, namely P^{1/2} log(P^{−1/2}QP^{−1/2}) P^{1/2}.
pub fn log_map(p: &SpdPoint, q: &SpdPoint) -> Result<TangentVector, SpdError> {
    if p.n() != q.n() {
        return Err(SpdError::DimensionMismatch { expected: (p.n(), p.n()), got: (q.n(), q.n()) });
    }
    let w = SymMatrix::symmetrize(&(p.inv_sqrt() * q.matrix() * p.inv_sqrt()));
    let l = numerics::spd_map(&w, SpdFunction::Log)?;
    let u = SymMatrix::symmetrize(&(p.sqrt() * l.as_matrix() * p.sqrt()));
    TangentVector::new(p.clone(), u)
}

/// Geodesic distance d(P,Q) = ‖log(P^{−1/2}QP^{−1/2})‖_F.
pub fn distance(p: &SpdPoint, q: &SpdPoint) -> Result<f64, SpdError> {
    if p.n() != q.n() {
        return Err(SpdError::DimensionMismatch { expected: (p.n(), p.n()), got: (q.n(), q.n()) });
    }
    let w = SymMatrix::symmetrize(&(p.inv_sqrt() * q.matrix() * p.inv_sqrt()));
    let l = numerics::spd_map(&w, SpdFunction::Log)?;
    Ok(numerics::frob(l.as_matrix()))
}

fn comm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Curvature tensor R(U,V)W. At the identity, on symmetric matrices,
/// R(U,V)W = −¼[[U,V],W]; at a general P it is transported by congruence
/// with P^{1/2}.
///
/// The factor ¼ is forced by the metric tr(P⁻¹UP⁻¹V): its Christoffel symbol
/// is Γ_P(U,V) = −½(UP⁻¹V + VP⁻¹U), and assembling
/// R = ∂Γ − ∂Γ + Γ∘Γ − Γ∘Γ in the flat chart collapses to −¼[[U,V],W] at I.
/// The coordinate-formula oracle test below pins the factor, and the
/// finite-difference identity for f′(t) would fail with any other scaling.
pub fn curvature(
    u: &TangentVector,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<TangentVector, SpdError> {
    check_same_base(u, v)?;
    check_same_base(u, w)?;
    let p = u.base();
    let down = |t: &TangentVector| p.inv_sqrt() * t.matrix() * p.inv_sqrt();
    let (a, b, c) = (down(u), down(v), down(w));
    let r = comm(&comm(&a, &b), &c) * (-0.25);
    let out = SymMatrix::symmetrize(&(p.sqrt() * r * p.sqrt()));
    TangentVector::new(p.clone(), out)
}

/// Sectional curvature of the plane spanned by (U,V):
/// ⟨R(U,V)V,U⟩ / (⟨U,U⟩⟨V,V⟩ − ⟨U,V⟩²).
pub fn sectional_curvature(u: &TangentVector, v: &TangentVector) -> Result<f64, SpdError> {
    let g11 = metric(u, u)?;
    let g22 = metric(v, v)?;
    let g12 = metric(u, v)?;
    let gram_det = g11 * g22 - g12 * g12;
    if gram_det <= DEGENERATE_PLANE_RATIO * g11 * g22 {
        let gram_ratio = if g11 * g22 > 0.0 { gram_det / (g11 * g22) } else { 0.0 };
        return Err(SpdError::DegeneratePlane { gram_ratio });
    }
    Ok(metric(&curvature(u, v, v)?, u)? / gram_det)
}

/// Covariant derivative of the Killing field of X in the direction U at P:
/// ∇_U(X·)|_P = XU + UXᵀ − ½(U·P⁻¹·(X·P) + (X·P)·P⁻¹·U).
pub fn covariant_derivative_killing(
    x: &DMatrix<f64>,
    u: &TangentVector,
) -> Result<TangentVector, SpdError> {
    let p = u.base();
    let n = p.n();
    if x.nrows() != n || x.ncols() != n {
        return Err(SpdError::DimensionMismatch { expected: (n, n), got: (x.nrows(), x.ncols()) });
    }
    let trace = x.trace();
    if trace.abs() > GENERATOR_TRACE_TOL * (1.0 + numerics::frob(x)) {
        return Err(SpdError::NotTraceless { trace });
    }
    let field = x * p.matrix() + p.matrix() * x.transpose();
    let half = (u.matrix() * p.inv() * &field + &field * p.inv() * u.matrix()) * 0.5;
    let out = SymMatrix::symmetrize(&(x * u.matrix() + u.matrix() * x.transpose() - half));
    TangentVector::new(p.clone(), out)
}

/// An orthonormal basis (w.r.t. ⟨,⟩_P) of the orbit tangent space
/// span{Xᵢ·P}, with each basis vector's generator Y_a ∈ span{Xᵢ} tracked so
/// that e_a = Y_a·P exactly. Isotropy directions (Xᵢ·P ≈ 0) are dropped.
#[derive(Debug, Clone)]
pub struct OrbitTangentBasis {
    vectors: Vec<TangentVector>,
    generators: Vec<DMatrix<f64>>,
}

impl OrbitTangentBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[TangentVector] {
        &self.vectors
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }

    /// Projection of W onto the orthogonal complement of the orbit tangent
    /// space at the shared base point.
    pub fn normal_projection(&self, w: &TangentVector) -> Result<TangentVector, SpdError> {
        let mut out = w.sym().clone();
        for e in &self.vectors {
            let c = metric(w, e)?;
            out = out.add(&e.sym().scale(-c));
        }
        TangentVector::new(w.base().clone(), out)
    }

    /// Norm of the component of W inside the orbit tangent space.
    pub fn tangential_norm(&self, w: &TangentVector) -> Result<f64, SpdError> {
        let mut sq = 0.0;
        for e in &self.vectors {
            let c = metric(w, e)?;
            sq += c * c;
        }
        Ok(sq.max(0.0).sqrt())
    }
}

/// Orthonormalizes the Killing-field values {Xᵢ·P} by modified Gram–Schmidt
/// in the metric at P. A generator whose field is neither cleanly dependent
/// (residual ≤ drop·scale) nor cleanly independent (residual ≥ √drop·scale)
/// signals an orbit-dimension drop too close to the tolerance to call, and
/// yields `DegenerateOrbit`.
pub fn orbit_tangent_basis(
    generators: &[DMatrix<f64>],
    p: &SpdPoint,
) -> Result<OrbitTangentBasis, SpdError> {
    let ambiguous_floor = ORBIT_BASIS_DROP_TOL.sqrt();
    let mut basis = OrbitTangentBasis { vectors: Vec::new(), generators: Vec::new() };
    for x in generators {
        let field = killing_field(x, p)?;
        let scale = metric_norm(&field)?.max(1.0);
        let mut v = field.sym().clone();
        let mut y = x.clone();
        for (e, gen) in basis.vectors.iter().zip(&basis.generators) {
            let c = metric(&TangentVector::new(p.clone(), v.clone())?, e)?;
            v = v.add(&e.sym().scale(-c));
            y -= gen * c;
        }
        let v = TangentVector::new(p.clone(), v)?;
        let norm = metric_norm(&v)?;
        if norm <= ORBIT_BASIS_DROP_TOL * scale {
            continue;
        }
        if norm < ambiguous_floor * scale {
            return Err(SpdError::DegenerateOrbit { ratio: norm / scale });
        }
        let e = TangentVector::new(p.clone(), v.sym().scale(1.0 / norm))?;
        basis.vectors.push(e);
        basis.generators.push(y / norm);
    }
    Ok(basis)
}

/// Second fundamental form of the orbit {g·P : g ∈ G} at P, evaluated on the
/// Killing-field values of the u-th and v-th basis generators:
/// II(X_u·P, X_v·P) = normal projection of ∇_{X_u·P}(X_v·).
pub fn second_fundamental_form(
    split: &CartanSplit,
    p: &SpdPoint,
    u_idx: usize,
    v_idx: usize,
) -> Result<TangentVector, SpdError> {
    let gens = split.g().basis();
    let d = gens.len();
    if u_idx >= d {
        return Err(SpdError::IndexOutOfRange { index: u_idx, dim: d });
    }
    if v_idx >= d {
        return Err(SpdError::IndexOutOfRange { index: v_idx, dim: d });
    }
    let basis = orbit_tangent_basis(gens, p)?;
    let u_field = killing_field(&gens[u_idx], p)?;
    let deriv = covariant_derivative_killing(&gens[v_idx], &u_field)?;
    basis.normal_projection(&deriv)
}

/// Mean curvature vector of the orbit at P: the trace of II over an
/// orthonormal tangent basis. Each basis vector e_a is Y_a·P for a tracked
/// generator Y_a, so II(e_a, e_a) = normal projection of ∇_{e_a}(Y_a·).
pub fn mean_curvature(split: &CartanSplit, p: &SpdPoint) -> Result<TangentVector, SpdError> {
    let basis = orbit_tangent_basis(split.g().basis(), p)?;
    let mut h = SymMatrix::zeros(p.n());
    for (e, y) in basis.vectors().iter().zip(basis.generators()) {
        let deriv = covariant_derivative_killing(y, e)?;
        let nor = basis.normal_projection(&deriv)?;
        h = h.add(nor.sym());
    }
    TangentVector::new(p.clone(), h)
}

/// One sample of the variational function along a normal geodesic.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FSample {
    pub t: f64,
    /// f(t) = ⟨∇_{γ̇(t)}(X·), X·γ(t)⟩ = −⟨II(X·,X·), γ̇(t)⟩.
    pub f: f64,
    /// Central finite difference of f at t (step [`FD_STEP`]).
    pub f_dot_fd: f64,
    /// ⟨R(γ̇, X·)γ̇, X·⟩ ≥ 0 in nonpositive curvature.
    pub curvature_term: f64,
    /// ‖∇_{γ̇}(X·)‖².
    pub nabla_term: f64,
}

fn f_value(x: &DMatrix<f64>, gamma: &GeodesicSegment, t: f64) -> Result<f64, SpdError> {
    let (point, vel) = gamma.point_and_velocity(t)?;
    let field = killing_field(x, &point)?;
    let deriv = covariant_derivative_killing(x, &vel)?;
    metric(&deriv, &field)
}

/// Samples f(t) = ⟨∇_{γ̇}(X·), X·γ⟩ along γ, together with its
/// finite-difference derivative and the two terms of the analytic identity
/// f′ = ⟨R(γ̇,X·)γ̇,X·⟩ + ‖∇_{γ̇}(X·)‖². Requires γ̇(t) to be normal to the
/// orbit of `split` at every sample (Killing antisymmetry then propagates
/// normality along the whole geodesic).
pub fn variational_f(
    split: &CartanSplit,
    x: &DMatrix<f64>,
    gamma: &GeodesicSegment,
    t_samples: &[f64],
) -> Result<Vec<FSample>, SpdError> {
    let gens = split.g().basis();
    let mut out = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let (point, vel) = gamma.point_and_velocity(t)?;
        let basis = orbit_tangent_basis(gens, &point)?;
        let tangential = basis.tangential_norm(&vel)?;
        let speed = metric_norm(&vel)?;
        if tangential > NORMALITY_TOL * speed.max(1.0) {
            return Err(SpdError::NotNormal { t, residual: tangential });
        }
        let field = killing_field(x, &point)?;
        let deriv = covariant_derivative_killing(x, &vel)?;
        let f = metric(&deriv, &field)?;
        let nabla_term = metric(&deriv, &deriv)?;
        let curvature_term = metric(&curvature(&vel, &field, &vel)?, &field)?;
        let f_plus = f_value(x, gamma, t + FD_STEP)?;
        let f_minus = f_value(x, gamma, t - FD_STEP)?;
        let f_dot_fd = (f_plus - f_minus) / (2.0 * FD_STEP);
        out.push(FSample { t, f, f_dot_fd, curvature_term, nabla_term });
    }
    Ok(out)
}
