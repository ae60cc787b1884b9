//! Matrix Lie algebra structure: brackets, structure constants, Killing
//! form, and Cartan's semisimplicity criterion.
//!
//! The Killing form is always computed from structure constants (the
//! adjoint representation), never from the ambient trace form, so it is
//! intrinsic to the subalgebra.

use crate::numerics::{self, SymMatrix};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Maximum |tr Xᵢ| admitted for a basis element.
pub const TRACELESS_TOL: f64 = 1e-12;
/// Minimum eigenvalue ratio of the basis Gram matrix (linear independence).
pub const INDEPENDENCE_RATIO_MIN: f64 = 1e-10;
/// Maximum closure residual for a valid presentation.
pub const CLOSURE_TOL: f64 = 1e-9;
/// Closure residual ceiling accepted by [`killing_matrix`].
pub const KILLING_CLOSURE_PRE: f64 = 1e-8;
/// Jacobi identity residual ceiling (scaled by tensor norm).
pub const JACOBI_TOL: f64 = 1e-8;
/// Default relative tolerance of the semisimplicity eigenvalue test.
pub const SEMISIMPLE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum LieAlgError {
    #[error("matrix dimensions {got:?} do not match expected {expected:?}")]
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("basis Gram matrix is numerically singular (eigenvalue ratio {ratio:e})")]
    DegenerateBasis { ratio: f64 },
    #[error("basis is not bracket-closed (closure residual {residual:e})")]
    NotClosed { residual: f64 },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("algebra has no basis elements")]
    ZeroAlgebra,
}

/// A matrix Lie algebra g ⊂ sl(n,ℝ) given by an ordered basis of traceless
/// n×n matrices.
///
/// Construction checks shape and finiteness only; the semantic invariants
/// (tracelessness, independence, closure) are measured by
/// [`validate_presentation`].
#[derive(Debug, Clone)]
pub struct LieAlgebraPresentation {
    n: usize,
    basis: Vec<DMatrix<f64>>,
}

impl LieAlgebraPresentation {
    /// # Errors
    /// `DimensionMismatch` if any element is not n×n; `NonFinite` on NaN or
    /// infinite entries.
    pub fn new(n: usize, basis: Vec<DMatrix<f64>>) -> Result<Self, LieAlgError> {
        for x in &basis {
            if x.shape() != (n, n) {
                return Err(LieAlgError::DimensionMismatch { expected: (n, n), got: x.shape() });
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(LieAlgError::NonFinite);
            }
        }
        Ok(LieAlgebraPresentation { n, basis })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of basis elements d.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn elem(&self, i: usize) -> Result<&DMatrix<f64>, LieAlgError> {
        self.basis.get(i).ok_or(LieAlgError::IndexOutOfRange { index: i, dim: self.basis.len() })
    }
}

/// Commutator [X, Y] = XY − YX.
///
/// # Errors
/// `DimensionMismatch` unless both arguments are square of the same size.
pub fn bracket(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>, LieAlgError> {
    if x.nrows() != x.ncols() || x.shape() != y.shape() {
        return Err(LieAlgError::DimensionMismatch { expected: x.shape(), got: y.shape() });
    }
    Ok(x * y - y * x)
}

/// Least-squares expansion of `target` in the span of `span`, solved through
/// the eigendecomposition of the Gram matrix of the vectorized span.
///
/// Returns the coefficient vector and the Frobenius norm of the unexplained
/// remainder.
///
/// # Errors
/// `DegenerateBasis` when the Gram eigenvalue ratio drops below the
/// independence floor.
pub fn expand_in_span(
    span: &[DMatrix<f64>],
    target: &DMatrix<f64>,
) -> Result<(DVector<f64>, f64), LieAlgError> {
    let d = span.len();
    if d == 0 {
        return Ok((DVector::zeros(0), numerics::frob(target)));
    }
    let gram = SymMatrix::from_fn(d, |i, j| numerics::frob_inner(&span[i], &span[j]));
    let eig = numerics::sym_eig(&gram).map_err(|_| LieAlgError::NonFinite)?;
    let max_eig = eig.eigenvalues[d - 1];
    let min_eig = eig.eigenvalues[0];
    if max_eig <= 0.0 || min_eig <= INDEPENDENCE_RATIO_MIN * max_eig {
        return Err(LieAlgError::DegenerateBasis { ratio: if max_eig > 0.0 { min_eig / max_eig } else { 0.0 } });
    }
    let rhs = DVector::from_fn(d, |i, _| numerics::frob_inner(&span[i], target));
    let q = &eig.eigenvectors;
    let coeffs = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x)) * q.transpose() * rhs;
    let mut remainder = target.clone();
    for (i, m) in span.iter().enumerate() {
        remainder -= m * coeffs[i];
    }
    Ok((coeffs, numerics::frob(&remainder)))
}

/// Structure constant tensor c_{ij}^k with [Xᵢ, Xⱼ] ≈ Σ_k c_{ij}^k X_k.
/// Antisymmetry in (i, j) is enforced exactly by storage.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    d: usize,
    c: Vec<f64>,
    closure_residual: f64,
}

impl StructureConstants {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.d + j) * self.d + k]
    }

    /// Worst unexplained bracket norm, normalized by max(1, ‖[Xᵢ,Xⱼ]‖_F).
    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// Frobenius norm of the tensor.
    pub fn tensor_norm(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest Jacobi identity violation, scaled by (1 + tensor norm).
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.d;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut sum = 0.0;
                        for m in 0..d {
                            sum += self.get(i, j, m) * self.get(m, k, l)
                                + self.get(j, k, m) * self.get(m, i, l)
                                + self.get(k, i, m) * self.get(m, j, l);
                        }
                        worst = worst.max(sum.abs());
                    }
                }
            }
        }
        worst / (1.0 + self.tensor_norm())
    }
}

/// Expands every bracket of basis pairs in the basis by least squares.
///
/// # Errors
/// `DegenerateBasis` if the basis Gram matrix is numerically singular.
pub fn structure_constants(g: &LieAlgebraPresentation) -> Result<StructureConstants, LieAlgError> {
    let d = g.dim();
    let mut c = vec![0.0; d * d * d];
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            let br = bracket(&g.basis[i], &g.basis[j])?;
            let (coeffs, raw_residual) = expand_in_span(&g.basis, &br)?;
            let residual = raw_residual / numerics::frob(&br).max(1.0);
            worst = worst.max(residual);
            for k in 0..d {
                c[(i * d + j) * d + k] = coeffs[k];
                c[(j * d + i) * d + k] = -coeffs[k];
            }
        }
    }
    Ok(StructureConstants { d, c, closure_residual: worst })
}

/// Matrix of ad Xᵢ in the basis: (ad Xᵢ)_{k,j} = c_{ij}^k.
///
/// # Errors
/// `IndexOutOfRange` for an invalid basis index.
pub fn adjoint_matrix(sc: &StructureConstants, i: usize) -> Result<DMatrix<f64>, LieAlgError> {
    let d = sc.d();
    if i >= d {
        return Err(LieAlgError::IndexOutOfRange { index: i, dim: d });
    }
    Ok(DMatrix::from_fn(d, d, |k, j| sc.get(i, j, k)))
}

/// Killing form of the presentation basis: Bᵢⱼ = tr(ad Xᵢ · ad Xⱼ).
#[derive(Debug, Clone)]
pub struct KillingMatrix {
    b: SymMatrix,
}

impl KillingMatrix {
    pub fn d(&self) -> usize {
        self.b.n()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.b
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        self.b.as_matrix()
    }
}

/// # Errors
/// `NotClosed` when the closure residual exceeds the precondition ceiling.
pub fn killing_matrix(sc: &StructureConstants) -> Result<KillingMatrix, LieAlgError> {
    if sc.closure_residual() > KILLING_CLOSURE_PRE {
        return Err(LieAlgError::NotClosed { residual: sc.closure_residual() });
    }
    let d = sc.d();
    let ads: Vec<DMatrix<f64>> = (0..d).map(|i| adjoint_matrix(sc, i).unwrap()).collect();
    let b = SymMatrix::from_fn(d, |i, j| (&ads[i] * &ads[j]).trace());
    Ok(KillingMatrix { b })
}

/// Outcome of Cartan's criterion with its numerical witness.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemisimpleVerdict {
    pub semisimple: bool,
    /// min |λ(B)| / max |λ(B)|; zero for the zero form.
    pub eig_ratio: f64,
}

/// Cartan's criterion: g is semisimple iff its Killing form is
/// nondegenerate, tested as min|λ| > rel_tol · max|λ|.
///
/// # Errors
/// `ZeroAlgebra` for a zero-dimensional input.
pub fn is_semisimple(b: &KillingMatrix, rel_tol: f64) -> Result<SemisimpleVerdict, LieAlgError> {
    if b.d() == 0 {
        return Err(LieAlgError::ZeroAlgebra);
    }
    let eig = numerics::sym_eig(&b.b).map_err(|_| LieAlgError::NonFinite)?;
    let abs: Vec<f64> = eig.eigenvalues.iter().map(|x| x.abs()).collect();
    let max = abs.iter().cloned().fold(0.0_f64, f64::max);
    let min = abs.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    Ok(SemisimpleVerdict { semisimple: ratio > rel_tol, eig_ratio: ratio })
}

/// Measured presentation invariants with per-clause outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub dim: usize,
    pub max_abs_trace: f64,
    pub independence_ratio: f64,
    pub closure_residual: f64,
    pub traceless_ok: bool,
    pub independent_ok: bool,
    pub closed_ok: bool,
    pub pass: bool,
}

/// Measures tracelessness, linear independence, and bracket closure.
/// Never fails; defects are reported through the flags.
pub fn validate_presentation(g: &LieAlgebraPresentation) -> ValidationReport {
    let max_abs_trace = g.basis.iter().map(|x| x.trace().abs()).fold(0.0_f64, f64::max);
    let d = g.dim();
    let independence_ratio = if d == 0 {
        1.0
    } else {
        let gram = SymMatrix::from_fn(d, |i, j| numerics::frob_inner(&g.basis[i], &g.basis[j]));
        match numerics::sym_eig(&gram) {
            Ok(eig) => {
                let max = eig.eigenvalues[d - 1];
                if max > 0.0 { eig.eigenvalues[0] / max } else { 0.0 }
            }
            Err(_) => 0.0,
        }
    };
    let independent_ok = independence_ratio > INDEPENDENCE_RATIO_MIN;
    let closure_residual = if independent_ok {
        match structure_constants(g) {
            Ok(sc) => sc.closure_residual(),
            Err(_) => f64::INFINITY,
        }
    } else {
        f64::INFINITY
    };
    let traceless_ok = max_abs_trace <= TRACELESS_TOL;
    let closed_ok = closure_residual <= CLOSURE_TOL;
    ValidationReport {
        n: g.n(),
        dim: d,
        max_abs_trace,
        independence_ratio,
        closure_residual,
        traceless_ok,
        independent_ok,
        closed_ok,
        pass: traceless_ok && independent_ok && closed_ok,
    }
}
