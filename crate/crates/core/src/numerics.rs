//! Dense symmetric linear algebra kernels shared by every other module.
//!
//! All routines are deterministic: the same input bits always produce the
//! same output bits. Matrices stay small (n ≤ ~12), so the implementations
//! favour accuracy and auditability over speed.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative eigenvalue floor below which a matrix is not treated as
/// positive definite by [`spd_map`].
pub const SPD_EIG_FLOOR: f64 = 1e-12;

/// Magnitude guard for [`matrix_exp`] inputs; beyond this scale the
/// exponential overflows f64 anyway.
pub const EXP_NORM_GUARD: f64 = 700.0;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not positive definite: min eigenvalue {min_eig:e} vs max {max_eig:e}")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },
}

/// Symmetric n×n matrix with exactly mirrored storage: the (i,j) and (j,i)
/// entries are always bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetrizes an arbitrary square matrix as (A + Aᵀ)/2 with the upper
    /// triangle copied onto the lower one.
    pub fn symmetrize(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "symmetrize needs a square matrix");
        let n = a.nrows();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = a[(i, i)];
            for j in (i + 1)..n {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix { m }
    }

    /// Builds from the upper triangle of `f(i, j)` with `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix { m }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { m: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { m: DMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMatrix { m: &self.m * c }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        SymMatrix { m: &self.m + &other.m }
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|x| x.is_finite())
    }
}

/// Eigendecomposition of a symmetric matrix: A = Q Λ Qᵀ with eigenvalues
/// ascending and Q orthogonal, columns sign-normalized so the entry of
/// largest magnitude in each eigenvector is positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// Q f(Λ) Qᵀ, symmetrized.
    pub fn recompose_mapped(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let q = &self.eigenvectors;
        let lam = DMatrix::from_diagonal(&self.eigenvalues.map(f));
        SymMatrix::symmetrize(&(q * lam * q.transpose()))
    }
}

/// Deterministic symmetric eigendecomposition with ascending eigenvalues.
///
/// Uses cyclic Jacobi sweeps: slower than tridiagonalization for large n
/// but fully deterministic and accurate to a few ulps at the sizes handled
/// here, which the reconstruction contract requires.
///
/// # Errors
/// [`NumericsError::NonFinite`] if the input contains NaN or infinity.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition, NumericsError> {
    if !a.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let n = a.n();
    let (raw_values, raw_vectors) = jacobi_eigen(a.as_matrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw_values[i].partial_cmp(&raw_values[j]).unwrap());
    let eigenvalues = DVector::from_fn(n, |r, _| raw_values[order[r]]);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = raw_vectors.column(src);
        // Sign convention: largest-magnitude entry positive (first on ties).
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        let s = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            eigenvectors[(r, dst)] = s * col[r];
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
/// Returns unsorted eigenvalues and the accumulated orthogonal matrix.
fn jacobi_eigen(input: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = DMatrix::identity(n, n);
    let anorm = frob(input);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * anorm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rutishauser's stable rotation annihilating a[(p,q)].
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        a[(r, p)] = arp - s * (arq + tau * arp);
                        a[(p, r)] = a[(r, p)];
                        a[(r, q)] = arq + s * (arp - tau * arq);
                        a[(q, r)] = a[(r, q)];
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    (DVector::from_fn(n, |i, _| a[(i, i)]), v)
}

/// Scalar functions liftable to SPD matrices through the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdFunction {
    Exp,
    Log,
    Sqrt,
    InvSqrt,
    Inv,
}

impl SpdFunction {
    fn apply(self, x: f64) -> f64 {
        match self {
            SpdFunction::Exp => x.exp(),
            SpdFunction::Log => x.ln(),
            SpdFunction::Sqrt => x.sqrt(),
            SpdFunction::InvSqrt => 1.0 / x.sqrt(),
            SpdFunction::Inv => 1.0 / x,
        }
    }

    fn needs_positive(self) -> bool {
        !matches!(self, SpdFunction::Exp)
    }
}

/// Applies a scalar function to a symmetric matrix through its
/// eigendecomposition: f(A) = Q f(Λ) Qᵀ.
///
/// `Exp` accepts any symmetric input; the other functions require the
/// eigenvalues to satisfy λ_min > 1e-12 · λ_max.
///
/// # Errors
/// [`NumericsError::NotPositiveDefinite`] when positivity is required but
/// absent; [`NumericsError::NonFinite`] on non-finite input.
pub fn spd_map(a: &SymMatrix, f: SpdFunction) -> Result<SymMatrix, NumericsError> {
    let eig = sym_eig(a)?;
    let min_eig = eig.eigenvalues[0];
    let max_eig = eig.eigenvalues[eig.eigenvalues.len() - 1];
    if f.needs_positive() && !(max_eig > 0.0 && min_eig > SPD_EIG_FLOOR * max_eig) {
        return Err(NumericsError::NotPositiveDefinite { min_eig, max_eig });
    }
    Ok(eig.recompose_mapped(|x| f.apply(x)))
}

/// Matrix exponential of a general (not necessarily symmetric) square
/// matrix by scaling and squaring with a Padé core.
///
/// # Errors
/// [`NumericsError::NonFinite`] on non-finite input or when the input norm
/// exceeds the overflow guard.
pub fn matrix_exp(x: &DMatrix<f64>) -> Result<DMatrix<f64>, NumericsError> {
    assert_eq!(x.nrows(), x.ncols(), "matrix_exp needs a square matrix");
    if !x.iter().all(|v| v.is_finite()) || x.norm() > EXP_NORM_GUARD {
        return Err(NumericsError::NonFinite);
    }
    let e = x.clone().exp();
    if !e.iter().all(|v| v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    Ok(e)
}

/// Orthonormal basis of the kernel of `m`, detected by singular values
/// σ ≤ rel_tol · σ_max. Returns an empty vector when the kernel is trivial.
///
/// The matrix is padded with zero rows when it has fewer rows than columns,
/// so directions outside the row space are always reported.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let sv = &svd.singular_values;
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = if sv.is_empty() { 0.0 } else { sv[0] };
    let mut basis = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= rel_tol * sigma_max {
            basis.push(v_t.row(i).transpose());
        }
    }
    basis
}

/// Frobenius inner product tr(AᵀB).
pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Frobenius norm.
pub fn frob(a: &DMatrix<f64>) -> f64 {
    frob_inner(a, a).sqrt()
}

/// Dimension of sym(n).
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Isometric vectorization of a symmetric matrix: diagonal entries as-is,
/// off-diagonal entries scaled by √2, ordered (0,0), (0,1), …, (1,1), ….
/// Satisfies ⟨vech(A), vech(B)⟩ = tr(AᵀB).
pub fn vech(a: &SymMatrix) -> DVector<f64> {
    let n = a.n();
    let m = a.as_matrix();
    let mut v = DVector::zeros(sym_dim(n));
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            v[k] = if i == j { m[(i, i)] } else { std::f64::consts::SQRT_2 * m[(i, j)] };
            k += 1;
        }
    }
    v
}

/// Inverse of [`vech`].
pub fn unvech(v: &DVector<f64>) -> SymMatrix {
    let len = v.len();
    let n = (((8 * len + 1) as f64).sqrt() as usize - 1) / 2;
    assert_eq!(sym_dim(n), len, "vector length is not a triangular number");
    let mut k = 0;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = if i == j { v[k] } else { v[k] / std::f64::consts::SQRT_2 };
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    SymMatrix { m }
}

/// Frobenius-orthonormal basis of sym(n) matching the [`vech`] ordering.
pub fn sym_basis(n: usize) -> Vec<SymMatrix> {
    let mut basis = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            let mut m = DMatrix::zeros(n, n);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                let x = std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            basis.push(SymMatrix { m });
        }
    }
    basis
}
