//! Shared test fixtures: small matrix Lie algebras with Cartan splits.
//!
//! Only compiled for tests. Each constructor returns `(g, k_idx, p_idx)`
//! with a basis adapted to the split (every basis element lies in k or p).

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::liealg::LieAlgebraPresentation;
use crate::numerics;

pub(crate) fn e(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// sl(2,ℝ) in the (H, E, F) basis — not split-adapted; used by algebra-level
/// tests that don't care about a Cartan split.
pub(crate) fn sl2_hef() -> LieAlgebraPresentation {
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    LieAlgebraPresentation::new(2, vec![h, e(2, 0, 1), e(2, 1, 0)]).unwrap()
}

/// Full sl(n,ℝ) with the standard Cartan split: k = antisymmetric part,
/// p = symmetric traceless part.
pub(crate) fn full_sl(n: usize) -> (LieAlgebraPresentation, Vec<usize>, Vec<usize>) {
    let mut basis = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            basis.push(e(n, i, j) - e(n, j, i));
        }
    }
    let k_len = basis.len();
    for i in 0..(n - 1) {
        basis.push(e(n, i, i) - e(n, i + 1, i + 1));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            basis.push(e(n, i, j) + e(n, j, i));
        }
    }
    let d = basis.len();
    let g = LieAlgebraPresentation::new(n, basis).unwrap();
    (g, (0..k_len).collect(), (k_len..d).collect())
}

/// so(3) ⊂ sl(3,ℝ): compact, k is everything, p is empty.
pub(crate) fn so3() -> (LieAlgebraPresentation, Vec<usize>, Vec<usize>) {
    let lx = e(3, 2, 1) - e(3, 1, 2);
    let ly = e(3, 0, 2) - e(3, 2, 0);
    let lz = e(3, 1, 0) - e(3, 0, 1);
    let g = LieAlgebraPresentation::new(3, vec![lx, ly, lz]).unwrap();
    (g, vec![0, 1, 2], vec![])
}

/// so(2,1) ⊂ sl(3,ℝ): rotation J = e₁₂−e₂₁ and boosts e₁₃+e₃₁, e₂₃+e₃₂.
pub(crate) fn so21() -> (LieAlgebraPresentation, Vec<usize>, Vec<usize>) {
    let j = e(3, 0, 1) - e(3, 1, 0);
    let y1 = e(3, 0, 2) + e(3, 2, 0);
    let y2 = e(3, 1, 2) + e(3, 2, 1);
    let g = LieAlgebraPresentation::new(3, vec![j, y1, y2]).unwrap();
    (g, vec![0], vec![1, 2])
}

/// sl(2,ℝ) embedded as the top-left 2×2 block of sl(3,ℝ), split-adapted
/// basis {e₁₂−e₂₁; diag(1,−1,0), e₁₂+e₂₁}.
pub(crate) fn sl2_block3() -> (LieAlgebraPresentation, Vec<usize>, Vec<usize>) {
    let j = e(3, 0, 1) - e(3, 1, 0);
    let h = e(3, 0, 0) - e(3, 1, 1);
    let b = e(3, 0, 1) + e(3, 1, 0);
    let g = LieAlgebraPresentation::new(3, vec![j, h, b]).unwrap();
    (g, vec![0], vec![1, 2])
}

/// The principal (irreducible) sl(2,ℝ) in sl(3,ℝ): H = diag(2,0,−2),
/// E = √2(e₁₂+e₂₃), F = √2(e₂₁+e₃₂); basis {E−F; H, E+F}.
pub(crate) fn sl2_irred3() -> (LieAlgebraPresentation, Vec<usize>, Vec<usize>) {
    let s = 2.0f64.sqrt();
    let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0]);
    let eu = (e(3, 0, 1) + e(3, 1, 2)) * s;
    let f = (e(3, 1, 0) + e(3, 2, 1)) * s;
    let g = LieAlgebraPresentation::new(3, vec![&eu - &f, h, &eu + &f]).unwrap();
    (g, vec![0], vec![1, 2])
}

/// Solvable {H, E} ⊂ sl(2,ℝ): closed but with singular Killing form.
pub(crate) fn solvable() -> LieAlgebraPresentation {
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    LieAlgebraPresentation::new(2, vec![h, e(2, 0, 1)]).unwrap()
}

/// A seeded random element of SL(n,ℝ): exp of a traceless matrix scaled to
/// Frobenius norm 1/2, so the condition number stays mild.
pub(crate) fn random_sl(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let tr = a.trace() / n as f64;
    for i in 0..n {
        a[(i, i)] -= tr;
    }
    let a = &a * (0.5 / numerics::frob(&a));
    numerics::matrix_exp(&a).unwrap()
}

/// Conjugate every basis element by g₀ (no determinant normalization).
pub(crate) fn conjugated(g: &LieAlgebraPresentation, g0: &DMatrix<f64>) -> LieAlgebraPresentation {
    let inv = g0.clone().try_inverse().unwrap();
    let basis = g.basis().iter().map(|x| g0 * x * &inv).collect();
    LieAlgebraPresentation::new(g.n(), basis).unwrap()
}

/// A seeded random symmetric traceless matrix with Frobenius norm 1.
pub(crate) fn random_sym_traceless(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a = (&a + &a.transpose()) * 0.5;
    let tr = a.trace() / n as f64;
    for i in 0..n {
        a[(i, i)] -= tr;
    }
    let nrm = numerics::frob(&a);
    a / nrm
}
