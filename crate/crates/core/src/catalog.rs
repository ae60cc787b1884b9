//! Built-in catalog of named algebra presentations: the standard worked
//! examples plus one deliberately non-semisimple entry for exercising the
//! rejection path.

use nalgebra::DMatrix;

use crate::document::PresentationDocument;

fn e(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn doc(
    name: &str,
    n: usize,
    basis: Vec<DMatrix<f64>>,
    k_indices: Vec<usize>,
    p_indices: Vec<usize>,
) -> PresentationDocument {
    PresentationDocument::from_matrices(Some(name), n, &basis, k_indices, p_indices)
}

/// Full sl(n,ℝ): antisymmetric k-part first, then diagonal and symmetric
/// off-diagonal p-part.
fn full_sl(name: &str, n: usize) -> PresentationDocument {
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
    doc(name, n, basis, (0..k_len).collect(), (k_len..d).collect())
}

fn sl2_block_in_sl3() -> PresentationDocument {
    let j = e(3, 0, 1) - e(3, 1, 0);
    let h = e(3, 0, 0) - e(3, 1, 1);
    let b = e(3, 0, 1) + e(3, 1, 0);
    doc("sl2-block-in-sl3", 3, vec![j, h, b], vec![0], vec![1, 2])
}

fn so21_in_sl3() -> PresentationDocument {
    let j = e(3, 0, 1) - e(3, 1, 0);
    let y1 = e(3, 0, 2) + e(3, 2, 0);
    let y2 = e(3, 1, 2) + e(3, 2, 1);
    doc("so21-in-sl3", 3, vec![j, y1, y2], vec![0], vec![1, 2])
}

fn so3_in_sl3() -> PresentationDocument {
    let lx = e(3, 2, 1) - e(3, 1, 2);
    let ly = e(3, 0, 2) - e(3, 2, 0);
    let lz = e(3, 1, 0) - e(3, 0, 1);
    doc("so3-in-sl3", 3, vec![lx, ly, lz], vec![0, 1, 2], vec![])
}

/// The principal sl(2,ℝ) acting irreducibly on ℝ³: H = diag(2,0,−2),
/// E = √2(e₁₂+e₂₃), F = √2(e₂₁+e₃₂), presented as {E−F; H, E+F}.
fn sl2_irred_in_sl3() -> PresentationDocument {
    let s = 2.0f64.sqrt();
    let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -2.0]);
    let eu = (e(3, 0, 1) + e(3, 1, 2)) * s;
    let f = (e(3, 1, 0) + e(3, 2, 1)) * s;
    doc("sl2-irred-in-sl3", 3, vec![&eu - &f, h, &eu + &f], vec![0], vec![1, 2])
}

/// Solvable {H, E} ⊂ sl(2,ℝ): bracket-closed but the Killing form is
/// singular, so validation must reject it as non-semisimple.
fn solvable_in_sl2() -> PresentationDocument {
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    doc("solvable-in-sl2", 2, vec![h, e(2, 0, 1)], vec![], vec![0, 1])
}

/// All built-in presentations, in a fixed order.
pub fn catalog() -> Vec<PresentationDocument> {
    vec![
        full_sl("full-sl2", 2),
        full_sl("full-sl3", 3),
        sl2_block_in_sl3(),
        so21_in_sl3(),
        so3_in_sl3(),
        sl2_irred_in_sl3(),
        solvable_in_sl2(),
    ]
}

/// Looks up a catalog entry by its name.
pub fn catalog_entry(name: &str) -> Option<PresentationDocument> {
    catalog().into_iter().find(|d| d.name.as_deref() == Some(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan;
    use crate::document::{emit_presentation, parse_presentation};
    use crate::liealg;

    #[test]
    fn catalog_documents_round_trip_and_convert() {
        let entries = catalog();
        assert!(entries.len() >= 7);
        for entry in &entries {
            let text = emit_presentation(entry);
            let parsed = parse_presentation(text.as_bytes()).unwrap();
            assert_eq!(&parsed, entry);
            parsed.to_split().unwrap();
        }
    }

    #[test]
    fn positive_entries_validate_and_have_expected_kernels() {
        let expected: [(&str, usize); 6] = [
            ("full-sl2", 1),
            ("full-sl3", 1),
            ("sl2-block-in-sl3", 2),
            ("so21-in-sl3", 1),
            ("so3-in-sl3", 1),
            ("sl2-irred-in-sl3", 1),
        ];
        for (name, kernel_dim) in expected {
            let entry = catalog_entry(name).unwrap();
            let split = entry.to_split().unwrap();
            let report = cartan::validate_cartan_split(&split);
            assert!(report.pass, "{name}: {report:?}");
            let cert =
                cartan::compatible_metric(&split, cartan::DEFAULT_KERNEL_REL_TOL, 0).unwrap();
            assert_eq!(cert.kernel_dim, kernel_dim, "{name}");
        }
    }

    #[test]
    fn solvable_entry_is_rejected_as_non_semisimple() {
        let entry = catalog_entry("solvable-in-sl2").unwrap();
        let g = crate::liealg::LieAlgebraPresentation::new(entry.n, entry.matrices()).unwrap();
        let sc = liealg::structure_constants(&g).unwrap();
        let b = liealg::killing_matrix(&sc).unwrap();
        let verdict = liealg::is_semisimple(&b, 1e-9).unwrap();
        assert!(!verdict.semisimple);
    }

    #[test]
    fn lookup_by_name() {
        assert!(catalog_entry("so21-in-sl3").is_some());
        assert!(catalog_entry("nonexistent").is_none());
    }
}
