//! End-to-end library flow through the public API only: parse a catalog
//! document, conjugate it, run both the kernel and descent paths, and check
//! that the certificates agree — the workflow a downstream consumer writes.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mostow::cartan;
use mostow::catalog::catalog_entry;
use mostow::document::{emit_presentation, parse_presentation};
use mostow::numerics;
use mostow::orbitmin::{self, StepConfig};
use mostow::spdspace;

fn seeded_sl3(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
    let tr = a.trace() / 3.0;
    for i in 0..3 {
        a[(i, i)] -= tr;
    }
    let a = &a * (0.5 / numerics::frob(&a));
    numerics::matrix_exp(&a).unwrap()
}

#[test]
fn both_paths_agree_on_a_conjugated_catalog_presentation() {
    // Round-trip the document like a file-based consumer would.
    let doc = catalog_entry("so21-in-sl3").unwrap();
    let text = emit_presentation(&doc);
    let doc = parse_presentation(text.as_bytes()).unwrap();
    let split = doc.to_split().unwrap();

    // Conjugate so the compatible metric is far from the identity.
    let mut rng = ChaCha8Rng::seed_from_u64(90210);
    let g0 = seeded_sl3(&mut rng);
    let conj = cartan::conjugate_presentation(&g0, &split).unwrap();
    let report = cartan::validate_cartan_split(&conj);
    assert!(report.pass, "conjugated split fails validation: {report:?}");

    // Kernel path.
    let cert = cartan::compatible_metric(&conj, 1e-9, 0).unwrap();
    assert_eq!(cert.kernel_dim, 1);
    assert!(cert.k_residual <= 1e-9 && cert.p_residual <= 1e-9);
    let base = cartan::base_point(&cert.s).unwrap();
    let product = base.matrix() * cert.s.as_matrix();
    let gap = numerics::frob(&(product - DMatrix::identity(3, 3)));
    assert!(gap <= 1e-12, "base point is not the inverse of S (gap {gap:.3e})");

    // The orbit through the base point is totally geodesic.
    let h = spdspace::mean_curvature(&conj, &base).unwrap();
    assert!(spdspace::metric_norm(&h).unwrap() <= 1e-8);

    // Descent path from the fixed-set interior point.
    let chart = orbitmin::fixed_set(&conj, 1e-9, 0).unwrap();
    let outcome = orbitmin::minimize_volume(&conj, &chart, 1000, &StepConfig::default()).unwrap();
    assert!(!outcome.diverged);

    // Cross-check: unique kernel, so the two paths land on the same point.
    let dist = spdspace::distance(&outcome.p_star, &base).unwrap();
    assert!(dist <= 1e-5, "paths disagree by {dist:.3e}");
    // The descent can stall a hair above its 1e-8 termination tolerance on
    // conjugated geometry; the certification bound for a minimizer is 1e-6.
    let minimal = orbitmin::certify_minimal(&conj, &outcome.p_star).unwrap();
    assert!(minimal.mean_curvature_norm <= 1e-6);
    assert!(minimal.compat_k_residual <= 1e-6 && minimal.compat_p_residual <= 1e-6);
    assert!(minimal.tg_residual <= 1e-6);

    // Triple system of the conjugated pair: so(2,1) has none.
    let amb = cartan::ambient_split(&cert.s).unwrap();
    let triple = cartan::normal_triple_system(&conj, &amb).unwrap();
    assert_eq!(triple.dim(), 0);
}

#[test]
fn rejection_paths_certify_their_failures() {
    // Solvable input: semisimplicity fails before any geometry runs.
    let doc = catalog_entry("solvable-in-sl2").unwrap();
    let split = doc.to_split().unwrap();
    let report = cartan::validate_cartan_split(&split);
    assert!(!report.pass);
    assert!(!report.killing_p_positive);

    // Declaring all of sl(2) symmetric leaves no compatible metric at all.
    let full = catalog_entry("full-sl2").unwrap();
    let g = mostow::liealg::LieAlgebraPresentation::new(full.n, full.matrices()).unwrap();
    let bad = cartan::CartanSplit::new(g, vec![], vec![0, 1, 2]).unwrap();
    match cartan::compatible_metric(&bad, 1e-9, 0) {
        Err(cartan::CartanError::EmptyKernel { diagnosis }) => {
            assert_eq!(diagnosis.closest_to_failing, "Killing form positive definite on p");
        }
        other => panic!("expected an empty kernel, got {other:?}"),
    }

    // With k empty there are no fixed-point constraints: the chart is all of
    // sym(2) and its interior point is still a valid SPD matrix.
    let chart = orbitmin::fixed_set(&bad, 1e-9, 0).unwrap();
    assert_eq!(chart.dim(), numerics::sym_dim(2));
    assert!(chart.membership_residual(chart.p0()) <= 1e-12);
}
