//! Pipeline stages and the serialized run report.
//!
//! Every command shares the same report skeleton; each stage fills in its
//! section and records pass/fail clauses. JSON reports are deterministic for
//! a fixed (input, seed, tolerance): stage wall-times are collected only for
//! the human-readable renderer.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use mostow::cartan::{
    self, CartanError, CartanSplit, SplitReport, PD_ACCEPT_RATIO,
};
use mostow::document::PresentationDocument;
use mostow::liealg::{self, LieAlgebraPresentation, SemisimpleVerdict, ValidationReport};
use mostow::numerics::SymMatrix;
use mostow::orbitmin::{self, OrbitMinError, StepConfig, MEAN_CURVATURE_TOL};
use mostow::spdspace::{self, FSample, SpdPoint, TangentVector};

/// Residual gate for compatibility certificates in the report.
pub const COMPAT_RESIDUAL_TOL: f64 = 1e-9;
/// Gate for sampled second fundamental form norms at certified points.
pub const SECOND_FUNDAMENTAL_TOL: f64 = 1e-6;
/// Gate for cross-path agreement: compatibility residuals of the descent
/// minimizer's inverse.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Gate for the distance between the two paths' base points (unique-kernel
/// inputs only).
pub const CROSS_DISTANCE_TOL: f64 = 1e-5;
/// Gate for the triple-system residuals (orthogonality, commutation, and
/// both triple laws).
pub const TRIPLE_RESIDUAL_TOL: f64 = 1e-8;
/// Relative gate for |f′_fd − (curvature + nabla)| in the variational suite.
pub const F_SUITE_FD_TOL: f64 = 1e-5;
/// Gate for f(0) at the orbit foot and for the nonnegativity of f′.
pub const F_SUITE_SIGN_TOL: f64 = 1e-9;
/// Seeded normal geodesics sampled by `verify`.
const F_SUITE_GEODESICS: usize = 3;
/// Sample times along each normal geodesic (t = 0 is the orbit foot).
const F_SUITE_TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, Copy)]
pub struct Flags {
    pub tol: f64,
    pub seed: u64,
    pub max_iter: usize,
}

/// How a run ended, in decreasing order of success. Maps onto the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    /// Every certificate produced and within its gate.
    Pass,
    /// The input is definitively outside the domain (e.g. not semisimple).
    CertifiedFailure,
    /// A numerical search or gate failed without certifying anything.
    NonCertified,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::CertifiedFailure => 1,
            Outcome::NonCertified => 2,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::CertifiedFailure => "certified-failure",
            Outcome::NonCertified => "non-certified",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ValidationSection {
    pub presentation: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semisimple: Option<SemisimpleVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobi_residual: Option<f64>,
    pub split: SplitReport,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CompatibilitySection {
    /// The compatible inner product S, row-major, det S = 1.
    pub s: Vec<f64>,
    pub k_residual: f64,
    pub p_residual: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub eig_ratio: f64,
    pub kernel_dim: usize,
    /// The certified orbit point S⁻¹, row-major.
    pub base_point: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct OrbitSection {
    pub mean_curvature_norm: f64,
    /// max ‖II(eᵤ·P, eᵥ·P)‖_P over all generator pairs.
    pub max_second_fundamental_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_table: Option<Vec<FRow>>,
    pub pass: bool,
}

/// f(t) samples along one seeded normal geodesic for one algebra generator.
#[derive(Debug, Serialize)]
pub struct FRow {
    pub geodesic: usize,
    pub generator: usize,
    pub samples: Vec<FSample>,
}

#[derive(Debug, Serialize)]
pub struct TripleSection {
    pub dim: usize,
    /// Basis of the normal Lie triple system, row-major matrices.
    pub basis: Vec<Vec<f64>>,
    pub orthogonality_residual: f64,
    pub commutation_residual: f64,
    pub triple_residual: f64,
    pub extended_triple_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MinimizationSection {
    pub chart_dim: usize,
    /// The minimizer P*, row-major, det P* = 1.
    pub p_star: Vec<f64>,
    pub iterations: usize,
    pub objective: f64,
    pub final_gradient_norm: f64,
    pub mean_curvature_norm: f64,
    pub diverged: bool,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct CrossCheckSection {
    /// Compatibility residuals of S′ = (P*)⁻¹ against the declared split.
    pub inverse_k_residual: f64,
    pub inverse_p_residual: f64,
    pub mean_curvature_norm: f64,
    /// max ‖II‖ over generator pairs at P*: total geodesy of the orbit.
    pub tg_residual: f64,
    /// distance(P*, S⁻¹) when the kernel path gives a unique S.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_to_kernel_base: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u64,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// SHA-256 of the raw input bytes, lowercase hex.
    pub input_digest: String,
    pub n: usize,
    pub dim: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub max_iter: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatibility: Option<CompatibilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple_system: Option<TripleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimization: Option<MinimizationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheckSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitSection>,
    pub outcome: String,
    pub failures: Vec<String>,
    /// Stage wall-times; present only in human-readable mode so the JSON
    /// report stays byte-identical for a fixed (input, seed, tolerance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

pub fn digest_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn flatten(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Accumulates sections, failures, and per-stage timings for one run.
pub struct Pipeline {
    report: RunReport,
    outcome: Outcome,
    timings: BTreeMap<String, f64>,
    with_timings: bool,
}

impl Pipeline {
    pub fn new(
        command: &str,
        input: &[u8],
        doc: &PresentationDocument,
        flags: &Flags,
        with_timings: bool,
    ) -> Self {
        Pipeline {
            report: RunReport {
                schema_version: 1,
                command: command.to_string(),
                name: doc.name.clone(),
                input_digest: digest_hex(input),
                n: doc.n,
                dim: doc.dim(),
                tolerance: flags.tol,
                seed: flags.seed,
                max_iter: flags.max_iter,
                validation: None,
                compatibility: None,
                triple_system: None,
                minimization: None,
                cross_check: None,
                orbit: None,
                outcome: String::new(),
                failures: Vec::new(),
                timings_ms: None,
            },
            outcome: Outcome::Pass,
            timings: BTreeMap::new(),
            with_timings,
        }
    }

    fn fail(&mut self, at_least: Outcome, message: String) {
        self.outcome = self.outcome.max(at_least);
        self.report.failures.push(message);
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        self.timings.insert(stage.to_string(), ms);
        out
    }

    pub fn finish(mut self) -> (RunReport, Outcome) {
        self.report.outcome = self.outcome.label().to_string();
        if self.with_timings {
            self.report.timings_ms = Some(self.timings);
        }
        (self.report, self.outcome)
    }

    /// Presentation checks, semisimplicity, and split-sign validation.
    /// Returns the split when the input passes far enough to continue.
    pub fn run_validate(&mut self, doc: &PresentationDocument) -> Option<CartanSplit> {
        self.timed("validate", |pl| {
            let g = match LieAlgebraPresentation::new(doc.n, doc.matrices()) {
                Ok(g) => g,
                Err(e) => {
                    pl.fail(Outcome::CertifiedFailure, format!("validate: {e}"));
                    return None;
                }
            };
            let presentation = liealg::validate_presentation(&g);
            let (semisimple, jacobi_residual) = match liealg::structure_constants(&g) {
                Ok(sc) => {
                    let jacobi = sc.jacobi_residual();
                    match liealg::killing_matrix(&sc)
                        .and_then(|b| liealg::is_semisimple(&b, pl.report.tolerance))
                    {
                        Ok(v) => (Some(v), Some(jacobi)),
                        Err(_) => (None, Some(jacobi)),
                    }
                }
                Err(_) => (None, None),
            };
            let split = match CartanSplit::new(
                g,
                doc.k_indices.clone(),
                doc.p_indices.clone(),
            ) {
                Ok(s) => s,
                Err(e) => {
                    pl.fail(Outcome::CertifiedFailure, format!("validate: {e}"));
                    return None;
                }
            };
            let split_report = cartan::validate_cartan_split(&split);

            let semisimple_ok = semisimple.map(|v| v.semisimple).unwrap_or(false);
            let pass = presentation.pass && semisimple_ok && split_report.pass;
            if !presentation.pass {
                pl.fail(
                    Outcome::CertifiedFailure,
                    format!(
                        "validate: presentation rejected (traceless {}, independent {}, closed {})",
                        presentation.traceless_ok,
                        presentation.independent_ok,
                        presentation.closed_ok
                    ),
                );
            }
            if !semisimple_ok {
                let detail = match semisimple {
                    Some(v) => format!("Killing eigenvalue ratio {:.3e}", v.eig_ratio),
                    None => "Killing form not computable".to_string(),
                };
                pl.fail(
                    Outcome::CertifiedFailure,
                    format!("validate: not semisimple ({detail})"),
                );
            }
            if !split_report.pass {
                let diagnosis = cartan::diagnose_split(&split);
                pl.fail(Outcome::CertifiedFailure, format!("validate: split rejected; {diagnosis}"));
            }
            pl.report.validation = Some(ValidationSection {
                presentation,
                semisimple,
                jacobi_residual,
                split: split_report,
                pass,
            });
            pass.then_some(split)
        })
    }

    /// Kernel path: compatible metric, orbit certificate at S⁻¹, and the
    /// normal triple system. Returns (S, base point, kernel_dim) on success.
    pub fn run_decompose(
        &mut self,
        split: &CartanSplit,
        with_f_table: bool,
    ) -> Option<(SymMatrix, SpdPoint, usize)> {
        let cert = self.timed("decompose", |pl| {
            match cartan::compatible_metric(split, pl.report.tolerance, pl.report.seed) {
                Ok(cert) => {
                    let eig_ratio = cert.min_eig_s / cert.max_eig_s;
                    let pass = cert.k_residual <= COMPAT_RESIDUAL_TOL
                        && cert.p_residual <= COMPAT_RESIDUAL_TOL
                        && eig_ratio >= PD_ACCEPT_RATIO;
                    if !pass {
                        pl.fail(
                            Outcome::NonCertified,
                            format!(
                                "decompose: certificate outside gates (k {:.3e}, p {:.3e}, eig ratio {:.3e})",
                                cert.k_residual, cert.p_residual, eig_ratio
                            ),
                        );
                    }
                    pl.report.compatibility = Some(CompatibilitySection {
                        s: flatten(cert.s.as_matrix()),
                        k_residual: cert.k_residual,
                        p_residual: cert.p_residual,
                        min_eig: cert.min_eig_s,
                        max_eig: cert.max_eig_s,
                        eig_ratio,
                        kernel_dim: cert.kernel_dim,
                        base_point: Vec::new(), // filled below once S⁻¹ exists
                        pass,
                    });
                    Some(cert)
                }
                Err(e) => {
                    pl.fail(outcome_for_cartan(&e), format!("decompose: {e}"));
                    None
                }
            }
        })?;

        let base = match cartan::base_point(&cert.s) {
            Ok(p) => p,
            Err(e) => {
                self.fail(Outcome::NonCertified, format!("decompose: base point: {e}"));
                return None;
            }
        };
        if let Some(section) = self.report.compatibility.as_mut() {
            section.base_point = flatten(base.matrix());
        }

        self.run_orbit_certificate(split, &base, with_f_table);
        self.run_triple_system(split, &cert.s);
        Some((cert.s.clone(), base, cert.kernel_dim))
    }

    /// Mean curvature and sampled second fundamental form at a claimed
    /// totally geodesic orbit point, plus the f(t) suite when requested.
    fn run_orbit_certificate(&mut self, split: &CartanSplit, p: &SpdPoint, with_f_table: bool) {
        self.timed("orbit", |pl| {
            let run = || -> Result<(f64, f64), spdspace::SpdError> {
                let h = spdspace::mean_curvature(split, p)?;
                let h_norm = spdspace::metric_norm(&h)?;
                let d = split.g().dim();
                let mut max_ii: f64 = 0.0;
                for u in 0..d {
                    for v in 0..d {
                        let ii = spdspace::second_fundamental_form(split, p, u, v)?;
                        max_ii = max_ii.max(spdspace::metric_norm(&ii)?);
                    }
                }
                Ok((h_norm, max_ii))
            };
            match run() {
                Ok((h_norm, max_ii)) => {
                    let f_table = if with_f_table {
                        match pl.run_f_suite(split, p) {
                            Ok(rows) => Some(rows),
                            Err(msg) => {
                                pl.fail(Outcome::NonCertified, msg);
                                None
                            }
                        }
                    } else {
                        None
                    };
                    let f_pass = pl.f_table_pass(f_table.as_deref());
                    let pass = h_norm <= MEAN_CURVATURE_TOL
                        && max_ii <= SECOND_FUNDAMENTAL_TOL
                        && f_pass;
                    if h_norm > MEAN_CURVATURE_TOL || max_ii > SECOND_FUNDAMENTAL_TOL {
                        pl.fail(
                            Outcome::NonCertified,
                            format!(
                                "orbit: certificate outside gates (mean curvature {h_norm:.3e}, max II {max_ii:.3e})"
                            ),
                        );
                    }
                    pl.report.orbit = Some(OrbitSection {
                        mean_curvature_norm: h_norm,
                        max_second_fundamental_form: max_ii,
                        f_table,
                        pass,
                    });
                }
                Err(e) => pl.fail(Outcome::NonCertified, format!("orbit: {e}")),
            }
        });
    }

    /// Checks every f-table row: f(0) ≈ 0 at the orbit foot, analytic f′
    /// nonnegative, and the finite difference matching the analytic value.
    fn f_table_pass(&mut self, rows: Option<&[FRow]>) -> bool {
        let Some(rows) = rows else { return true };
        let mut pass = true;
        for row in rows {
            for s in &row.samples {
                let analytic = s.curvature_term + s.nabla_term;
                let fd_err = (s.f_dot_fd - analytic).abs() / analytic.abs().max(1.0);
                let foot_ok = s.t != 0.0 || s.f.abs() <= F_SUITE_SIGN_TOL;
                if fd_err > F_SUITE_FD_TOL || analytic < -F_SUITE_SIGN_TOL || !foot_ok {
                    pass = false;
                    self.fail(
                        Outcome::NonCertified,
                        format!(
                            "orbit: f-suite gate failed (geodesic {}, generator {}, t = {}, f = {:.3e}, fd error {:.3e})",
                            row.geodesic, row.generator, s.t, s.f, fd_err
                        ),
                    );
                }
            }
        }
        pass
    }

    /// Samples f(t) along seeded unit-speed normal geodesics through p, for
    /// every algebra generator.
    fn run_f_suite(&mut self, split: &CartanSplit, p: &SpdPoint) -> Result<Vec<FRow>, String> {
        let seed = self.report.seed;
        self.timed("f-suite", |_| {
            let directions = normal_directions(split, p, F_SUITE_GEODESICS, seed)
                .map_err(|e| format!("orbit: f-suite setup: {e}"))?;
            let mut rows = Vec::new();
            for (gi, dir) in directions.iter().enumerate() {
                let gamma = spdspace::geodesic(dir).map_err(|e| format!("orbit: f-suite: {e}"))?;
                for (xi, x) in split.g().basis().iter().enumerate() {
                    let samples = spdspace::variational_f(split, x, &gamma, &F_SUITE_TIMES)
                        .map_err(|e| format!("orbit: f-suite: {e}"))?;
                    rows.push(FRow { geodesic: gi, generator: xi, samples });
                }
            }
            Ok(rows)
        })
    }

    fn run_triple_system(&mut self, split: &CartanSplit, s: &SymMatrix) {
        self.timed("triple-system", |pl| {
            let run = || -> Result<cartan::TripleSystemBasis, CartanError> {
                let amb = cartan::ambient_split(s)?;
                cartan::normal_triple_system(split, &amb)
            };
            match run() {
                Ok(triple) => {
                    let pass = triple.orthogonality_residual <= TRIPLE_RESIDUAL_TOL
                        && triple.commutation_residual <= TRIPLE_RESIDUAL_TOL
                        && triple.triple_residual <= TRIPLE_RESIDUAL_TOL
                        && triple.extended_triple_residual <= TRIPLE_RESIDUAL_TOL;
                    if !pass {
                        pl.fail(
                            Outcome::NonCertified,
                            format!(
                                "triple-system: residuals outside gates (orthogonality {:.3e}, commutation {:.3e}, triple {:.3e}, extended {:.3e})",
                                triple.orthogonality_residual,
                                triple.commutation_residual,
                                triple.triple_residual,
                                triple.extended_triple_residual
                            ),
                        );
                    }
                    pl.report.triple_system = Some(TripleSection {
                        dim: triple.dim(),
                        basis: triple.basis.iter().map(flatten).collect(),
                        orthogonality_residual: triple.orthogonality_residual,
                        commutation_residual: triple.commutation_residual,
                        triple_residual: triple.triple_residual,
                        extended_triple_residual: triple.extended_triple_residual,
                        pass,
                    });
                }
                Err(e) => pl.fail(outcome_for_cartan(&e), format!("triple-system: {e}")),
            }
        });
    }

    /// Descent path: fixed-set chart and volume minimization from its
    /// interior point. Returns the minimizer on success.
    pub fn run_minimize(&mut self, split: &CartanSplit) -> Option<SpdPoint> {
        self.timed("minimize", |pl| {
            let chart = match orbitmin::fixed_set(split, pl.report.tolerance, pl.report.seed) {
                Ok(c) => c,
                Err(e) => {
                    pl.fail(outcome_for_orbitmin(&e), format!("minimize: {e}"));
                    return None;
                }
            };
            let cfg = StepConfig::default();
            match orbitmin::minimize_volume(split, &chart, pl.report.max_iter, &cfg) {
                Ok(outcome) => {
                    // The descent terminates at MEAN_CURVATURE_TOL or at the
                    // floating-point stall just above it; the certification
                    // bound for a minimizer is the cross-check tolerance.
                    let pass = !outcome.diverged
                        && outcome.mean_curvature_norm <= CROSS_CHECK_TOL;
                    if outcome.diverged {
                        pl.fail(
                            Outcome::NonCertified,
                            format!(
                                "minimize: descent diverged (final ‖P‖_F = {:.3e} after {} iterations)",
                                outcome.norm_history.last().copied().unwrap_or(f64::NAN),
                                outcome.iterations
                            ),
                        );
                    } else if outcome.mean_curvature_norm > CROSS_CHECK_TOL {
                        pl.fail(
                            Outcome::NonCertified,
                            format!(
                                "minimize: stopped above the mean-curvature gate ({:.3e} after {} iterations)",
                                outcome.mean_curvature_norm, outcome.iterations
                            ),
                        );
                    }
                    pl.report.minimization = Some(MinimizationSection {
                        chart_dim: chart.dim(),
                        p_star: flatten(outcome.p_star.matrix()),
                        iterations: outcome.iterations,
                        objective: outcome.objective,
                        final_gradient_norm: outcome.final_gradient_norm,
                        mean_curvature_norm: outcome.mean_curvature_norm,
                        diverged: outcome.diverged,
                        pass,
                    });
                    pass.then_some(outcome.p_star)
                }
                Err(e) => {
                    pl.fail(outcome_for_orbitmin(&e), format!("minimize: {e}"));
                    None
                }
            }
        })
    }

    /// Cross-path agreement: the descent minimizer must satisfy the
    /// compatibility constraints through its inverse, sit on a totally
    /// geodesic orbit, and (for unique kernels) coincide with S⁻¹.
    pub fn run_cross_check(
        &mut self,
        split: &CartanSplit,
        p_star: &SpdPoint,
        kernel_base: Option<(&SpdPoint, usize)>,
    ) {
        self.timed("cross-check", |pl| {
            let cert = match orbitmin::certify_minimal(split, p_star) {
                Ok(c) => c,
                Err(e) => {
                    pl.fail(Outcome::NonCertified, format!("cross-check: {e}"));
                    return;
                }
            };
            let distance_to_kernel_base = match kernel_base {
                Some((base, 1)) => match spdspace::distance(p_star, base) {
                    Ok(d) => Some(d),
                    Err(e) => {
                        pl.fail(Outcome::NonCertified, format!("cross-check: distance: {e}"));
                        return;
                    }
                },
                _ => None,
            };
            let pass = cert.compat_k_residual <= CROSS_CHECK_TOL
                && cert.compat_p_residual <= CROSS_CHECK_TOL
                && cert.tg_residual <= CROSS_CHECK_TOL
                && cert.mean_curvature_norm <= CROSS_CHECK_TOL
                && distance_to_kernel_base.is_none_or(|d| d <= CROSS_DISTANCE_TOL);
            if !pass {
                pl.fail(
                    Outcome::NonCertified,
                    format!(
                        "cross-check: agreement gates failed (k {:.3e}, p {:.3e}, tg {:.3e}, H {:.3e}{})",
                        cert.compat_k_residual,
                        cert.compat_p_residual,
                        cert.tg_residual,
                        cert.mean_curvature_norm,
                        distance_to_kernel_base
                            .map(|d| format!(", distance {d:.3e}"))
                            .unwrap_or_default()
                    ),
                );
            }
            pl.report.cross_check = Some(CrossCheckSection {
                inverse_k_residual: cert.compat_k_residual,
                inverse_p_residual: cert.compat_p_residual,
                mean_curvature_norm: cert.mean_curvature_norm,
                tg_residual: cert.tg_residual,
                distance_to_kernel_base,
                pass,
            });
        });
    }
}

fn outcome_for_cartan(e: &CartanError) -> Outcome {
    match e {
        CartanError::InvalidPartition { .. } => Outcome::CertifiedFailure,
        _ => Outcome::NonCertified,
    }
}

fn outcome_for_orbitmin(_e: &OrbitMinError) -> Outcome {
    Outcome::NonCertified
}

/// Seeded unit-speed directions at p that are normal to the orbit of the
/// algebra (and tangent to the det-1 slice, which Killing directions of a
/// traceless algebra never leave). Returns an empty list when the orbit
/// fills the whole slice — a transitive action has no normal directions.
fn normal_directions(
    split: &CartanSplit,
    p: &SpdPoint,
    count: usize,
    seed: u64,
) -> Result<Vec<TangentVector>, spdspace::SpdError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let basis = spdspace::orbit_tangent_basis(split.g().basis(), p)?;
    let n = p.n();
    let slice_dim = mostow::numerics::sym_dim(n) - 1;
    if basis.dim() >= slice_dim {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 64 * count {
            // The normal space has positive dimension here, so failing to
            // sample it signals a degenerate geometry upstream.
            return Err(spdspace::SpdError::DegenerateOrbit { ratio: 0.0 });
        }
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let sym = SymMatrix::symmetrize(&raw);
        // Remove the radial component so the direction stays tangent to the
        // det-1 slice: ⟨P, U⟩_P = tr(P⁻¹U) and ‖P‖_P² = n.
        let radial = (p.inv() * sym.as_matrix()).trace() / n as f64;
        let u = sym.add(&p.sym().scale(-radial));
        let v = TangentVector::new(p.clone(), u)?;
        let normal = basis.normal_projection(&v)?;
        let norm = spdspace::metric_norm(&normal)?;
        if norm < 1e-6 {
            continue;
        }
        out.push(TangentVector::new(p.clone(), normal.sym().scale(1.0 / norm))?);
    }
    Ok(out)
}

/// Renders the report as human-readable text. Color is applied only when
/// `color` is true (the caller honors NO_COLOR and terminal detection).
pub fn render_pretty(report: &RunReport, color: bool) -> String {
    let paint = |ok: bool| -> String {
        let word = if ok { "PASS" } else { "FAIL" };
        if color {
            let code = if ok { "32" } else { "31" };
            format!("\u{1b}[1;{code}m{word}\u{1b}[0m")
        } else {
            word.to_string()
        }
    };
    let mut s = String::new();
    let name = report.name.as_deref().unwrap_or("(unnamed)");
    s.push_str(&format!(
        "mostow {} — {} (n = {}, dim = {})\n",
        report.command, name, report.n, report.dim
    ));
    s.push_str(&format!("input sha256: {}\n", report.input_digest));
    s.push_str(&format!(
        "flags: tol {:e}, seed {}, max-iter {}\n",
        report.tolerance, report.seed, report.max_iter
    ));

    if let Some(v) = &report.validation {
        s.push_str(&format!("\n[validate] {}\n", paint(v.pass)));
        s.push_str(&format!(
            "  presentation: traceless {}, independent {} (ratio {:.3e}), closed {} (residual {:.3e})\n",
            v.presentation.traceless_ok,
            v.presentation.independent_ok,
            v.presentation.independence_ratio,
            v.presentation.closed_ok,
            v.presentation.closure_residual
        ));
        match &v.semisimple {
            Some(verdict) => s.push_str(&format!(
                "  semisimple: {} (Killing eigenvalue ratio {:.3e})\n",
                verdict.semisimple, verdict.eig_ratio
            )),
            None => s.push_str("  semisimple: not computable\n"),
        }
        if let Some(j) = v.jacobi_residual {
            s.push_str(&format!("  Jacobi residual: {j:.3e}\n"));
        }
        s.push_str(&format!(
            "  split: kk {:.3e}, kp {:.3e}, pp {:.3e}; Killing signs k {} / p {}\n",
            v.split.kk_residual,
            v.split.kp_residual,
            v.split.pp_residual,
            v.split.killing_k_negative,
            v.split.killing_p_positive
        ));
    }

    if let Some(c) = &report.compatibility {
        s.push_str(&format!("\n[decompose] {}\n", paint(c.pass)));
        s.push_str(&format!(
            "  S: kernel_dim {}, residuals k {:.3e} / p {:.3e}\n",
            c.kernel_dim, c.k_residual, c.p_residual
        ));
        s.push_str(&format!(
            "  eigenvalues: min {:.6e}, max {:.6e}, ratio {:.3e}\n",
            c.min_eig, c.max_eig, c.eig_ratio
        ));
        s.push_str(&format!("  S (row-major): {:?}\n", c.s));
    }

    if let Some(t) = &report.triple_system {
        s.push_str(&format!("\n[triple-system] {}\n", paint(t.pass)));
        s.push_str(&format!(
            "  dim {}; residuals: orthogonality {:.3e}, commutation {:.3e}, triple {:.3e}, extended {:.3e}\n",
            t.dim,
            t.orthogonality_residual,
            t.commutation_residual,
            t.triple_residual,
            t.extended_triple_residual
        ));
    }

    if let Some(m) = &report.minimization {
        s.push_str(&format!("\n[minimize] {}\n", paint(m.pass)));
        s.push_str(&format!(
            "  chart dim {}, {} iterations, objective {:.9e}\n",
            m.chart_dim, m.iterations, m.objective
        ));
        s.push_str(&format!(
            "  gradient {:.3e}, mean curvature {:.3e}, diverged {}\n",
            m.final_gradient_norm, m.mean_curvature_norm, m.diverged
        ));
        s.push_str(&format!("  P* (row-major): {:?}\n", m.p_star));
    }

    if let Some(x) = &report.cross_check {
        s.push_str(&format!("\n[cross-check] {}\n", paint(x.pass)));
        s.push_str(&format!(
            "  (P*)⁻¹ residuals: k {:.3e}, p {:.3e}; orbit: H {:.3e}, max II {:.3e}\n",
            x.inverse_k_residual, x.inverse_p_residual, x.mean_curvature_norm, x.tg_residual
        ));
        if let Some(d) = x.distance_to_kernel_base {
            s.push_str(&format!("  distance to kernel-path base point: {d:.3e}\n"));
        }
    }

    if let Some(o) = &report.orbit {
        s.push_str(&format!("\n[orbit] {}\n", paint(o.pass)));
        s.push_str(&format!(
            "  mean curvature {:.3e}, max second fundamental form {:.3e}\n",
            o.mean_curvature_norm, o.max_second_fundamental_form
        ));
        if let Some(rows) = &o.f_table {
            let mut worst_fd: f64 = 0.0;
            let mut min_fprime = f64::INFINITY;
            let mut max_f0: f64 = 0.0;
            for row in rows {
                for smp in &row.samples {
                    let analytic = smp.curvature_term + smp.nabla_term;
                    worst_fd =
                        worst_fd.max((smp.f_dot_fd - analytic).abs() / analytic.abs().max(1.0));
                    min_fprime = min_fprime.min(analytic);
                    if smp.t == 0.0 {
                        max_f0 = max_f0.max(smp.f.abs());
                    }
                }
            }
            s.push_str(&format!(
                "  f-suite: {} rows; max |f(0)| {:.3e}, min f' {:.3e}, worst fd mismatch {:.3e}\n",
                rows.len(),
                max_f0,
                min_fprime,
                worst_fd
            ));
        }
    }

    if let Some(t) = &report.timings_ms {
        s.push_str("\ntimings (ms):\n");
        for (stage, ms) in t {
            s.push_str(&format!("  {stage}: {ms:.2}\n"));
        }
    }

    s.push_str(&format!("\noutcome: {}\n", report.outcome));
    for f in &report.failures {
        s.push_str(&format!("  failure: {f}\n"));
    }
    s
}
