//! Command implementations over a loaded problem, producing typed outputs
//! that render identically (same numbers) as a human table or as
//! line-delimited JSON records.

use nalgebra::DVector;
use serde::Serialize;
use sha2::{Digest, Sha256};

use randers_core::classify::{
    berwald_report, beta_form, closedness_defect, is_perfect, killing_defect,
    milnor_nonneg_check, parallel_space, ys_negative_check, ys_positive_check, ys_zero_check,
    BerwaldReport, MilnorReport, YsReport,
};
use randers_core::flag::{
    basis_flag_curvature, flag_curvature_biinvariant, flag_report, make_flag, sample_flags,
    scan_flags, Flag, FlagReport, ScanStatistics,
};
use randers_core::metric::InnerForm;
use randers_core::{Parallelism, Tolerances};

use crate::error::{CliError, Result};
use crate::problem::LoadedProblem;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub record: &'static str,
    pub command: &'static str,
    pub tool_version: &'static str,
    pub input: String,
    pub input_digest: String,
    pub tolerances: Tolerances,
}

pub fn make_header(
    command: &'static str,
    input: &str,
    input_bytes: &[u8],
    tolerances: &Tolerances,
) -> RunHeader {
    let digest = Sha256::digest(input_bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    RunHeader {
        record: "run",
        command,
        tool_version: TOOL_VERSION,
        input: input.to_string(),
        input_digest: format!("sha256:{hex}"),
        tolerances: tolerances.clone(),
    }
}

/// One judged or informational quantity in a validation report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub record: &'static str,
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl CheckRow {
    fn judged(name: &str, value: f64, tol: f64) -> Self {
        CheckRow {
            record: "validate",
            name: name.to_string(),
            value,
            tol: Some(tol),
            pass: Some(value <= tol),
        }
    }

    fn info(name: &str, value: f64) -> Self {
        CheckRow {
            record: "validate",
            name: name.to_string(),
            value,
            tol: None,
            pass: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateOutput {
    pub name: String,
    pub dim: usize,
    pub has_split: bool,
    pub rows: Vec<CheckRow>,
    pub is_berwald: bool,
    pub all_pass: bool,
}

pub fn run_validate(problem: &LoadedProblem) -> Result<ValidateOutput> {
    let geom = &problem.geometry;
    let tol = &geom.tolerances;
    let mut rows = Vec::new();

    let algebra_report = geom.algebra.validate();
    rows.push(CheckRow::judged(
        "antisymmetry_defect",
        algebra_report.antisymmetry_defect,
        0.0,
    ));
    rows.push(CheckRow::judged(
        "jacobi_defect",
        algebra_report.jacobi_defect,
        tol.jacobi,
    ));
    rows.push(CheckRow::info(
        "bi_invariance_defect",
        geom.metric.bi_invariance_defect(&geom.algebra),
    ));

    if let Some(split) = &geom.split {
        let report = split
            .check(&geom.algebra, geom.metric.g0())
            .map_err(CliError::from_core)?;
        rows.push(CheckRow::judged("subalgebra_defect", report.subalgebra_defect, tol.jacobi));
        rows.push(CheckRow::judged(
            "orthogonality_defect",
            report.orthogonality_defect,
            tol.structural,
        ));
        rows.push(CheckRow::judged(
            "reductivity_defect",
            report.reductivity_defect,
            tol.jacobi,
        ));
        rows.push(CheckRow::judged(
            "phi_identity_on_h_defect",
            geom.metric.phi_identity_on_h_defect(split),
            1e-10,
        ));
        rows.push(CheckRow::info(
            "ad_invariance_defect_h",
            geom.metric
                .ad_invariance_defect_h(&geom.algebra, split)
                .map_err(CliError::from_core)?,
        ));
    }

    let randers = geom.randers();
    rows.push(CheckRow {
        record: "validate",
        name: "drift_norm".to_string(),
        value: randers.norm_bound(),
        tol: Some(1.0),
        pass: Some(randers.norm_bound() < 1.0),
    });
    rows.push(CheckRow::info(
        "strong_convexity_margin",
        randers.strong_convexity_margin(),
    ));

    let oracle = geom.oracle().map_err(CliError::from_core)?;
    let berwald = berwald_report(geom, &oracle).map_err(CliError::from_core)?;
    rows.push(CheckRow::info("parallel_defect", berwald.parallel_defect));

    let all_pass = rows.iter().all(|r| r.pass.unwrap_or(true));
    Ok(ValidateOutput {
        name: problem.name.clone(),
        dim: geom.dim(),
        has_split: geom.split.is_some(),
        rows,
        is_berwald: berwald.is_berwald,
        all_pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlagOutput {
    pub record: &'static str,
    /// The actual orthonormalized flag used for evaluation.
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    #[serde(flatten)]
    pub report: FlagReport,
}

pub fn run_flag(problem: &LoadedProblem, y_raw: &[f64], u_raw: &[f64]) -> Result<FlagOutput> {
    let geom = &problem.geometry;
    let expect = geom.dim();
    if y_raw.len() != expect || u_raw.len() != expect {
        return Err(CliError::Input(format!(
            "flag vectors must have {expect} components"
        )));
    }
    let oracle = geom.oracle().map_err(CliError::from_core)?;
    let flag = make_flag(
        geom,
        &DVector::from_vec(y_raw.to_vec()),
        &DVector::from_vec(u_raw.to_vec()),
    )
    .map_err(CliError::from_core)?;
    let report = flag_report(geom, &oracle, &flag).map_err(CliError::from_core)?;
    Ok(FlagOutput {
        record: "flag",
        y: flag.y.iter().copied().collect(),
        u: flag.u.iter().copied().collect(),
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanOutput {
    pub record: &'static str,
    #[serde(flatten)]
    pub stats: ScanStatistics,
}

pub fn run_scan(problem: &LoadedProblem, n: usize, seed: u64) -> Result<ScanOutput> {
    let geom = &problem.geometry;
    let oracle = geom.oracle().map_err(CliError::from_core)?;
    let stats = scan_flags(geom, &oracle, n, seed, Parallelism::Auto).map_err(CliError::from_core)?;
    Ok(ScanOutput {
        record: "scan",
        stats,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PerfectOutput {
    pub record: &'static str,
    pub derived_rank: usize,
    pub dim: usize,
    pub is_perfect: bool,
    pub parallel_space_dim: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CheckOutput {
    Berwald {
        record: &'static str,
        #[serde(flatten)]
        report: BerwaldReport,
    },
    Perfect(PerfectOutput),
    Ys {
        record: &'static str,
        #[serde(flatten)]
        report: YsReport,
    },
    Milnor {
        record: &'static str,
        x: Vec<f64>,
        #[serde(flatten)]
        report: MilnorReport,
    },
}

pub struct CheckArgs {
    pub k: Option<f64>,
    pub x: Option<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

pub fn run_check(problem: &LoadedProblem, predicate: &str, args: &CheckArgs) -> Result<CheckOutput> {
    let geom = &problem.geometry;
    let oracle = geom.oracle().map_err(CliError::from_core)?;
    match predicate {
        "berwald" => {
            let report = berwald_report(geom, &oracle).map_err(CliError::from_core)?;
            Ok(CheckOutput::Berwald {
                record: "check-berwald",
                report,
            })
        }
        "perfect" => {
            let rank = geom.algebra.derived_span(geom.tolerances.rank_rel).len();
            let space = parallel_space(geom, &oracle).map_err(CliError::from_core)?;
            Ok(CheckOutput::Perfect(PerfectOutput {
                record: "check-perfect",
                derived_rank: rank,
                dim: geom.dim(),
                is_perfect: is_perfect(&geom.algebra, geom.tolerances.rank_rel),
                parallel_space_dim: space.len(),
            }))
        }
        "ys-positive" => {
            let k = args
                .k
                .ok_or_else(|| CliError::Usage("ys-positive requires --k <K>".into()))?;
            let report = ys_positive_check(geom, &oracle, k).map_err(CliError::from_core)?;
            Ok(CheckOutput::Ys {
                record: "check-ys",
                report,
            })
        }
        "ys-negative" => {
            let k = args
                .k
                .ok_or_else(|| CliError::Usage("ys-negative requires --k <K>".into()))?;
            let report = ys_negative_check(geom, &oracle, k).map_err(CliError::from_core)?;
            Ok(CheckOutput::Ys {
                record: "check-ys",
                report,
            })
        }
        "ys-zero" => {
            let report = ys_zero_check(geom, &oracle).map_err(CliError::from_core)?;
            Ok(CheckOutput::Ys {
                record: "check-ys",
                report,
            })
        }
        "milnor" => {
            let x = match &args.x {
                Some(raw) => {
                    if raw.len() != geom.dim() {
                        return Err(CliError::Input(format!(
                            "--x must have {} components",
                            geom.dim()
                        )));
                    }
                    DVector::from_vec(raw.clone())
                }
                None => geom.drift().clone(),
            };
            let report = milnor_nonneg_check(geom, &oracle, &x, args.samples, args.seed)
                .map_err(CliError::from_core)?;
            Ok(CheckOutput::Milnor {
                record: "check-milnor",
                x: x.iter().copied().collect(),
                report,
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown predicate {other:?}; expected berwald, perfect, ys-positive, ys-negative, ys-zero or milnor"
        ))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub record: &'static str,
    pub formula: String,
    pub samples: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub applicable: bool,
}

impl CompareRow {
    fn from_diffs(formula: &str, diffs: &[f64]) -> Self {
        let mut max = 0.0f64;
        let mut sum = 0.0f64;
        for d in diffs {
            max = max.max(d.abs());
            sum += d.abs();
        }
        let mean = if diffs.is_empty() { 0.0 } else { sum / diffs.len() as f64 };
        CompareRow {
            record: "compare",
            formula: formula.to_string(),
            samples: diffs.len(),
            max_abs: max,
            mean_abs: mean,
            applicable: true,
        }
    }

    fn not_applicable(formula: &str) -> Self {
        CompareRow {
            record: "compare",
            formula: formula.to_string(),
            samples: 0,
            max_abs: 0.0,
            mean_abs: 0.0,
            applicable: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareOutput {
    pub rows: Vec<CompareRow>,
}

/// Audits every printed formula against the first-principles pipeline over
/// seeded random flags and, for the per-basis form, over basis pairs.
pub fn run_compare(problem: &LoadedProblem, n: usize, seed: u64) -> Result<CompareOutput> {
    let geom = &problem.geometry;
    let oracle = geom.oracle().map_err(CliError::from_core)?;
    let randers = geom.randers();
    let flags = sample_flags(geom, n, seed).map_err(CliError::from_core)?;

    let mut k_printed = Vec::with_capacity(n);
    let mut k_corrected = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut gamma = Vec::with_capacity(n);
    let mut gamma_statement = Vec::with_capacity(n);
    let mut det_gap = Vec::with_capacity(n);

    for flag in &flags {
        let report = flag_report(geom, &oracle, flag).map_err(CliError::from_core)?;
        let k_oracle = report.k_oracle.ok_or_else(|| {
            CliError::Usage("compare requires a Berwald structure (parallel drift)".into())
        })?;
        k_printed.push(report.k_printed - k_oracle);
        k_corrected.push(report.k_corrected - k_oracle);

        let rv = oracle
            .curvature_vector(&flag.u, &flag.y, &flag.y)
            .map_err(CliError::from_core)?;
        let alpha_oracle = geom
            .metric
            .inner(geom.drift(), &rv)
            .map_err(CliError::from_core)?;
        let gamma_oracle = geom.metric.inner(&rv, &flag.u).map_err(CliError::from_core)?;
        alpha.push(report.alpha - alpha_oracle);
        gamma.push(report.gamma - gamma_oracle);
        gamma_statement.push(report.gamma_statement - gamma_oracle);

        let a = geom
            .metric
            .inner(geom.drift(), &flag.y)
            .map_err(CliError::from_core)?;
        let gyy = randers
            .fundamental_closed(&flag.y, &flag.y, &flag.y)
            .map_err(CliError::from_core)?;
        let guu = randers
            .fundamental_closed(&flag.y, &flag.u, &flag.u)
            .map_err(CliError::from_core)?;
        let gyu = randers
            .fundamental_closed(&flag.y, &flag.y, &flag.u)
            .map_err(CliError::from_core)?;
        let det = gyy * guu - gyu * gyu;
        det_gap.push((1.0 + a) * (1.0 + a) * (1.0 - a) - det);
    }

    let mut rows = vec![
        CompareRow::from_diffs("k-printed-vs-oracle", &k_printed),
        CompareRow::from_diffs("k-corrected-vs-oracle", &k_corrected),
        CompareRow::from_diffs("alpha-printed-vs-oracle", &alpha),
        CompareRow::from_diffs("gamma-printed-vs-oracle", &gamma),
        CompareRow::from_diffs("gamma-statement-vs-oracle", &gamma_statement),
        CompareRow::from_diffs("denominator-printed-vs-expansion", &det_gap),
    ];

    // Bi-invariant fast path, when its hypotheses hold on this fixture.
    let bi_applicable = geom.metric.bi_invariance_defect(&geom.algebra)
        <= geom.tolerances.predicate
        && (geom.metric.phi() - nalgebra::DMatrix::identity(geom.dim(), geom.dim())).amax()
            <= geom.tolerances.predicate;
    if bi_applicable {
        let mut bi_printed = Vec::with_capacity(n);
        let mut bi_corrected = Vec::with_capacity(n);
        for flag in &flags {
            let report = flag_report(geom, &oracle, flag).map_err(CliError::from_core)?;
            let k_oracle = report.k_oracle.expect("checked above");
            let (printed, corrected) =
                flag_curvature_biinvariant(geom, &oracle, flag).map_err(CliError::from_core)?;
            bi_printed.push(printed - k_oracle);
            bi_corrected.push(corrected - k_oracle);
        }
        rows.push(CompareRow::from_diffs("biinvariant-printed-vs-oracle", &bi_printed));
        rows.push(CompareRow::from_diffs(
            "biinvariant-corrected-vs-oracle",
            &bi_corrected,
        ));
    } else {
        rows.push(CompareRow::not_applicable("biinvariant-printed-vs-oracle"));
        rows.push(CompareRow::not_applicable("biinvariant-corrected-vs-oracle"));
    }

    // Per-basis-pair closed form (Lie group case only).
    if geom.split.is_none() {
        let std_basis: Vec<DVector<f64>> = (0..geom.dim())
            .map(|i| geom.algebra.basis_vector(i))
            .collect();
        let basis = geom
            .metric
            .gram_schmidt(InnerForm::Metric, &std_basis, geom.tolerances.gram_schmidt_rel)
            .map_err(CliError::from_core)?;
        let mut b_printed = Vec::new();
        let mut b_corrected = Vec::new();
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let (printed, corrected) =
                    basis_flag_curvature(geom, i, j, &basis).map_err(CliError::from_core)?;
                let flag = Flag {
                    y: basis[i].clone(),
                    u: basis[j].clone(),
                };
                let report = flag_report(geom, &oracle, &flag).map_err(CliError::from_core)?;
                let k_oracle = report.k_oracle.ok_or_else(|| {
                    CliError::Usage("compare requires a Berwald structure (parallel drift)".into())
                })?;
                b_printed.push(printed - k_oracle);
                b_corrected.push(corrected - k_oracle);
            }
        }
        rows.push(CompareRow::from_diffs("basis-printed-vs-oracle", &b_printed));
        rows.push(CompareRow::from_diffs("basis-corrected-vs-oracle", &b_corrected));
    } else {
        rows.push(CompareRow::not_applicable("basis-printed-vs-oracle"));
        rows.push(CompareRow::not_applicable("basis-corrected-vs-oracle"));
    }

    Ok(CompareOutput { rows })
}

/// Extra diagnostics surfaced by `check berwald` in table mode.
pub fn drift_diagnostics(problem: &LoadedProblem) -> Result<(DVector<f64>, f64, f64)> {
    let geom = &problem.geometry;
    let oracle = geom.oracle().map_err(CliError::from_core)?;
    let beta = beta_form(geom, &oracle).map_err(CliError::from_core)?;
    let closed = closedness_defect(geom).map_err(CliError::from_core)?;
    let killing =
        killing_defect(geom.drift(), &geom.algebra, &geom.metric).map_err(CliError::from_core)?;
    Ok((beta, closed, killing))
}
