//! Output rendering. Table and JSON modes carry identical numbers; JSON is
//! one record per line with stable field names, suitable for diffing across
//! runs.

use serde::Serialize;

use crate::commands::{
    CheckOutput, CompareOutput, FlagOutput, RunHeader, ScanOutput, ValidateOutput,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
}

fn json_line<T: Serialize>(value: &T, out: &mut String) {
    out.push_str(&serde_json::to_string(value).expect("serializable record"));
    out.push('\n');
}

fn table_header(header: &RunHeader, out: &mut String) {
    out.push_str(&format!(
        "# randers {} — {} ({})\n# tool {} | tolerances: structural {:.0e}, formula {:.0e}, predicate {:.0e}\n",
        header.command,
        header.input,
        header.input_digest,
        header.tool_version,
        header.tolerances.structural,
        header.tolerances.formula,
        header.tolerances.predicate,
    ));
}

fn fmt_value(v: f64) -> String {
    format!("{v:+.12e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_value(v),
        None => "n/a".to_string(),
    }
}

fn vector_line(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    parts.join(",")
}

pub fn render_validate(header: &RunHeader, output: &ValidateOutput, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            json_line(header, &mut out);
            for row in &output.rows {
                json_line(row, &mut out);
            }
            json_line(
                &serde_json::json!({
                    "record": "validate-summary",
                    "name": output.name,
                    "dim": output.dim,
                    "has_split": output.has_split,
                    "is_berwald": output.is_berwald,
                    "all_pass": output.all_pass,
                }),
                &mut out,
            );
        }
        Format::Table => {
            table_header(header, &mut out);
            out.push_str(&format!(
                "problem {} (dim {}{})\n",
                output.name,
                output.dim,
                if output.has_split { ", reductive split" } else { "" }
            ));
            for row in &output.rows {
                let judged = match (row.tol, row.pass) {
                    (Some(tol), Some(pass)) => {
                        format!("  [tol {tol:.1e}] {}", if pass { "ok" } else { "FAIL" })
                    }
                    _ => String::new(),
                };
                out.push_str(&format!("  {:<28} {}{}\n", row.name, fmt_value(row.value), judged));
            }
            out.push_str(&format!(
                "berwald: {}\nresult: {}\n",
                output.is_berwald,
                if output.all_pass { "valid" } else { "INVALID" }
            ));
        }
    }
    out
}

pub fn render_flag(header: &RunHeader, output: &FlagOutput, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            json_line(header, &mut out);
            json_line(output, &mut out);
        }
        Format::Table => {
            table_header(header, &mut out);
            out.push_str(&format!("flag Y = [{}]\n", vector_line(&output.y)));
            out.push_str(&format!("     U = [{}]\n", vector_line(&output.u)));
            let r = &output.report;
            out.push_str(&format!("  {:<18} {}\n", "k_oracle", fmt_opt(r.k_oracle)));
            out.push_str(&format!("  {:<18} {}\n", "k_printed", fmt_value(r.k_printed)));
            out.push_str(&format!("  {:<18} {}\n", "k_corrected", fmt_value(r.k_corrected)));
            out.push_str(&format!("  {:<18} {}\n", "theta", fmt_value(r.theta)));
            out.push_str(&format!("  {:<18} {}\n", "alpha", fmt_value(r.alpha)));
            out.push_str(&format!("  {:<18} {}\n", "gamma", fmt_value(r.gamma)));
            out.push_str(&format!(
                "  {:<18} {}\n",
                "gamma_statement",
                fmt_value(r.gamma_statement)
            ));
            out.push_str(&format!("  {:<18} {}\n", "discrepancy", fmt_opt(r.discrepancy)));
            out.push_str(&format!("  {:<18} {}\n", "is_berwald", r.is_berwald));
            if !r.is_berwald {
                out.push_str("  note: drift is not parallel; oracle value unavailable\n");
            }
        }
    }
    out
}

pub fn render_scan(header: &RunHeader, output: &ScanOutput, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            json_line(header, &mut out);
            json_line(output, &mut out);
        }
        Format::Table => {
            table_header(header, &mut out);
            let s = &output.stats;
            out.push_str(&format!(
                "scan n={} seed={}\n  min  {}\n  max  {}\n  mean {}\n  worst printed-vs-oracle discrepancy {}\n",
                s.n,
                s.seed,
                fmt_value(s.min),
                fmt_value(s.max),
                fmt_value(s.mean),
                fmt_value(s.worst_discrepancy),
            ));
            out.push_str(&format!(
                "  histogram: {} bins from {} width {}\n  counts: {}\n",
                s.histogram.counts.len(),
                fmt_value(s.histogram.lo),
                fmt_value(s.histogram.width),
                s.histogram
                    .counts
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ));
        }
    }
    out
}

pub fn render_check(header: &RunHeader, output: &CheckOutput, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            json_line(header, &mut out);
            json_line(output, &mut out);
        }
        Format::Table => {
            table_header(header, &mut out);
            match output {
                CheckOutput::Berwald { report, .. } => {
                    out.push_str(&format!(
                        "  {:<30} {}\n",
                        "parallel_defect",
                        fmt_value(report.parallel_defect)
                    ));
                    out.push_str(&format!("  {:<30} {}\n", "skew_defect", fmt_value(report.skew_defect)));
                    out.push_str(&format!(
                        "  {:<30} {}\n",
                        "derived_orthogonality_defect",
                        fmt_value(report.derived_orthogonality_defect)
                    ));
                    out.push_str(&format!("  {:<30} {}\n", "non_riemannian", report.non_riemannian));
                    out.push_str(&format!("  {:<30} {}\n", "implications_hold", report.implications_hold));
                    out.push_str(&format!("is_berwald: {}\n", report.is_berwald));
                }
                CheckOutput::Perfect(p) => {
                    out.push_str(&format!("  derived rank {} of dim {}\n", p.derived_rank, p.dim));
                    out.push_str(&format!("  parallel_space_dim {}\n", p.parallel_space_dim));
                    out.push_str(&format!("is_perfect: {}\n", p.is_perfect));
                }
                CheckOutput::Ys { report, .. } => {
                    let case = format!("{:?}", report.case_label).to_lowercase();
                    out.push_str(&format!("case: {case}\n"));
                    if let Some(k) = report.k {
                        out.push_str(&format!("  K = {}\n", fmt_value(k)));
                    }
                    out.push_str(&format!("  beta = [{}]\n", vector_line(&report.beta_components)));
                    for bullet in &report.bullets {
                        out.push_str(&format!(
                            "  bullet {:<28} defect {} [tol {:.1e}] {}\n",
                            bullet.name,
                            fmt_value(bullet.defect),
                            bullet.tol,
                            if bullet.pass { "ok" } else { "FAIL" }
                        ));
                    }
                    if let Some(sigma) = report.sigma {
                        out.push_str(&format!("  sigma = {}\n", fmt_value(sigma)));
                    }
                    if let Some(first) = &report.first_failing_bullet {
                        out.push_str(&format!("  first failing bullet: {first}\n"));
                    }
                    out.push_str(&format!(
                        "verdict: {}\n",
                        if report.verdict { "PASS" } else { "FAIL" }
                    ));
                }
                CheckOutput::Milnor { x, report, .. } => {
                    out.push_str(&format!("  x = [{}]\n", vector_line(x)));
                    out.push_str(&format!("  image_dim {}\n", report.image_dim));
                    out.push_str(&format!(
                        "  min sampled sectional {}\n",
                        fmt_value(report.min_sampled_sectional)
                    ));
                    out.push_str(&format!(
                        "  equality-set max {}\n",
                        fmt_value(report.equality_set_max)
                    ));
                    out.push_str(&format!("  image min {}\n", fmt_opt(report.image_min)));
                    out.push_str(&format!(
                        "verdict: {}\n",
                        if report.verdict { "PASS" } else { "FAIL" }
                    ));
                }
            }
        }
    }
    out
}

pub fn render_compare(header: &RunHeader, output: &CompareOutput, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            json_line(header, &mut out);
            for row in &output.rows {
                json_line(row, &mut out);
            }
        }
        Format::Table => {
            table_header(header, &mut out);
            out.push_str(&format!(
                "  {:<36} {:>7}  {:<22} {:<22}\n",
                "formula", "samples", "max |diff|", "mean |diff|"
            ));
            for row in &output.rows {
                if row.applicable {
                    out.push_str(&format!(
                        "  {:<36} {:>7}  {:<22} {:<22}\n",
                        row.formula,
                        row.samples,
                        fmt_value(row.max_abs),
                        fmt_value(row.mean_abs)
                    ));
                } else {
                    out.push_str(&format!(
                        "  {:<36} {:>7}  n/a (hypotheses not met)\n",
                        row.formula, "-"
                    ));
                }
            }
        }
    }
    out
}
