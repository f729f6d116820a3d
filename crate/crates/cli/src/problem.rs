//! Problem-file schema and resolution.
//!
//! A problem file is UTF-8 JSON holding a Lie algebra (sparse bracket
//! entries with i < j; the loader antisymmetrizes), the reference product
//! `g0`, either `phi` or the metric matrix of `<.,.>` (at most one), a drift
//! vector, and an optional subalgebra spanning h for the reductive case.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use randers_core::algebra::{LieAlgebra, ReductiveSplit};
use randers_core::{Geometry, MetricStructure, Tolerances};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    pub g0: MatrixSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
    pub drift: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subalgebra: Option<Vec<usize>>,
}

/// A parsed and fully validated problem.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub name: String,
    pub source: ProblemFile,
    pub geometry: Geometry,
}

fn matrix_from_spec(spec: &MatrixSpec, dim: usize, what: &str) -> Result<DMatrix<f64>> {
    match spec {
        MatrixSpec::Named(name) if name == "identity" => Ok(DMatrix::identity(dim, dim)),
        MatrixSpec::Named(other) => Err(CliError::Input(format!(
            "{what}: unknown matrix name {other:?} (only \"identity\" is recognized)"
        ))),
        MatrixSpec::Matrix(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::Input(format!(
                    "{what}: expected a {dim}x{dim} matrix"
                )));
            }
            Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
        }
    }
}

fn rows_matrix(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Input(format!("{what}: expected a {dim}x{dim} matrix")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

pub fn parse(json: &str) -> Result<ProblemFile> {
    serde_json::from_str(json).map_err(|e| CliError::Parse(e.to_string()))
}

/// Builds and cross-validates the resolved structures, naming the first
/// failed invariant.
pub fn resolve(file: &ProblemFile) -> Result<Geometry> {
    let tolerances = Tolerances::default();
    let dim = file.dim;
    if dim == 0 {
        return Err(CliError::Input("dim must be positive".into()));
    }
    let entries: Vec<randers_core::algebra::SparseBracket> = file
        .brackets
        .iter()
        .map(|b| (b.i, b.j, b.terms.clone()))
        .collect();
    let algebra = LieAlgebra::from_bracket_entries(dim, &entries, file.basis.clone())
        .map_err(CliError::input_from_core)?;

    let g0 = matrix_from_spec(&file.g0, dim, "g0")?;
    if file.phi.is_some() && file.metric.is_some() {
        return Err(CliError::Input(
            "phi and metric are mutually exclusive; supply at most one".into(),
        ));
    }
    let metric = if let Some(inner) = &file.metric {
        let inner = rows_matrix(inner, dim, "metric")?;
        MetricStructure::from_inner(g0, inner, tolerances.spd_min_eig)
            .map_err(CliError::input_from_core)?
    } else {
        let phi = match &file.phi {
            Some(spec) => matrix_from_spec(spec, dim, "phi")?,
            None => DMatrix::identity(dim, dim),
        };
        MetricStructure::new(g0, phi, tolerances.spd_min_eig).map_err(CliError::input_from_core)?
    };

    let split = match &file.subalgebra {
        Some(indices) => Some(
            ReductiveSplit::from_subalgebra_indices(&algebra, metric.g0(), indices)
                .map_err(CliError::input_from_core)?,
        ),
        None => None,
    };

    if file.drift.len() != dim {
        return Err(CliError::Input(format!(
            "drift: expected {dim} components, got {}",
            file.drift.len()
        )));
    }
    let drift = DVector::from_vec(file.drift.clone());

    Geometry::new(algebra, metric, split, drift, tolerances).map_err(CliError::input_from_core)
}

pub fn load_str(json: &str) -> Result<LoadedProblem> {
    let source = parse(json)?;
    let geometry = resolve(&source)?;
    Ok(LoadedProblem {
        name: source.name.clone(),
        source,
        geometry,
    })
}

pub fn load_path(path: &std::path::Path) -> Result<(LoadedProblem, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| CliError::Parse(format!("{}: not UTF-8: {e}", path.display())))?;
    let problem = load_str(text)?;
    Ok((problem, bytes))
}

/// Re-emits the resolved structures as a problem file. Loading the result
/// reproduces the same resolved matrices bit for bit.
pub fn to_canonical(problem: &LoadedProblem) -> ProblemFile {
    let geom = &problem.geometry;
    let dim = geom.dim();
    let mut brackets = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let terms: Vec<(usize, f64)> = (0..dim)
                .filter_map(|k| {
                    let c = geom.algebra.c(i, j, k);
                    (c != 0.0).then_some((k, c))
                })
                .collect();
            if !terms.is_empty() {
                brackets.push(BracketEntry { i, j, terms });
            }
        }
    }
    let matrix_rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..dim)
            .map(|i| (0..dim).map(|j| m[(i, j)]).collect())
            .collect()
    };
    let as_spec = |m: &DMatrix<f64>| -> MatrixSpec {
        if *m == DMatrix::identity(dim, dim) {
            MatrixSpec::Named("identity".to_string())
        } else {
            MatrixSpec::Matrix(matrix_rows(m))
        }
    };
    ProblemFile {
        name: problem.name.clone(),
        dim,
        basis: geom.algebra.basis_names().map(|n| n.to_vec()),
        brackets,
        g0: as_spec(geom.metric.g0()),
        phi: Some(as_spec(geom.metric.phi())),
        metric: None,
        drift: geom.drift().iter().copied().collect(),
        subalgebra: problem.source.subalgebra.clone(),
    }
}
