//! Classification predicates: Berwald type, perfect algebras, Killing and
//! closedness defects of the drift 1-form, the Yasuda-Shimada condition
//! reports, and the nonnegativity test for sectional curvature along a
//! skew-adjoint direction.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::LieAlgebra;
use crate::curvature::CurvatureOracle;
use crate::error::{Error, Result};
use crate::flag::{flag_report, sample_flags, scan_flags};
use crate::geometry::Geometry;
use crate::metric::MetricStructure;
use crate::par::Parallelism;

/// Drift classification: is the invariant field parallel, and do the two
/// consequences of parallelism (skew-adjoint ad, orthogonality to the derived
/// subalgebra) hold.
#[derive(Debug, Clone, Serialize)]
pub struct BerwaldReport {
    pub parallel_defect: f64,
    pub skew_defect: f64,
    pub derived_orthogonality_defect: f64,
    pub non_riemannian: bool,
    pub is_berwald: bool,
    /// parallel implies skew-adjoint and derived-orthogonal; false only on a
    /// counterexample to the imported lemma.
    pub implications_hold: bool,
    pub tol: f64,
}

/// max over basis pairs of `|<[x,u],v> + <u,[x,v]>|`; zero exactly when the
/// flow of the invariant field of `x` is isometric.
pub fn killing_defect(x: &DVector<f64>, alg: &LieAlgebra, metric: &MetricStructure) -> Result<f64> {
    let ad = alg.ad_matrix(x)?;
    let m = metric.inner_matrix() * &ad + ad.transpose() * metric.inner_matrix();
    Ok(m.amax())
}

/// max over basis pairs of `|<X, [e_i, e_j]>|`; the exterior derivative of
/// the drift 1-form reduces to `db(u,v) = -<X,[u,v]>` on invariant fields.
pub fn closedness_defect(geom: &Geometry) -> Result<f64> {
    closedness_defect_of(geom.drift(), geom)
}

pub fn closedness_defect_of(x: &DVector<f64>, geom: &Geometry) -> Result<f64> {
    let basis: Vec<DVector<f64>> = match &geom.split {
        Some(split) => split.m_basis().to_vec(),
        None => (0..geom.dim()).map(|i| geom.algebra.basis_vector(i)).collect(),
    };
    let mut defect = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for b in basis.iter().skip(i + 1) {
            let br = geom.algebra.bracket(a, b)?;
            defect = defect.max(geom.metric.inner(x, &br)?.abs());
        }
    }
    Ok(defect)
}

pub fn berwald_report(geom: &Geometry, oracle: &CurvatureOracle<'_>) -> Result<BerwaldReport> {
    let tol = geom.tolerances.predicate;
    let x = geom.drift();
    let parallel_defect = oracle.parallel_defect(x)?;
    let skew_defect = killing_defect(x, &geom.algebra, &geom.metric)?;
    let derived_orthogonality_defect = closedness_defect(geom)?;
    let is_berwald = parallel_defect <= tol;
    let implications_hold =
        !is_berwald || (skew_defect <= tol && derived_orthogonality_defect <= tol);
    Ok(BerwaldReport {
        parallel_defect,
        skew_defect,
        derived_orthogonality_defect,
        non_riemannian: geom.randers().is_non_riemannian(1e-12),
        is_berwald,
        implications_hold,
        tol,
    })
}

/// Orthonormal basis (ambient vectors) of the space of parallel invariant
/// fields: the joint kernel of all `nabla_{f_i}`, intersected with the
/// isotropy-invariant locus when a split is attached.
pub fn parallel_space(geom: &Geometry, oracle: &CurvatureOracle<'_>) -> Result<Vec<DVector<f64>>> {
    let m = oracle.working_dim();
    let mut rows = Vec::new();
    for i in 0..m {
        rows.push(oracle.connection().map(i).clone());
    }
    if let Some(split) = &geom.split {
        // [h, v] = 0 rows, expressed on the working basis.
        for h in split.h_basis() {
            let mut block = DMatrix::zeros(m, m);
            for (c, f) in oracle.basis().iter().enumerate() {
                let br = geom.algebra.bracket(h, f)?;
                block.set_column(c, &oracle.to_coords(&br)?);
            }
            rows.push(block);
        }
    }
    let total_rows: usize = rows.len() * m;
    let mut stacked = DMatrix::zeros(total_rows, m);
    for (r, block) in rows.iter().enumerate() {
        stacked.view_mut((r * m, 0), (m, m)).copy_from(block);
    }
    let kernel = crate::linalg::null_space(&stacked, geom.tolerances.rank_rel);
    Ok(kernel.iter().map(|v| oracle.to_ambient(v)).collect())
}

/// `[g, g] = g`?
pub fn is_perfect(alg: &LieAlgebra, rank_rel: f64) -> bool {
    alg.derived_span(rank_rel).len() == alg.dim()
}

/// Components `beta_j = sum_i X^i (b_{j|i} - b_{i|j})` of the audit 1-form on
/// the working basis; identically zero for parallel or closed drifts.
pub fn beta_form(geom: &Geometry, oracle: &CurvatureOracle<'_>) -> Result<DVector<f64>> {
    let cov = oracle.drift_covariant_matrix(geom.drift())?;
    let xc = oracle.to_coords(geom.drift())?;
    let m = oracle.working_dim();
    let mut beta = DVector::zeros(m);
    for j in 0..m {
        let mut acc = 0.0;
        for i in 0..m {
            acc += xc[i] * (cov[(j, i)] - cov[(i, j)]);
        }
        beta[j] = acc;
    }
    Ok(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum YsCase {
    Positive,
    Zero,
    Negative,
}

#[derive(Debug, Clone, Serialize)]
pub struct YsBullet {
    pub name: String,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
}

impl YsBullet {
    fn holds(name: &str, defect: f64, tol: f64) -> Self {
        YsBullet {
            name: name.to_string(),
            defect,
            tol,
            pass: defect <= tol,
        }
    }

    fn exceeds(name: &str, defect: f64, tol: f64) -> Self {
        YsBullet {
            name: name.to_string(),
            defect,
            tol,
            pass: defect > tol,
        }
    }
}

/// Bullet-by-bullet evaluation of one case of the constant-flag-curvature
/// characterization. Fields not touched by a case stay `None`.
#[derive(Debug, Clone, Serialize)]
pub struct YsReport {
    pub case_label: YsCase,
    pub k: Option<f64>,
    pub beta_components: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killing_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_length_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature_identity_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closedness_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_constraint_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flatness_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_curvature_defect: Option<f64>,
    pub bullets: Vec<YsBullet>,
    pub first_failing_bullet: Option<String>,
    pub verdict: bool,
}

impl YsReport {
    fn finish(mut self) -> Self {
        self.verdict = self.bullets.iter().all(|b| b.pass);
        self.first_failing_bullet = self
            .bullets
            .iter()
            .find(|b| !b.pass)
            .map(|b| b.name.clone());
        self
    }

    fn blank(case_label: YsCase, k: Option<f64>, beta: &DVector<f64>) -> Self {
        YsReport {
            case_label,
            k,
            beta_components: beta.iter().copied().collect(),
            killing_defect: None,
            parallel_defect: None,
            constant_length_defect: None,
            curvature_identity_defect: None,
            closedness_defect: None,
            sigma: None,
            sigma_residual: None,
            sigma_constraint_defect: None,
            flatness_defect: None,
            constant_curvature_defect: None,
            bullets: Vec::new(),
            first_failing_bullet: None,
            verdict: false,
        }
    }
}

/// Lowered drift components `b_i = <X, f_i>` on the working basis.
fn lowered_drift(geom: &Geometry, oracle: &CurvatureOracle<'_>) -> Result<DVector<f64>> {
    let xc = oracle.to_coords(geom.drift())?;
    Ok(oracle.gram() * xc)
}

/// The positive case: `beta = 0` plus constant positive flag curvature `K`
/// holds iff the drift is a non-parallel Killing field of constant length
/// and the curvature tensor satisfies the displayed quadratic identity.
pub fn ys_positive_check(
    geom: &Geometry,
    oracle: &CurvatureOracle<'_>,
    k: f64,
) -> Result<YsReport> {
    if k <= 0.0 {
        return Err(Error::Usage(format!(
            "the positive case requires K > 0, got {k}"
        )));
    }
    let randers = geom.randers();
    if !randers.is_non_riemannian(1e-12) {
        return Err(Error::Usage(
            "the positive case requires a non-Riemannian structure (nonzero drift)".into(),
        ));
    }
    let tol = geom.tolerances.predicate;
    let beta = beta_form(geom, oracle)?;
    let mut report = YsReport::blank(YsCase::Positive, Some(k), &beta);

    let killing = killing_defect(geom.drift(), &geom.algebra, &geom.metric)?;
    let parallel = oracle.parallel_defect(geom.drift())?;
    // Invariant fields have constant length by construction; reported for
    // completeness.
    let constant_length = 0.0;

    let m = oracle.working_dim();
    let g = oracle.gram();
    let b = lowered_drift(geom, oracle)?;
    let cov = oracle.drift_covariant_matrix(geom.drift())?;
    let norm_b2 = geom.metric.inner(geom.drift(), geom.drift())?;
    let tensor = oracle.tensor();
    let mut identity_defect = 0.0f64;
    for h in 0..m {
        for i in 0..m {
            for j in 0..m {
                for kk in 0..m {
                    let lhs = tensor.component(h, i, j, kk);
                    let rhs = k * (1.0 - norm_b2) * (g[(h, kk)] * g[(i, j)] - g[(h, j)] * g[(i, kk)])
                        + k * (g[(i, j)] * b[h] * b[kk] - g[(i, kk)] * b[h] * b[j])
                        - k * (g[(h, j)] * b[i] * b[kk] - g[(h, kk)] * b[i] * b[j])
                        - cov[(i, j)] * cov[(h, kk)]
                        + cov[(i, kk)] * cov[(h, j)]
                        + 2.0 * cov[(h, i)] * cov[(j, kk)];
                    identity_defect = identity_defect.max((lhs - rhs).abs());
                }
            }
        }
    }

    report.killing_defect = Some(killing);
    report.parallel_defect = Some(parallel);
    report.constant_length_defect = Some(constant_length);
    report.curvature_identity_defect = Some(identity_defect);
    report.bullets = vec![
        YsBullet::holds("killing", killing, tol),
        YsBullet::exceeds("non-parallel-killing", parallel, tol),
        YsBullet::holds("constant-length", constant_length, tol),
        YsBullet::holds("curvature-identity", identity_defect, tol),
    ];
    Ok(report.finish())
}

/// The zero case: `beta = 0` plus zero flag curvature iff locally Minkowskian
/// (flat with vanishing beta at the algebra level).
pub fn ys_zero_check(geom: &Geometry, oracle: &CurvatureOracle<'_>) -> Result<YsReport> {
    let tol = geom.tolerances.predicate;
    let beta = beta_form(geom, oracle)?;
    let mut report = YsReport::blank(YsCase::Zero, None, &beta);
    let beta_max = beta.amax();
    let flatness = oracle.tensor().max_abs();
    report.flatness_defect = Some(flatness);
    report.bullets = vec![
        YsBullet::holds("beta-zero", beta_max, tol),
        YsBullet::holds("flatness", flatness, tol),
    ];
    Ok(report.finish())
}

/// The negative case: closed drift 1-form, `b_{i|k} = sigma (g_ik - b_i b_k)/2`
/// with `sigma^2 = -16K`, and constant sectional curvature `4K`.
pub fn ys_negative_check(
    geom: &Geometry,
    oracle: &CurvatureOracle<'_>,
    k: f64,
) -> Result<YsReport> {
    if k >= 0.0 {
        return Err(Error::Usage(format!(
            "the negative case requires K < 0, got {k}"
        )));
    }
    let tol = geom.tolerances.predicate;
    let beta = beta_form(geom, oracle)?;
    let mut report = YsReport::blank(YsCase::Negative, Some(k), &beta);

    let closedness = closedness_defect(geom)?;
    let m = oracle.working_dim();
    let g = oracle.gram();
    let b = lowered_drift(geom, oracle)?;
    let cov = oracle.drift_covariant_matrix(geom.drift())?;

    // Least-squares sigma for b_{i|k} = sigma * (g_ik - b_i b_k)/2 over all
    // index pairs; the model matrix is positive definite, so the normal
    // equation is never singular.
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in 0..m {
        for kk in 0..m {
            let c = 0.5 * (g[(i, kk)] - b[i] * b[kk]);
            num += cov[(i, kk)] * c;
            den += c * c;
        }
    }
    let sigma = if den > 0.0 { num / den } else { 0.0 };
    let mut sigma_residual = 0.0f64;
    for i in 0..m {
        for kk in 0..m {
            let c = 0.5 * (g[(i, kk)] - b[i] * b[kk]);
            sigma_residual = sigma_residual.max((cov[(i, kk)] - sigma * c).abs());
        }
    }
    let sigma_constraint = (sigma * sigma + 16.0 * k).abs();

    let tensor = oracle.tensor();
    let mut cc_defect = 0.0f64;
    for h in 0..m {
        for i in 0..m {
            for j in 0..m {
                for kk in 0..m {
                    let want = 4.0 * k * (g[(i, j)] * g[(h, kk)] - g[(i, kk)] * g[(h, j)]);
                    cc_defect = cc_defect.max((tensor.component(h, i, j, kk) - want).abs());
                }
            }
        }
    }

    report.closedness_defect = Some(closedness);
    report.sigma = Some(sigma);
    report.sigma_residual = Some(sigma_residual);
    report.sigma_constraint_defect = Some(sigma_constraint);
    report.constant_curvature_defect = Some(cc_defect);
    report.bullets = vec![
        YsBullet::holds("closedness", closedness, tol),
        YsBullet::holds("sigma-fit", sigma_residual, tol),
        YsBullet::holds("sigma-constraint", sigma_constraint, tol),
        YsBullet::holds("constant-negative-curvature", cc_defect, tol),
    ];
    Ok(report.finish())
}

/// Result of the sectional-nonnegativity sweep along a skew-adjoint direction.
#[derive(Debug, Clone, Serialize)]
pub struct MilnorReport {
    pub samples: usize,
    pub seed: u64,
    pub image_dim: usize,
    pub min_sampled_sectional: f64,
    /// max K over the orthogonal complement of [x, g] (should vanish)
    pub equality_set_max: f64,
    /// min K over the image directions (should be strictly positive),
    /// absent when the image is trivial
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_min: Option<f64>,
    pub nonneg_pass: bool,
    pub equality_pass: bool,
    pub verdict: bool,
    pub tol: f64,
}

/// Orthonormalize (metric inner product) a spanning set, silently skipping
/// dependent vectors.
fn orthonormal_filter(
    geom: &Geometry,
    seed_vectors: &[DVector<f64>],
    keep_against: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (geom.metric.inner_matrix() * b).dot(a);
    let scale = seed_vectors
        .iter()
        .map(|v| inner(v, v).max(0.0).sqrt())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in seed_vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in keep_against.iter().chain(out.iter()) {
                let c = inner(&w, q);
                w -= q * c;
            }
        }
        let norm = inner(&w, &w).max(0.0).sqrt();
        if norm > 1e-10 * scale {
            out.push(w / norm);
        }
    }
    Ok(out)
}

/// Sectional curvature along `x` is nonnegative when ad(x) is skew-adjoint,
/// with equality exactly on the orthogonal complement of the image `[x, g]`.
/// Samples random directions for the inequality and checks the equality set
/// deterministically on bases of the image and its complement.
pub fn milnor_nonneg_check(
    geom: &Geometry,
    oracle: &CurvatureOracle<'_>,
    x: &DVector<f64>,
    samples: usize,
    seed: u64,
) -> Result<MilnorReport> {
    let tol = geom.tolerances.predicate;
    let skew = killing_defect(x, &geom.algebra, &geom.metric)?;
    if skew > tol {
        return Err(Error::Usage(format!(
            "nonnegativity test requires ad(x) skew-adjoint (defect {skew:.3e})"
        )));
    }
    if geom.metric.norm(x) <= 1e-12 {
        return Err(Error::Degenerate("direction x must be nonzero".into()));
    }

    // Image of ad(x) on the working space.
    let mut image_raw = Vec::new();
    for f in oracle.basis() {
        let br = geom.algebra.bracket(x, f)?;
        image_raw.push(br);
    }
    let image = orthonormal_filter(geom, &image_raw, &[])?;
    let image_dim = image.len();

    // Complement of the image inside the working space.
    let complement = orthonormal_filter(geom, oracle.basis(), &image)?;

    let x_unit = x / geom.metric.norm(x);
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (geom.metric.inner_matrix() * b).dot(a);

    let mut equality_set_max = 0.0f64;
    for v in &complement {
        // Skip directions parallel to x itself (degenerate plane).
        let residual = v - &x_unit * inner(v, &x_unit);
        if inner(&residual, &residual).sqrt() <= 1e-8 {
            continue;
        }
        equality_set_max = equality_set_max.max(oracle.sectional(x, v)?.abs());
    }
    let image_min = if image.is_empty() {
        None
    } else {
        let mut min = f64::INFINITY;
        for w in &image {
            min = min.min(oracle.sectional(x, w)?);
        }
        Some(min)
    };

    let dim = geom.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sampled = f64::INFINITY;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < samples && attempts < samples * 64 {
        attempts += 1;
        let u = DVector::from_fn(dim, |_, _| rng.sample(StandardNormal));
        let u = match &geom.split {
            Some(split) => split.project_m(&u)?,
            None => u,
        };
        match oracle.sectional(x, &u) {
            Ok(kv) => {
                min_sampled = min_sampled.min(kv);
                accepted += 1;
            }
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if accepted < samples {
        return Err(Error::Numerical(
            "sectional sampling exhausted its retry budget".into(),
        ));
    }

    let nonneg_pass = min_sampled >= -tol;
    let equality_pass =
        equality_set_max <= tol && image_min.map(|v| v > tol).unwrap_or(true);
    Ok(MilnorReport {
        samples,
        seed,
        image_dim,
        min_sampled_sectional: min_sampled,
        equality_set_max,
        image_min,
        nonneg_pass,
        equality_pass,
        verdict: nonneg_pass && equality_pass,
        tol,
    })
}

/// Constant-curvature probe over a seeded flag scan.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub seed: u64,
    pub is_constant: bool,
    pub k_estimate: f64,
    pub spread: f64,
    pub min: f64,
    pub max: f64,
    pub tol: f64,
}

pub fn constant_curvature_probe(
    geom: &Geometry,
    oracle: &CurvatureOracle<'_>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ProbeReport> {
    let stats = scan_flags(geom, oracle, samples, seed, Parallelism::Auto)?;
    let spread = stats.max - stats.min;
    Ok(ProbeReport {
        samples,
        seed,
        is_constant: spread <= tol,
        k_estimate: stats.mean,
        spread,
        min: stats.min,
        max: stats.max,
        tol,
    })
}

/// Per-flag discrepancy sweep used by the audit command; returns the sampled
/// flags' reports in sample order.
pub fn audit_flags(
    geom: &Geometry,
    oracle: &CurvatureOracle<'_>,
    n: usize,
    seed: u64,
    mode: Parallelism,
) -> Result<Vec<crate::flag::FlagReport>> {
    let flags = sample_flags(geom, n, seed)?;
    let reports = crate::par::map_ordered(mode, &flags, |f| flag_report(geom, oracle, f));
    reports.into_iter().collect()
}
