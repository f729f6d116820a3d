use serde::Serialize;

/// Central tolerance configuration.
///
/// Every judged quantity in the crate is compared against one of these
/// thresholds; reports carry the tolerance they were judged with so that
/// results are reproducible from the output alone.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Structural identities: tensor symmetries, connection compatibility,
    /// orthonormality of constructed flags.
    pub structural: f64,
    /// Closed-form formula vs. first-principles oracle comparisons.
    pub formula: f64,
    /// Finite-difference vs. analytic agreement.
    pub fd: f64,
    /// Jacobi identity residual accepted at load time.
    pub jacobi: f64,
    /// Relative singular-value cutoff for rank decisions
    /// (threshold = rank_rel * max(largest singular value, 1)).
    pub rank_rel: f64,
    /// Classification predicates (Berwald, Killing, Yasuda-Shimada bullets).
    pub predicate: f64,
    /// Spread accepted by the constant-curvature probe.
    pub probe_constancy: f64,
    /// Relative residual below which Gram-Schmidt declares dependence.
    pub gram_schmidt_rel: f64,
    /// Smallest eigenvalue accepted as positive definite.
    pub spd_min_eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structural: 1e-12,
            formula: 1e-10,
            fd: 1e-6,
            jacobi: 1e-10,
            rank_rel: 1e-9,
            predicate: 1e-9,
            probe_constancy: 1e-8,
            gram_schmidt_rel: 1e-12,
            spd_min_eig: 1e-10,
        }
    }
}
