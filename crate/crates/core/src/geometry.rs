//! A fully resolved problem: algebra, metric, optional reductive split and
//! drift vector, cross-validated at construction.

use nalgebra::DVector;

use crate::algebra::{LieAlgebra, ReductiveSplit};
use crate::curvature::CurvatureOracle;
use crate::error::{Error, Result};
use crate::metric::MetricStructure;
use crate::par::Parallelism;
use crate::randers::RandersStructure;
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct Geometry {
    pub algebra: LieAlgebra,
    pub metric: MetricStructure,
    pub split: Option<ReductiveSplit>,
    drift: DVector<f64>,
    pub tolerances: Tolerances,
}

impl Geometry {
    pub fn new(
        algebra: LieAlgebra,
        metric: MetricStructure,
        split: Option<ReductiveSplit>,
        drift: DVector<f64>,
        tolerances: Tolerances,
    ) -> Result<Self> {
        let dim = algebra.dim();
        if metric.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: metric.dim() });
        }
        if drift.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: drift.len() });
        }
        algebra.ensure_valid(tolerances.jacobi)?;

        if let Some(split) = &split {
            let report = split.check(&algebra, metric.g0())?;
            if report.subalgebra_defect > tolerances.jacobi {
                return Err(Error::validation(
                    "subalgebra_defect",
                    report.subalgebra_defect,
                    tolerances.jacobi,
                ));
            }
            if report.reductivity_defect > tolerances.jacobi {
                return Err(Error::validation(
                    "reductivity_defect",
                    report.reductivity_defect,
                    tolerances.jacobi,
                ));
            }
            let phi_h = metric.phi_identity_on_h_defect(split);
            if phi_h > tolerances.structural.max(1e-10) {
                return Err(Error::validation(
                    "phi_identity_on_h_defect",
                    phi_h,
                    tolerances.structural.max(1e-10),
                ));
            }
            // The drift must define an invariant field on G/H: it lies in m
            // and is fixed infinitesimally by h.
            let off_m = (&drift - split.project_m(&drift)?).amax();
            if off_m > tolerances.structural.max(1e-10) {
                return Err(Error::validation(
                    "drift_outside_m_defect",
                    off_m,
                    tolerances.structural.max(1e-10),
                ));
            }
            let mut inv_defect = 0.0f64;
            for h in split.h_basis() {
                inv_defect = inv_defect.max(algebra.bracket(h, &drift)?.amax());
            }
            if inv_defect > tolerances.structural.max(1e-10) {
                return Err(Error::validation(
                    "drift_isotropy_invariance_defect",
                    inv_defect,
                    tolerances.structural.max(1e-10),
                ));
            }
        }

        // Strong convexity check happens in the RandersStructure constructor.
        RandersStructure::new(&metric, drift.clone())?;

        Ok(Geometry {
            algebra,
            metric,
            split,
            drift,
            tolerances,
        })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    /// View of the Randers structure over this geometry's metric.
    pub fn randers(&self) -> RandersStructure<'_> {
        RandersStructure::new(&self.metric, self.drift.clone())
            .expect("drift validated at construction")
    }

    /// First-principles curvature machine: Koszul route for a Lie group,
    /// Nomizu route when a reductive split is attached.
    pub fn oracle(&self) -> Result<CurvatureOracle<'_>> {
        self.oracle_with(Parallelism::Auto)
    }

    pub fn oracle_with(&self, mode: Parallelism) -> Result<CurvatureOracle<'_>> {
        match &self.split {
            Some(split) => CurvatureOracle::homogeneous_with(&self.algebra, &self.metric, split, mode),
            None => CurvatureOracle::lie_group_with(&self.algebra, &self.metric, mode),
        }
    }
}
