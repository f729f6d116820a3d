//! The bi-invariant reference inner product g0, the positive-definite
//! endomorphism phi, and the left-invariant inner product <x,y> = <phi x, y>_0.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{LieAlgebra, ReductiveSplit};
use crate::error::{Error, Result};
use crate::linalg;

/// Which bilinear form an operation should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerForm {
    /// The reference product `<.,.>_0`.
    Reference,
    /// The invariant metric `<.,.> = <phi ., .>_0`.
    Metric,
}

#[derive(Debug, Clone)]
pub struct MetricStructure {
    g0: DMatrix<f64>,
    phi: DMatrix<f64>,
    phi_inv: DMatrix<f64>,
    /// Matrix of `<.,.>`; equals g0 * phi and is symmetric positive definite.
    inner: DMatrix<f64>,
}

impl MetricStructure {
    /// From the reference product and the endomorphism phi.
    pub fn new(g0: DMatrix<f64>, phi: DMatrix<f64>, spd_min_eig: f64) -> Result<Self> {
        let dim = g0.nrows();
        if g0.ncols() != dim || phi.nrows() != dim || phi.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: phi.nrows().max(g0.ncols()),
            });
        }
        let g0_sym = linalg::symmetry_defect(&g0);
        if g0_sym > 1e-12 {
            return Err(Error::validation("g0_symmetry_defect", g0_sym, 1e-12));
        }
        let g0_min = linalg::min_symmetric_eigenvalue(&g0);
        if g0_min <= spd_min_eig {
            return Err(Error::validation("g0_min_eigenvalue", g0_min, spd_min_eig));
        }
        let inner = &g0 * &phi;
        // phi is g0-self-adjoint exactly when g0*phi is symmetric.
        let selfadj = linalg::symmetry_defect(&inner);
        if selfadj > 1e-10 {
            return Err(Error::validation("phi_self_adjointness_defect", selfadj, 1e-10));
        }
        let inner_min = linalg::min_symmetric_eigenvalue(&inner);
        if inner_min <= spd_min_eig {
            return Err(Error::validation("phi_min_eigenvalue", inner_min, spd_min_eig));
        }
        let phi_inv = phi
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("phi is numerically singular".into()))?;
        Ok(MetricStructure {
            g0,
            phi,
            phi_inv,
            inner,
        })
    }

    /// From the reference product and the matrix of `<.,.>` directly;
    /// phi is recovered as g0^{-1} composed with the metric.
    pub fn from_inner(g0: DMatrix<f64>, inner: DMatrix<f64>, spd_min_eig: f64) -> Result<Self> {
        let dim = g0.nrows();
        if inner.nrows() != dim || inner.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: inner.nrows() });
        }
        let g0_inv = g0
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("g0 is numerically singular".into()))?;
        let phi = g0_inv * &inner;
        Self::new(g0, phi, spd_min_eig)
    }

    /// Identity g0 and phi (the bi-invariant normalization used by most
    /// fixtures).
    pub fn identity(dim: usize) -> Self {
        MetricStructure {
            g0: DMatrix::identity(dim, dim),
            phi: DMatrix::identity(dim, dim),
            phi_inv: DMatrix::identity(dim, dim),
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.g0.nrows()
    }

    pub fn g0(&self) -> &DMatrix<f64> {
        &self.g0
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn phi_inv(&self) -> &DMatrix<f64> {
        &self.phi_inv
    }

    pub fn inner_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `<a, b>_0`
    pub fn inner0(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok((&self.g0 * b).dot(a))
    }

    /// `<a, b> = <phi a, b>_0`
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        Ok((&self.inner * b).dot(a))
    }

    pub fn form(&self, which: InnerForm, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        match which {
            InnerForm::Reference => self.inner0(a, b),
            InnerForm::Metric => self.inner(a, b),
        }
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        (&self.inner * a).dot(a).max(0.0).sqrt()
    }

    pub fn norm0(&self, a: &DVector<f64>) -> f64 {
        (&self.g0 * a).dot(a).max(0.0).sqrt()
    }

    /// Infinitesimal bi-invariance criterion for g0:
    /// max over basis triples of |<[x,y],z>_0 + <y,[x,z]>_0|.
    pub fn bi_invariance_defect(&self, alg: &LieAlgebra) -> f64 {
        let dim = self.dim();
        let mut defect = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let g0_b_ij = &self.g0 * alg.bracket_basis(i, j);
                for k in 0..dim {
                    let b_ik = alg.bracket_basis(i, k);
                    let term = g0_b_ij[k] + (self.g0.row(j) * &b_ik)[0];
                    defect = defect.max(term.abs());
                }
            }
        }
        defect
    }

    /// Infinitesimal Ad(H)-invariance of `<.,.>`:
    /// max over w in the h-basis and basis pairs of |<[w,x],y> + <x,[w,y]>|.
    pub fn ad_invariance_defect_h(&self, alg: &LieAlgebra, split: &ReductiveSplit) -> Result<f64> {
        let dim = self.dim();
        let mut defect = 0.0f64;
        for w in split.h_basis() {
            let ad = alg.ad_matrix(w)?;
            // <ad x, y> + <x, ad y> over all basis pairs = inner*ad + ad^T*inner
            let m = &self.inner * &ad + ad.transpose() * &self.inner;
            for i in 0..dim {
                for j in 0..dim {
                    defect = defect.max(m[(i, j)].abs());
                }
            }
        }
        Ok(defect)
    }

    /// How far phi is from the identity on the subalgebra h.
    pub fn phi_identity_on_h_defect(&self, split: &ReductiveSplit) -> f64 {
        let mut defect = 0.0f64;
        for h in split.h_basis() {
            let diff = &self.phi * h - h;
            defect = defect.max(diff.amax());
        }
        defect
    }

    /// Modified Gram-Schmidt with respect to the selected form.
    pub fn gram_schmidt(
        &self,
        which: InnerForm,
        vectors: &[DVector<f64>],
        rel_tol: f64,
    ) -> Result<Vec<DVector<f64>>> {
        for v in vectors {
            self.check_dim(v)?;
        }
        let form = |a: &DVector<f64>, b: &DVector<f64>| match which {
            InnerForm::Reference => (&self.g0 * b).dot(a),
            InnerForm::Metric => (&self.inner * b).dot(a),
        };
        linalg::gram_schmidt_with(form, vectors, rel_tol)
    }
}
