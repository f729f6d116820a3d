//! Finite-dimensional real Lie algebras given by structure constants, and
//! reductive decompositions g = m (+) h.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// A Lie algebra described by its structure constants:
/// `[e_i, e_j] = sum_k c[i][j][k] e_k`.
///
/// The table is stored in full (both i<j and i>j) and is exactly
/// antisymmetric by construction.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    // flattened [i][j][k]
    structure: Vec<f64>,
    basis_names: Option<Vec<String>>,
}

/// Sparse bracket entry `(i, j, [(k, coefficient), ...])` with i < j.
pub type SparseBracket = (usize, usize, Vec<(usize, f64)>);

/// Residuals of the two defining identities of a structure-constant table.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub antisymmetry_defect: f64,
    pub jacobi_defect: f64,
}

impl AlgebraReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.antisymmetry_defect <= tol && self.jacobi_defect <= tol
    }
}

#[inline]
fn idx(dim: usize, i: usize, j: usize, k: usize) -> usize {
    (i * dim + j) * dim + k
}

/// Defect report for a raw structure table (flattened `[i][j][k]`), usable on
/// tables that were never antisymmetrized.
pub fn validate_table(dim: usize, table: &[f64]) -> AlgebraReport {
    let mut anti = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                anti = anti.max((table[idx(dim, i, j, k)] + table[idx(dim, j, i, k)]).abs());
            }
        }
    }
    let bracket_basis = |i: usize, j: usize| -> Vec<f64> {
        (0..dim).map(|k| table[idx(dim, i, j, k)]).collect()
    };
    let mut jacobi = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                // [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
                let mut acc = vec![0.0f64; dim];
                for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                    let inner = bracket_basis(b, c);
                    for (m, w) in inner.iter().enumerate() {
                        if *w != 0.0 {
                            for (l, slot) in acc.iter_mut().enumerate() {
                                *slot += w * table[idx(dim, a, m, l)];
                            }
                        }
                    }
                }
                for v in acc {
                    jacobi = jacobi.max(v.abs());
                }
            }
        }
    }
    AlgebraReport {
        antisymmetry_defect: anti,
        jacobi_defect: jacobi,
    }
}

impl LieAlgebra {
    /// Builds from sparse bracket entries `(i, j, [(k, coeff)...])` with
    /// i < j; the table is antisymmetrized so `c[j][i][k] = -c[i][j][k]`
    /// holds exactly.
    pub fn from_bracket_entries(
        dim: usize,
        entries: &[SparseBracket],
        basis_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("Lie algebra dimension must be positive".into()));
        }
        let mut structure = vec![0.0f64; dim * dim * dim];
        for (i, j, terms) in entries {
            if *i >= *j {
                return Err(Error::Usage(format!(
                    "bracket entry requires i < j, got ({i}, {j})"
                )));
            }
            if *j >= dim {
                return Err(Error::DimensionMismatch { expected: dim, got: *j + 1 });
            }
            for (k, coeff) in terms {
                if *k >= dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: *k + 1 });
                }
                structure[idx(dim, *i, *j, *k)] += coeff;
                structure[idx(dim, *j, *i, *k)] -= coeff;
            }
        }
        Self::from_structure_table(dim, structure, basis_names)
    }

    /// Builds from a full flattened table; antisymmetry must hold exactly.
    pub fn from_structure_table(
        dim: usize,
        structure: Vec<f64>,
        basis_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Usage("Lie algebra dimension must be positive".into()));
        }
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        if let Some(names) = &basis_names {
            if names.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: names.len() });
            }
        }
        let report = validate_table(dim, &structure);
        if report.antisymmetry_defect != 0.0 {
            return Err(Error::validation(
                "antisymmetry_defect",
                report.antisymmetry_defect,
                0.0,
            ));
        }
        Ok(LieAlgebra {
            dim,
            structure,
            basis_names,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_names(&self) -> Option<&[String]> {
        self.basis_names.as_deref()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[idx(self.dim, i, j, k)]
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    /// `[e_i, e_j]` as a vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| self.c(i, j, k))
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Bilinear extension of the structure constants.
    pub fn bracket(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            let ai = a[i];
            if ai == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                let w = ai * b[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    out[k] += w * self.c(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad(x): v -> [x, v]` in the chosen basis.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.bracket(x, &self.basis_vector(j))?;
            m.set_column(j, &col);
        }
        Ok(m)
    }

    /// Euclidean-orthonormal basis of the derived subalgebra `[g, g]`,
    /// computed as the column span of all pairwise basis brackets.
    pub fn derived_span(&self, rank_rel: f64) -> Vec<DVector<f64>> {
        let pairs: Vec<(usize, usize)> = (0..self.dim)
            .flat_map(|i| ((i + 1)..self.dim).map(move |j| (i, j)))
            .collect();
        if pairs.is_empty() {
            return Vec::new();
        }
        let mut m = DMatrix::zeros(self.dim, pairs.len());
        for (col, (i, j)) in pairs.iter().enumerate() {
            m.set_column(col, &self.bracket_basis(*i, *j));
        }
        linalg::column_span(&m, rank_rel).1
    }

    /// Antisymmetry and Jacobi residuals of the stored table.
    pub fn validate(&self) -> AlgebraReport {
        validate_table(self.dim, &self.structure)
    }

    /// Errors unless the Jacobi residual is within `tol` (antisymmetry is
    /// exact by construction).
    pub fn ensure_valid(&self, tol: f64) -> Result<()> {
        let report = self.validate();
        if report.jacobi_defect > tol {
            return Err(Error::validation("jacobi_defect", report.jacobi_defect, tol));
        }
        Ok(())
    }
}

/// Reductive decomposition g = m (+) h with m the g0-orthogonal complement
/// of the subalgebra h.
#[derive(Debug, Clone)]
pub struct ReductiveSplit {
    h_basis: Vec<DVector<f64>>,
    m_basis: Vec<DVector<f64>>,
    projector_m: DMatrix<f64>,
    projector_h: DMatrix<f64>,
}

/// Residuals of the reductive-split hypotheses.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// max distance of [h, h] from h
    pub subalgebra_defect: f64,
    /// max |<h_i, m_j>_0|
    pub orthogonality_defect: f64,
    /// max distance of [h, m] from m
    pub reductivity_defect: f64,
}

impl SplitReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.subalgebra_defect <= tol
            && self.orthogonality_defect <= tol
            && self.reductivity_defect <= tol
    }
}

impl ReductiveSplit {
    /// h spanned by the given standard-basis indices; m is the g0-orthogonal
    /// complement.
    pub fn from_subalgebra_indices(
        alg: &LieAlgebra,
        g0: &DMatrix<f64>,
        indices: &[usize],
    ) -> Result<Self> {
        let mut h_raw = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= alg.dim() {
                return Err(Error::DimensionMismatch {
                    expected: alg.dim(),
                    got: i + 1,
                });
            }
            h_raw.push(alg.basis_vector(i));
        }
        Self::from_h_basis(alg, g0, &h_raw)
    }

    /// General constructor from any spanning set of h.
    pub fn from_h_basis(
        alg: &LieAlgebra,
        g0: &DMatrix<f64>,
        h_raw: &[DVector<f64>],
    ) -> Result<Self> {
        let dim = alg.dim();
        if h_raw.is_empty() {
            return Err(Error::Usage(
                "reductive split requires a nonempty subalgebra; omit the split instead".into(),
            ));
        }
        for v in h_raw {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
        }
        let inner0 = |a: &DVector<f64>, b: &DVector<f64>| (g0 * b).dot(a);
        let h_basis = linalg::gram_schmidt_with(inner0, h_raw, 1e-12)?;
        if h_basis.len() == dim {
            return Err(Error::Usage(
                "subalgebra equals the whole algebra; m would be trivial".into(),
            ));
        }

        // g0-orthogonal projector onto h: sum_r h_r h_r^T g0 for a
        // g0-orthonormal h-basis.
        let mut projector_h = DMatrix::zeros(dim, dim);
        for h in &h_basis {
            projector_h += h * (g0 * h).transpose();
        }
        let projector_m = DMatrix::identity(dim, dim) - &projector_h;

        // g0-orthonormal basis of m, extracted from the projected standard basis.
        let mut m_basis: Vec<DVector<f64>> = Vec::new();
        for i in 0..dim {
            let cand = &projector_m * DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 });
            let mut w = cand;
            for _ in 0..2 {
                for q in &m_basis {
                    let c = inner0(&w, q);
                    w -= q * c;
                }
            }
            let norm = inner0(&w, &w).max(0.0).sqrt();
            if norm > 1e-10 {
                m_basis.push(w / norm);
            }
        }
        if m_basis.len() + h_basis.len() != dim {
            return Err(Error::Numerical(format!(
                "split basis extraction found {} + {} vectors for dimension {}",
                h_basis.len(),
                m_basis.len(),
                dim
            )));
        }

        Ok(ReductiveSplit {
            h_basis,
            m_basis,
            projector_m,
            projector_h,
        })
    }

    pub fn h_basis(&self) -> &[DVector<f64>] {
        &self.h_basis
    }

    pub fn m_basis(&self) -> &[DVector<f64>] {
        &self.m_basis
    }

    pub fn projector_m(&self) -> &DMatrix<f64> {
        &self.projector_m
    }

    pub fn projector_h(&self) -> &DMatrix<f64> {
        &self.projector_h
    }

    pub fn m_dim(&self) -> usize {
        self.m_basis.len()
    }

    /// g0-orthogonal projection onto m.
    pub fn project_m(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.projector_m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.projector_m.nrows(),
                got: v.len(),
            });
        }
        Ok(&self.projector_m * v)
    }

    /// Residuals of the split hypotheses with respect to `alg` and `g0`.
    pub fn check(&self, alg: &LieAlgebra, g0: &DMatrix<f64>) -> Result<SplitReport> {
        let g0_norm = |v: &DVector<f64>| (g0 * v).dot(v).max(0.0).sqrt();
        let mut subalgebra = 0.0f64;
        for a in &self.h_basis {
            for b in &self.h_basis {
                let br = alg.bracket(a, b)?;
                subalgebra = subalgebra.max(g0_norm(&(&self.projector_m * &br)));
            }
        }
        let mut orth = 0.0f64;
        for h in &self.h_basis {
            for m in &self.m_basis {
                orth = orth.max((g0 * m).dot(h).abs());
            }
        }
        let mut reductivity = 0.0f64;
        for h in &self.h_basis {
            for m in &self.m_basis {
                let br = alg.bracket(h, m)?;
                reductivity = reductivity.max(g0_norm(&(&self.projector_h * &br)));
            }
        }
        Ok(SplitReport {
            subalgebra_defect: subalgebra,
            orthogonality_defect: orth,
            reductivity_defect: reductivity,
        })
    }
}
