//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Max-abs deviation of a matrix from its own transpose.
pub fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    defect
}

/// Columns of `m` below the relative singular-value cutoff are treated as
/// zero; returns the numerical rank and a Euclidean-orthonormal basis of the
/// column span (leading left singular vectors).
pub fn column_span(m: &DMatrix<f64>, rank_rel: f64) -> (usize, Vec<DVector<f64>>) {
    if m.ncols() == 0 || m.nrows() == 0 {
        return (0, Vec::new());
    }
    let svd = m.clone().svd(true, false);
    let sigma = &svd.singular_values;
    let cutoff = rank_rel * sigma.iter().copied().fold(0.0f64, f64::max).max(1.0);
    let rank = sigma.iter().filter(|s| **s > cutoff).count();
    let u = svd.u.expect("left singular vectors requested");
    let basis = (0..rank).map(|k| u.column(k).into_owned()).collect();
    (rank, basis)
}

/// Euclidean-orthonormal basis of the null space of `m`.
///
/// Works on the n x n Gram matrix m^T m so that the full set of kernel
/// directions is available even when `m` is tall (thin SVD would truncate).
pub fn null_space(m: &DMatrix<f64>, rank_rel: f64) -> Vec<DVector<f64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let sigma_max = eig
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .fold(0.0f64, f64::max);
    let cutoff = rank_rel * sigma_max.max(1.0);
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for (idx, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.max(0.0).sqrt() <= cutoff {
            kernel.push(eig.eigenvectors.column(idx).into_owned());
        }
    }
    kernel
}

/// Modified Gram-Schmidt with one re-orthogonalization pass, with respect to
/// an arbitrary inner product. The span is preserved and the first output
/// vector is a positive multiple of the first input.
pub fn gram_schmidt_with<F>(inner: F, vectors: &[DVector<f64>], rel_tol: f64) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = inner(v, v).max(0.0).sqrt();
        let mut w = v.clone();
        // Two projection sweeps keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for q in &out {
                let c = inner(&w, q);
                w -= q * c;
            }
        }
        let norm = inner(&w, &w).max(0.0).sqrt();
        if norm <= rel_tol * scale.max(1.0) {
            return Err(Error::Degenerate(
                "linearly dependent input to orthonormalization".to_string(),
            ));
        }
        out.push(w / norm);
    }
    Ok(out)
}

/// Coordinates of `v` in a spanning set `basis` (columns), in the least-squares
/// sense; exact when `v` lies in the span.
pub fn coordinates_in(basis: &DMatrix<f64>, v: &DVector<f64>) -> DVector<f64> {
    let gram = basis.transpose() * basis;
    let rhs = basis.transpose() * v;
    gram.lu().solve(&rhs).expect("basis has full column rank")
}
