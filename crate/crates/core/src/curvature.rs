//! Levi-Civita connection and curvature of invariant metrics, three ways:
//! the Koszul/Nomizu first-principles route (the oracle), the printed
//! closed-form curvature formula for invariant metrics on compact
//! homogeneous spaces, and the bi-invariant shortcut R(X,Y)Z = [Z,[X,Y]]/4.
//!
//! Oracle convention, fixed once for the whole crate:
//! `R(A,B)C = nabla_A nabla_B C - nabla_B nabla_A C - nabla_[A,B] C`
//! on invariant fields, with sectional curvature `K = <R(u,y)y,u> / area^2`.
//! This normalization gives K = +1/4 on bi-invariant su(2).

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{LieAlgebra, ReductiveSplit};
use crate::error::{Error, Result};
use crate::metric::MetricStructure;
use crate::par::{map_range, Parallelism};

/// Connection coefficients on a working basis:
/// `nabla_{f_i} f_j = sum_k gamma[i][j][k] f_k`.
///
/// `maps[i]` sends the coordinates of `v` to the coordinates of
/// `nabla_{f_i} v`, so `gamma[i][j][k] = maps[i][(k, j)]`.
#[derive(Debug, Clone)]
pub struct ConnectionTable {
    maps: Vec<DMatrix<f64>>,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.maps.len()
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.maps[i][(k, j)]
    }

    pub fn map(&self, i: usize) -> &DMatrix<f64> {
        &self.maps[i]
    }

    /// Coordinates of `nabla_{f_i} v` for `v` given in working coordinates.
    pub fn derivative(&self, i: usize, v: &DVector<f64>) -> DVector<f64> {
        &self.maps[i] * v
    }

    /// Directional map `nabla_a` for a direction in working coordinates.
    pub fn directional(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (i, w) in a.iter().enumerate() {
            if *w != 0.0 {
                out += &self.maps[i] * *w;
            }
        }
        out
    }
}

/// Lowered curvature components `r[i][j][k][l] = <R(f_i,f_j)f_k, f_l>` on the
/// working basis, under the oracle convention.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    dim: usize,
    comps: Vec<f64>,
}

/// Max-abs residuals of the classical curvature identities.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSymmetryReport {
    pub antisymmetry_first_pair: f64,
    pub antisymmetry_last_pair: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
}

impl CurvatureSymmetryReport {
    pub fn max(&self) -> f64 {
        self.antisymmetry_first_pair
            .max(self.antisymmetry_last_pair)
            .max(self.pair_symmetry)
            .max(self.first_bianchi)
    }
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.comps[((i * n + j) * n + k) * n + l]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn symmetry_report(&self) -> CurvatureSymmetryReport {
        let n = self.dim;
        let mut a1 = 0.0f64;
        let mut a2 = 0.0f64;
        let mut pair = 0.0f64;
        let mut bianchi = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.component(i, j, k, l);
                        a1 = a1.max((r + self.component(j, i, k, l)).abs());
                        a2 = a2.max((r + self.component(i, j, l, k)).abs());
                        pair = pair.max((r - self.component(k, l, i, j)).abs());
                        bianchi = bianchi.max(
                            (r + self.component(j, k, i, l) + self.component(k, i, j, l)).abs(),
                        );
                    }
                }
            }
        }
        CurvatureSymmetryReport {
            antisymmetry_first_pair: a1,
            antisymmetry_last_pair: a2,
            pair_symmetry: pair,
            first_bianchi: bianchi,
        }
    }
}

/// Koszul formula for left-invariant fields on a Lie group:
/// `2<nabla_U V, W> = <[U,V],W> - <[V,W],U> + <[W,U],V>`.
pub fn koszul_connection(alg: &LieAlgebra, metric: &MetricStructure) -> Result<ConnectionTable> {
    let n = alg.dim();
    if metric.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: metric.dim() });
    }
    let gram = metric.inner_matrix().clone();
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::Numerical("metric Gram matrix is not positive definite".into())
    })?;
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (metric.inner_matrix() * b).dot(a);
    let mut maps = vec![DMatrix::zeros(n, n); n];
    for (i, map) in maps.iter_mut().enumerate() {
        for j in 0..n {
            let b_ij = alg.bracket_basis(i, j);
            let mut rhs = DVector::zeros(n);
            for k in 0..n {
                let b_jk = alg.bracket_basis(j, k);
                let b_ki = alg.bracket_basis(k, i);
                let ek = alg.basis_vector(k);
                rhs[k] = 0.5
                    * (inner(&b_ij, &ek) - inner(&b_jk, &alg.basis_vector(i))
                        + inner(&b_ki, &alg.basis_vector(j)));
            }
            let coeffs = chol.solve(&rhs);
            map.set_column(j, &coeffs);
        }
    }
    Ok(ConnectionTable { maps })
}

/// Nomizu connection on m for a reductive homogeneous space:
/// `nabla_X Y = [X,Y]_m / 2 + U(X,Y)` with
/// `<U(X,Y),Z> = (<[Z,X]_m,Y> + <X,[Z,Y]_m>) / 2`, all of X, Y, Z in m.
///
/// The table lives on the split's m-basis.
pub fn nomizu_connection(
    alg: &LieAlgebra,
    metric: &MetricStructure,
    split: &ReductiveSplit,
) -> Result<ConnectionTable> {
    let m = split.m_dim();
    let basis = split.m_basis();
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (metric.inner_matrix() * b).dot(a);
    let gram = DMatrix::from_fn(m, m, |a, b| inner(&basis[a], &basis[b]));
    let chol = Cholesky::new(gram).ok_or_else(|| {
        Error::Numerical("metric restricted to m is not positive definite".into())
    })?;
    let proj = |v: &DVector<f64>| split.projector_m() * v;
    let mut maps = vec![DMatrix::zeros(m, m); m];
    for i in 0..m {
        for j in 0..m {
            let b_ij_m = proj(&alg.bracket(&basis[i], &basis[j])?);
            let mut rhs = DVector::zeros(m);
            for k in 0..m {
                let b_ki_m = proj(&alg.bracket(&basis[k], &basis[i])?);
                let b_kj_m = proj(&alg.bracket(&basis[k], &basis[j])?);
                rhs[k] = 0.5 * inner(&b_ij_m, &basis[k])
                    + 0.5 * (inner(&b_ki_m, &basis[j]) + inner(&basis[i], &b_kj_m));
            }
            let coeffs = chol.solve(&rhs);
            maps[i].set_column(j, &coeffs);
        }
    }
    Ok(ConnectionTable { maps })
}

/// First-principles curvature machine for a resolved invariant metric, on the
/// working basis (the standard basis for a Lie group, the m-basis for a
/// reductive homogeneous space).
pub struct CurvatureOracle<'a> {
    alg: &'a LieAlgebra,
    metric: &'a MetricStructure,
    split: Option<&'a ReductiveSplit>,
    /// Working basis vectors in ambient coordinates.
    basis: Vec<DVector<f64>>,
    /// dim x m matrix whose columns are the working basis.
    basis_matrix: DMatrix<f64>,
    /// m x dim extraction: ambient vector in the span -> working coordinates.
    coords: DMatrix<f64>,
    /// Gram matrix of `<.,.>` on the working basis.
    gram: DMatrix<f64>,
    conn: ConnectionTable,
    tensor: CurvatureTensor,
}

impl<'a> CurvatureOracle<'a> {
    pub fn lie_group(alg: &'a LieAlgebra, metric: &'a MetricStructure) -> Result<Self> {
        Self::lie_group_with(alg, metric, Parallelism::Auto)
    }

    pub fn lie_group_with(
        alg: &'a LieAlgebra,
        metric: &'a MetricStructure,
        mode: Parallelism,
    ) -> Result<Self> {
        let conn = koszul_connection(alg, metric)?;
        let n = alg.dim();
        let basis: Vec<DVector<f64>> = (0..n).map(|i| alg.basis_vector(i)).collect();
        let basis_matrix = DMatrix::identity(n, n);
        let coords = DMatrix::identity(n, n);
        let gram = metric.inner_matrix().clone();
        Self::assemble(alg, metric, None, basis, basis_matrix, coords, gram, conn, mode)
    }

    pub fn homogeneous(
        alg: &'a LieAlgebra,
        metric: &'a MetricStructure,
        split: &'a ReductiveSplit,
    ) -> Result<Self> {
        Self::homogeneous_with(alg, metric, split, Parallelism::Auto)
    }

    pub fn homogeneous_with(
        alg: &'a LieAlgebra,
        metric: &'a MetricStructure,
        split: &'a ReductiveSplit,
        mode: Parallelism,
    ) -> Result<Self> {
        let conn = nomizu_connection(alg, metric, split)?;
        let n = alg.dim();
        let m = split.m_dim();
        let basis: Vec<DVector<f64>> = split.m_basis().to_vec();
        let mut basis_matrix = DMatrix::zeros(n, m);
        for (c, v) in basis.iter().enumerate() {
            basis_matrix.set_column(c, v);
        }
        // g0-weighted left inverse of the basis matrix.
        let bt_g0 = basis_matrix.transpose() * metric.g0();
        let small = &bt_g0 * &basis_matrix;
        let coords = small
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("m-basis is numerically degenerate".into()))?
            * bt_g0;
        let inner = |a: &DVector<f64>, b: &DVector<f64>| (metric.inner_matrix() * b).dot(a);
        let gram = DMatrix::from_fn(m, m, |a, b| inner(&basis[a], &basis[b]));
        Self::assemble(
            alg,
            metric,
            Some(split),
            basis,
            basis_matrix,
            coords,
            gram,
            conn,
            mode,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        alg: &'a LieAlgebra,
        metric: &'a MetricStructure,
        split: Option<&'a ReductiveSplit>,
        basis: Vec<DVector<f64>>,
        basis_matrix: DMatrix<f64>,
        coords: DMatrix<f64>,
        gram: DMatrix<f64>,
        conn: ConnectionTable,
        mode: Parallelism,
    ) -> Result<Self> {
        let mut oracle = CurvatureOracle {
            alg,
            metric,
            split,
            basis,
            basis_matrix,
            coords,
            gram,
            conn,
            tensor: CurvatureTensor { dim: 0, comps: Vec::new() },
        };
        oracle.tensor = oracle.assemble_tensor(mode)?;
        Ok(oracle)
    }

    /// Curvature operator block for a basis pair: the matrix sending the
    /// coordinates of C to the coordinates of R(f_i, f_j)C.
    fn operator_block(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        let m = self.conn.dim();
        let w = self.alg.bracket(&self.basis[i], &self.basis[j])?;
        let (w_m, w_h) = match self.split {
            Some(split) => {
                let wm = split.project_m(&w)?;
                let wh = &w - &wm;
                (wm, wh)
            }
            None => (w.clone(), DVector::zeros(w.len())),
        };
        let w_coords = &self.coords * &w_m;
        let mut block = self.conn.map(i) * self.conn.map(j) - self.conn.map(j) * self.conn.map(i)
            - self.conn.directional(&w_coords);
        if self.split.is_some() && w_h.amax() > 0.0 {
            // isotropy contribution -[[f_i,f_j]_h, C] of the reductive
            // curvature formula
            for k in 0..m {
                let iso = self.alg.bracket(&w_h, &self.basis[k])?;
                let iso_coords = &self.coords * iso;
                for r in 0..m {
                    block[(r, k)] -= iso_coords[r];
                }
            }
        }
        Ok(block)
    }

    fn assemble_tensor(&self, mode: Parallelism) -> Result<CurvatureTensor> {
        let m = self.conn.dim();
        let rows: Vec<Result<Vec<f64>>> = map_range(mode, m, |i| {
            let mut out = vec![0.0f64; m * m * m];
            for j in 0..m {
                let lowered = &self.gram * self.operator_block(i, j)?;
                for k in 0..m {
                    for l in 0..m {
                        out[(j * m + k) * m + l] = lowered[(l, k)];
                    }
                }
            }
            Ok(out)
        });
        let mut comps = Vec::with_capacity(m * m * m * m);
        for row in rows {
            comps.extend(row?);
        }
        Ok(CurvatureTensor { dim: m, comps })
    }

    pub fn connection(&self) -> &ConnectionTable {
        &self.conn
    }

    pub fn tensor(&self) -> &CurvatureTensor {
        &self.tensor
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn working_dim(&self) -> usize {
        self.conn.dim()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn split(&self) -> Option<&ReductiveSplit> {
        self.split
    }

    /// Working coordinates of an ambient vector (projected to m first when a
    /// split is attached).
    pub fn to_coords(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.alg.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.alg.dim(),
                got: v.len(),
            });
        }
        let projected = match self.split {
            Some(split) => split.project_m(v)?,
            None => v.clone(),
        };
        Ok(&self.coords * projected)
    }

    pub fn to_ambient(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.basis_matrix * coords
    }

    /// `R(a, b) c` for ambient vectors, returned as an ambient vector.
    pub fn curvature_vector(
        &self,
        a: &DVector<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let ac = self.to_coords(a)?;
        let bc = self.to_coords(b)?;
        let cc = self.to_coords(c)?;
        let na = self.conn.directional(&ac);
        let nb = self.conn.directional(&bc);
        let a_amb = self.to_ambient(&ac);
        let b_amb = self.to_ambient(&bc);
        let w = self.alg.bracket(&a_amb, &b_amb)?;
        let (w_m, w_h) = match self.split {
            Some(split) => {
                let wm = split.project_m(&w)?;
                let wh = &w - &wm;
                (wm, wh)
            }
            None => (w.clone(), DVector::zeros(w.len())),
        };
        let nw = self.conn.directional(&(&self.coords * w_m));
        let mut vec = &na * (&nb * &cc) - &nb * (&na * &cc) - nw * &cc;
        if self.split.is_some() && w_h.amax() > 0.0 {
            let c_amb = self.to_ambient(&cc);
            let iso = self.alg.bracket(&w_h, &c_amb)?;
            vec -= &self.coords * iso;
        }
        Ok(self.to_ambient(&vec))
    }

    /// Sectional curvature of the plane spanned by `y` and `u`, pole-free:
    /// `<R(u,y)y, u> / (<y,y><u,u> - <y,u>^2)`.
    pub fn sectional(&self, y: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        let yy = self.metric.inner(y, y)?;
        let uu = self.metric.inner(u, u)?;
        let yu = self.metric.inner(y, u)?;
        let area2 = yy * uu - yu * yu;
        if area2 <= 1e-14 * (yy * uu).max(1e-300) {
            return Err(Error::Degenerate(
                "sectional curvature of a degenerate plane".into(),
            ));
        }
        let r = self.curvature_vector(u, y, y)?;
        Ok(self.metric.inner(&r, u)? / area2)
    }

    /// Covariant-derivative components of the drift 1-form `b = <x, .>`:
    /// entry (j, i) is `b_{j|i} = <nabla_{f_i} x, f_j>`.
    pub fn drift_covariant_matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = self.conn.dim();
        let xc = self.to_coords(x)?;
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            let lowered = &self.gram * self.conn.derivative(i, &xc);
            out.set_column(i, &lowered);
        }
        Ok(out)
    }

    /// `max_i | nabla_{f_i} x |` in the metric norm; zero iff the invariant
    /// field of `x` is parallel.
    pub fn parallel_defect(&self, x: &DVector<f64>) -> Result<f64> {
        let m = self.conn.dim();
        let xc = self.to_coords(x)?;
        let mut defect = 0.0f64;
        for i in 0..m {
            let d = self.conn.derivative(i, &xc);
            defect = defect.max((&self.gram * &d).dot(&d).max(0.0).sqrt());
        }
        Ok(defect)
    }

    /// Torsion residual of the stored connection against the (projected)
    /// bracket.
    pub fn connection_torsion_defect(&self) -> Result<f64> {
        let m = self.conn.dim();
        let mut defect = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let mut t = self.conn.map(i).column(j) - self.conn.map(j).column(i);
                let br = self.alg.bracket(&self.basis[i], &self.basis[j])?;
                let br_m = match self.split {
                    Some(split) => split.project_m(&br)?,
                    None => br,
                };
                t -= &self.coords * br_m;
                defect = defect.max(t.amax());
            }
        }
        Ok(defect)
    }

    /// Metric-compatibility residual
    /// `<nabla_{f_i} f_j, f_k> + <f_j, nabla_{f_i} f_k>`.
    pub fn connection_compatibility_defect(&self) -> f64 {
        let m = self.conn.dim();
        let mut defect = 0.0f64;
        for i in 0..m {
            let lowered = &self.gram * self.conn.map(i);
            for j in 0..m {
                for k in 0..m {
                    defect = defect.max((lowered[(k, j)] + lowered[(j, k)]).abs());
                }
            }
        }
        defect
    }
}

/// `B_+(x,y) = ([x, phi y] + [y, phi x]) / 2` (symmetric).
pub fn b_plus(
    alg: &LieAlgebra,
    metric: &MetricStructure,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let phi_x = metric.phi() * x;
    let phi_y = metric.phi() * y;
    Ok((alg.bracket(x, &phi_y)? + alg.bracket(y, &phi_x)?) * 0.5)
}

/// `B_-(x,y) = ([phi x, y] + [x, phi y]) / 2` (skew).
pub fn b_minus(
    alg: &LieAlgebra,
    metric: &MetricStructure,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    let phi_x = metric.phi() * x;
    let phi_y = metric.phi() * y;
    Ok((alg.bracket(&phi_x, y)? + alg.bracket(x, &phi_y)?) * 0.5)
}

/// The closed-form curvature expression for the invariant metric on a compact
/// homogeneous space, evaluated verbatim as printed. A trivial split (no
/// subalgebra) gives the Lie-group case.
///
/// Empirically pinned slot mapping against the oracle:
/// `puttmann_printed(x,y,z,w) = <R(x,y)w, z>` (see the slot-mapping tests);
/// the printed formula and the oracle convention differ by the order/sign of
/// the last two slots.
pub fn puttmann_printed(
    alg: &LieAlgebra,
    metric: &MetricStructure,
    split: Option<&ReductiveSplit>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    w: &DVector<f64>,
) -> Result<f64> {
    let proj = |v: DVector<f64>| -> Result<DVector<f64>> {
        match split {
            Some(s) => s.project_m(&v),
            None => Ok(v),
        }
    };
    let br = |a: &DVector<f64>, b: &DVector<f64>| alg.bracket(a, b);
    let i0 = |a: &DVector<f64>, b: &DVector<f64>| metric.inner0(a, b);
    let im = |a: &DVector<f64>, b: &DVector<f64>| metric.inner(a, b);

    let t1 = 0.5
        * (i0(&b_minus(alg, metric, x, y)?, &br(z, w)?)?
            + i0(&br(x, y)?, &b_minus(alg, metric, z, w)?)?);
    let t2 = 0.25
        * (im(&br(x, w)?, &proj(br(y, z)?)?)? - im(&br(x, z)?, &proj(br(y, w)?)?)?
            - 2.0 * im(&br(x, y)?, &proj(br(z, w)?)?)?);
    let b_xw = b_plus(alg, metric, x, w)?;
    let b_yz = b_plus(alg, metric, y, z)?;
    let b_xz = b_plus(alg, metric, x, z)?;
    let b_yw = b_plus(alg, metric, y, w)?;
    let t3 = i0(&b_xw, &(metric.phi_inv() * b_yz))? - i0(&b_xz, &(metric.phi_inv() * b_yw))?;
    Ok(t1 + t2 + t3)
}

/// Bi-invariant curvature shortcut `R(x,y)z = [z,[x,y]] / 4`.
pub fn biinvariant_curvature(
    alg: &LieAlgebra,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    Ok(alg.bracket(z, &alg.bracket(x, y)?)? * 0.25)
}

/// As `biinvariant_curvature`, but enforcing the hypothesis: g0 bi-invariant
/// within `tol` and phi = identity.
pub fn biinvariant_curvature_checked(
    alg: &LieAlgebra,
    metric: &MetricStructure,
    tol: f64,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<DVector<f64>> {
    let defect = metric.bi_invariance_defect(alg);
    if defect > tol {
        return Err(Error::Usage(format!(
            "bi-invariant shortcut requires a bi-invariant metric (defect {defect:.3e})"
        )));
    }
    let phi_dev = (metric.phi() - DMatrix::identity(metric.dim(), metric.dim())).amax();
    if phi_dev > tol {
        return Err(Error::Usage(format!(
            "bi-invariant shortcut requires phi = identity (deviation {phi_dev:.3e})"
        )));
    }
    biinvariant_curvature(alg, x, y, z)
}
