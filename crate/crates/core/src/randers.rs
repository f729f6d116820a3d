//! The Randers norm `F(Y) = sqrt(<Y,Y>) + <X,Y>` and its fundamental tensor
//! `g_Y`, in closed form and by central finite differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metric::MetricStructure;

/// Default relative finite-difference step for `fundamental_fd`.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// A Randers structure: drift vector X with `sqrt(<X,X>) < 1` over a fixed
/// invariant metric.
#[derive(Debug, Clone)]
pub struct RandersStructure<'a> {
    metric: &'a MetricStructure,
    drift: DVector<f64>,
    norm_bound: f64,
}

impl<'a> RandersStructure<'a> {
    pub fn new(metric: &'a MetricStructure, drift: DVector<f64>) -> Result<Self> {
        if drift.len() != metric.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                got: drift.len(),
            });
        }
        let norm_bound = metric.norm(&drift);
        if norm_bound >= 1.0 {
            return Err(Error::validation("drift_norm", norm_bound, 1.0));
        }
        Ok(RandersStructure {
            metric,
            drift,
            norm_bound,
        })
    }

    pub fn metric(&self) -> &MetricStructure {
        self.metric
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    /// `sqrt(<X,X>)`; strictly below 1 by construction.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// `1 - sqrt(<X,X>)`, always positive for a valid structure.
    pub fn strong_convexity_margin(&self) -> f64 {
        1.0 - self.norm_bound
    }

    pub fn is_non_riemannian(&self, tol: f64) -> bool {
        self.norm_bound > tol
    }

    /// `F(y) = sqrt(<y,y>) + <X,y>`; `F(0) = 0`.
    pub fn norm(&self, y: &DVector<f64>) -> Result<f64> {
        Ok(self.metric.norm(y) + self.metric.inner(&self.drift, y)?)
    }

    /// Fundamental tensor `g_Y(u, v)` evaluated from the closed form.
    pub fn fundamental_closed(
        &self,
        y: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<f64> {
        let g = self.metric;
        let gyy = g.inner(y, y)?;
        if gyy <= 0.0 {
            return Err(Error::Degenerate(
                "fundamental tensor is undefined at the zero vector".into(),
            ));
        }
        let x = &self.drift;
        let gxy = g.inner(x, y)?;
        let gxu = g.inner(x, u)?;
        let gxv = g.inner(x, v)?;
        let gyu = g.inner(y, u)?;
        let gyv = g.inner(y, v)?;
        let guv = g.inner(u, v)?;
        let alpha = gyy.sqrt();
        Ok(guv + gxu * gxv - gxy * gyv * gyu / (gyy * alpha)
            + (gxu * gyv + gxy * guv + gxv * gyu) / alpha)
    }

    /// Fundamental tensor by the central second difference
    /// `g_Y(u,v) ~ [F^2(Y+hu+hv) - F^2(Y+hu-hv) - F^2(Y-hu+hv) + F^2(Y-hu-hv)] / (8 h^2)`
    /// at step `h` scaled by `|Y|`.
    pub fn fundamental_fd(
        &self,
        y: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
        h: f64,
    ) -> Result<f64> {
        let ynorm = self.metric.norm(y);
        if ynorm <= 0.0 {
            return Err(Error::Degenerate(
                "fundamental tensor is undefined at the zero vector".into(),
            ));
        }
        let step = h * ynorm;
        let f2 = |su: f64, sv: f64| -> Result<f64> {
            let p = y + u * (su * step) + v * (sv * step);
            if self.metric.norm(&p) <= f64::EPSILON * ynorm {
                return Err(Error::Degenerate(
                    "finite-difference stencil hit the zero vector".into(),
                ));
            }
            let f = self.norm(&p)?;
            Ok(f * f)
        };
        let mixed =
            (f2(1.0, 1.0)? - f2(1.0, -1.0)? - f2(-1.0, 1.0)? + f2(-1.0, -1.0)?) / (4.0 * step * step);
        Ok(0.5 * mixed)
    }

    /// Matrix of `g_Y` over the standard basis, for definiteness probing.
    pub fn fundamental_matrix(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.metric.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let ei = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
            for j in i..n {
                let ej = DVector::from_fn(n, |r, _| if r == j { 1.0 } else { 0.0 });
                let val = self.fundamental_closed(y, &ei, &ej)?;
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
        }
        Ok(m)
    }
}
