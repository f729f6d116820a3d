//! Curvature invariants of invariant Randers metrics on Lie groups and
//! reductive homogeneous spaces, computed from Lie-algebra data.
//!
//! A Randers norm `F(Y) = sqrt(<Y,Y>) + <X,Y>` on a Lie group or homogeneous
//! space is determined by a Lie algebra (structure constants), a reference
//! bi-invariant product `<.,.>_0`, a positive-definite endomorphism `phi`
//! with `<.,.> = <phi ., .>_0`, and a drift vector `X` with `|X| < 1`. This
//! crate computes:
//!
//! * the Levi-Civita connection and curvature tensor from first principles
//!   (Koszul formula on groups, Nomizu's formula on reductive splits);
//! * the printed closed-form curvature and flag-curvature expressions for
//!   these metrics, together with sign/denominator-corrected variants, so
//!   the two routes can be audited against each other;
//! * the fundamental tensor `g_Y` in closed form and by finite differences;
//! * classification predicates: Berwald type, perfect algebras,
//!   Killing/closedness defects, the Yasuda-Shimada constant-curvature
//!   conditions, and sectional nonnegativity along skew-adjoint directions.
//!
//! Everything is immutable after construction and safe to share across
//! threads. Sampling loops and tensor assembly run on rayon when the
//! `parallel` feature (default) is enabled; results are reduced in sample
//! order either way, so output does not depend on the thread count.

pub mod algebra;
pub mod classify;
pub mod curvature;
pub mod error;
pub mod flag;
pub mod geometry;
pub mod linalg;
pub mod metric;
pub mod par;
pub mod presets;
pub mod randers;
pub mod tol;

pub use algebra::{LieAlgebra, ReductiveSplit};
pub use error::{Error, Result};
pub use geometry::Geometry;
pub use metric::{InnerForm, MetricStructure};
pub use par::Parallelism;
pub use randers::RandersStructure;
pub use tol::Tolerances;
