//! Small example algebras used throughout the tests, benches and fixtures.

use crate::algebra::LieAlgebra;

/// su(2): `[e1,e2] = e3`, `[e2,e3] = e1`, `[e3,e1] = e2`.
pub fn su2() -> LieAlgebra {
    LieAlgebra::from_bracket_entries(
        3,
        &[
            (0, 1, vec![(2, 1.0)]),
            (1, 2, vec![(0, 1.0)]),
            (0, 2, vec![(1, -1.0)]),
        ],
        None,
    )
    .expect("valid structure constants")
}

/// u(2) modeled as su(2) + R with a central `e4`.
pub fn u2() -> LieAlgebra {
    LieAlgebra::from_bracket_entries(
        4,
        &[
            (0, 1, vec![(2, 1.0)]),
            (1, 2, vec![(0, 1.0)]),
            (0, 2, vec![(1, -1.0)]),
        ],
        None,
    )
    .expect("valid structure constants")
}

/// Heisenberg algebra: `[e1,e2] = e3` only.
pub fn heisenberg3() -> LieAlgebra {
    LieAlgebra::from_bracket_entries(3, &[(0, 1, vec![(2, 1.0)])], None)
        .expect("valid structure constants")
}

/// Abelian algebra of any positive dimension.
pub fn abelian(dim: usize) -> LieAlgebra {
    LieAlgebra::from_bracket_entries(dim, &[], None).expect("valid structure constants")
}

/// Direct sum of `copies` commuting su(2) blocks.
pub fn su2_sum(copies: usize) -> LieAlgebra {
    let mut entries = Vec::new();
    for c in 0..copies {
        let o = 3 * c;
        entries.push((o, o + 1, vec![(o + 2, 1.0)]));
        entries.push((o + 1, o + 2, vec![(o, 1.0)]));
        entries.push((o, o + 2, vec![(o + 1, -1.0)]));
    }
    LieAlgebra::from_bracket_entries(3 * copies, &entries, None)
        .expect("valid structure constants")
}

/// su(2) + su(2), the smallest perfect algebra beyond su(2) itself.
pub fn su2_direct_sum() -> LieAlgebra {
    su2_sum(2)
}
