//! Fixtures shared by the criterion benchmarks.

use hypoisson_core::boundary::seeded_test_forms;
use hypoisson_core::lorentz::{embed_k, geodesic};
use hypoisson_core::sphquad::{seeded_rotations, FocusedRule};
use hypoisson_core::{Complex64, GroupElement, PoissonField, SpectralParams};

/// Desk-scale parameters `n = 4, p = 1, mu = 3/2`.
pub fn desk_params(q: usize) -> SpectralParams {
    SpectralParams::new(4, 1, q, Complex64::new(1.5, 0.0)).expect("valid desk parameters")
}

/// Transform of a seeded K-finite 1-form with the given focused rule.
pub fn desk_field(rule: FocusedRule) -> PoissonField {
    let f = seeded_test_forms(4, 1, 0.8, 1, 11).expect("valid form").remove(0);
    PoissonField::new(desk_params(1), f, rule).expect("valid field")
}

/// Deterministic group elements `k a_t k'` with `t` cycling through `0.3, 0.8, ..`.
pub fn sample_elements(n: usize, count: usize) -> Vec<GroupElement> {
    let rots = seeded_rotations(n, 2 * count, 5);
    (0..count)
        .map(|i| embed_k(&rots[2 * i]).mul(&geodesic(n, 0.3 + 0.5 * (i % 4) as f64)).mul(&embed_k(&rots[2 * i + 1])))
        .collect()
}
