//! Shared fixtures for the benchmarks.

use weblab::analytic::{c, x1, x2};
use weblab::{Domain, TestFunction, TripleDatum};

/// `a = (1, 1 + x1^2/4, 1)`, `phi = (x1, x2, x1^2 + x1 x2 + x2^2)` on `[0.5, 1.5]^2`.
pub fn curved_datum() -> TripleDatum {
    TripleDatum::new(
        Domain::rect([0.5, 1.5], [0.5, 1.5]),
        [c(1.0), c(1.0) + c(0.25) * x1().powi(2), c(1.0)],
        [x1(), x2(), x1().powi(2) + x1() * x2() + x2().powi(2)],
    )
}

pub fn osc_functions() -> Vec<TestFunction> {
    [(1, 0.0), (2, 0.0), (3, 1.0)]
        .into_iter()
        .map(|(seed, floor)| {
            TestFunction::Osc(weblab::datum::Oscillatory::new(seed, 6, 20.0, floor).expect("valid osc"))
        })
        .collect()
}
