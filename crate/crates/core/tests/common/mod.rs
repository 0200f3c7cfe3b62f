#![allow(dead_code)]

use closedode::solver::{general_solution, DEFAULT_TOL};
use closedode::{ClosedForm, Coefficients};

/// Coefficient values on each axis of the acceptance grid.
pub const COEFF_AXIS: [f64; 9] = [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0];
pub const CONSTANT_AXIS: [f64; 4] = [-1.0, 0.0, 1.0, 2.0];
pub const INITIAL_CONDITIONS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, -1.0), (2.0, 3.0)];

pub fn coeff_grid() -> impl Iterator<Item = Coefficients> {
    COEFF_AXIS.iter().flat_map(|&a| COEFF_AXIS.iter().map(move |&b| Coefficients { a, b }))
}

pub fn fitted(coeffs: Coefficients, y0: f64, v0: f64) -> ClosedForm {
    general_solution(coeffs, DEFAULT_TOL).fit_initial_conditions(y0, v0)
}

/// Every fitted solution of the acceptance grid.
pub fn fitted_grid() -> Vec<(Coefficients, (f64, f64), ClosedForm)> {
    coeff_grid().flat_map(|c| INITIAL_CONDITIONS.iter().map(move |&ic| (c, ic, fitted(c, ic.0, ic.1)))).collect()
}

/// 101 uniform points on [−5, 5].
pub fn uniform_grid() -> Vec<f64> {
    (0..=100).map(|i| (i as f64 - 50.0) / 10.0).collect()
}

/// Distance in representable doubles between `a` and `b` (0.0 and −0.0 coincide).
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    fn ordered(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    }
    ordered(a).abs_diff(ordered(b))
}

/// One ulp of the larger magnitude of `a` and `b`.
pub fn ulp_of(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    f64::from_bits(m.to_bits() + 1) - m
}
