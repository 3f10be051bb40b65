//! Calibrations shared by the unit tests; each is computed once per run.

use std::sync::OnceLock;

use crate::cross_section::{lambda_star_bisection, LambdaStarResult};
use crate::cylinder::{solve_heteroclinic, HeteroclinicReport, SolverConfig};
use crate::QuinticParams;

pub fn q(l: f64) -> QuinticParams {
    QuinticParams::new(l).unwrap()
}

pub fn calibrated(nx: usize) -> &'static LambdaStarResult {
    static CELLS: [OnceLock<LambdaStarResult>; 5] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let k = match nx {
        32 => 0,
        64 => 1,
        128 => 2,
        256 => 3,
        512 => 4,
        _ => panic!("no shared calibration at nx = {nx}"),
    };
    CELLS[k].get_or_init(|| lambda_star_bisection(nx, 1e-9).unwrap())
}

/// Fourth-order central difference of `e` along coordinate `i`.
pub fn central_difference(x: &[f64], i: usize, step: f64, e: impl Fn(&[f64]) -> f64) -> f64 {
    let mut y = x.to_vec();
    let mut at = |d: f64| {
        y[i] = x[i] + d;
        e(&y)
    };
    (-at(2.0 * step) + 8.0 * at(step) - 8.0 * at(-step) + at(-2.0 * step)) / (12.0 * step)
}

/// Continuation over {4, 6, 8} at nx = 32, shared by several tests.
pub fn continuation() -> &'static HeteroclinicReport {
    static C: OnceLock<HeteroclinicReport> = OnceLock::new();
    C.get_or_init(|| {
        let cal = calibrated(32);
        let cfg = SolverConfig { nx: 32, nz_per_unit: 32, n_schedule: vec![4.0, 6.0, 8.0], ..Default::default() };
        solve_heteroclinic(&q(cal.lambda_star), &cal.phi, &cfg).unwrap()
    })
}
