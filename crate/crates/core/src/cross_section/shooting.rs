//! Shooting for `φ'' = −f(φ)`, `φ(0) = 0`, `φ'(0) = s`.

use alloc::vec::Vec;

use super::CrossSectionProfile;
use crate::nonlinearity::QuinticParams;
use crate::{Error, Result};

/// Trajectories leaving `|φ| ≤ BLOW_UP` are abandoned.
pub const BLOW_UP: f64 = 10.0;
/// Log-spaced slope scan used to bracket positive solutions.
pub const DEFAULT_SLOPE_SCAN: (f64, f64) = (1e-4, 100.0);
const SCAN_POINTS: usize = 600;

/// RK4 trajectory on the uniform grid `x_k = k/steps`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn endpoint(&self) -> f64 {
        self.phi[self.steps()]
    }

    /// Cubic Hermite interpolation at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.steps();
        let h = 1.0 / n as f64;
        let k = ((x / h) as usize).min(n - 1);
        let t = (x - k as f64 * h) / h;
        let (p0, p1) = (self.phi[k], self.phi[k + 1]);
        let (m0, m1) = (self.dphi[k] * h, self.dphi[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }
}

/// Integrates across `[0, 1]` with `steps` classical RK4 steps.
///
/// Fails with [`Error::BlowUp`] once `|φ| > BLOW_UP`.
pub fn shoot(params: &QuinticParams, slope: f64, steps: usize) -> Result<Trajectory> {
    if steps < 16 {
        return Err(Error::InvalidInput("shooting needs at least 16 steps".into()));
    }
    let h = 1.0 / steps as f64;
    let mut phi = Vec::with_capacity(steps + 1);
    let mut dphi = Vec::with_capacity(steps + 1);
    let (mut y, mut v) = (0.0f64, slope);
    phi.push(y);
    dphi.push(v);
    let acc = |y: f64| -params.eval_f(y);
    for k in 0..steps {
        let (k1y, k1v) = (v, acc(y));
        let (k2y, k2v) = (v + 0.5 * h * k1v, acc(y + 0.5 * h * k1y));
        let (k3y, k3v) = (v + 0.5 * h * k2v, acc(y + 0.5 * h * k2y));
        let (k4y, k4v) = (v + h * k3v, acc(y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(y.abs() <= BLOW_UP) {
            return Err(Error::BlowUp { limit: BLOW_UP, at: (k + 1) as f64 * h });
        }
        phi.push(y);
        dphi.push(v);
    }
    Ok(Trajectory { phi, dphi })
}

/// Endpoint sign used while scanning: blow-up counts as `+∞`.
fn endpoint(params: &QuinticParams, slope: f64, steps: usize) -> Result<f64> {
    match shoot(params, slope, steps) {
        Ok(t) => Ok(t.endpoint()),
        Err(Error::BlowUp { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Positive solution of the Dirichlet problem by slope bisection.
///
/// Every sign change of `φ(1)` on the slope scan is bisected to
/// `|φ(1)| ≤ 1e-10`; trajectories that are positive inside are resampled to
/// `nx` intervals and the one of least discrete action is returned.
pub fn bvp_by_shooting(params: &QuinticParams, nx: usize, steps: usize) -> Result<CrossSectionProfile> {
    let (lo, hi) = DEFAULT_SLOPE_SCAN;
    let ratio = hi / lo;
    let slopes: Vec<f64> =
        (0..SCAN_POINTS).map(|k| lo * libm::pow(ratio, k as f64 / (SCAN_POINTS - 1) as f64)).collect();
    let ends = slopes.iter().map(|s| endpoint(params, *s, steps)).collect::<Result<Vec<_>>>()?;

    let mut best: Option<CrossSectionProfile> = None;
    for k in 0..SCAN_POINTS - 1 {
        if !(ends[k].signum() != ends[k + 1].signum() && ends[k] != 0.0) {
            continue;
        }
        let (mut a, mut b) = (slopes[k], slopes[k + 1]);
        let sa = ends[k].signum();
        let mut traj = None;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let t = match shoot(params, m, steps) {
                Ok(t) => t,
                Err(Error::BlowUp { .. }) => {
                    if sa > 0.0 {
                        a = m
                    } else {
                        b = m
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            let e = t.endpoint();
            let done = e.abs() <= 1e-10 || b - a <= 4.0 * f64::EPSILON * m;
            if e.signum() == sa {
                a = m;
            } else {
                b = m;
            }
            traj = Some(t);
            if done {
                break;
            }
        }
        let Some(t) = traj else { continue };
        if t.endpoint().abs() > 1e-10 || t.phi[1..t.steps()].iter().any(|v| *v <= 0.0) {
            continue;
        }
        let p = CrossSectionProfile::from_fn(nx, |x| t.eval(x)).with_action(params);
        if best.as_ref().is_none_or(|b| p.action < b.action) {
            best = Some(p);
        }
    }
    best.ok_or(Error::NoPositiveSolution { lo, hi })
}
