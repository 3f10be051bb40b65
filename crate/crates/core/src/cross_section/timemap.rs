//! Grid-free calibration of `λ*` for the quintic family from the first
//! integral `½φ'² + F(φ) = E`.
//!
//! A positive solution with turning value `M` (so `E = F(M)`) fits in
//! `(0,1)` iff its half-width `∫₀^M dφ/√(2(E−F(φ)))` equals `½`; its action is
//! `2∫₀^M √(2(E−F(φ))) dφ − E`. With `φ = M sin ψ` both integrands become
//! smooth on `[0, π/2]` once the factor `cos²ψ` is divided out of `E − F`.

use core::f64::consts::FRAC_PI_2;

use crate::nonlinearity::QuinticParams;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

const NODES: usize = 64;
const QUAD_REL_TOL: f64 = 1e-12;

/// `(E − F(M s)) / (1 − s²)` for the quintic family.
fn reduced_gap(lambda: f64, m: f64, s: f64) -> f64 {
    let m2 = m * m;
    let m4 = m2 * m2;
    let s2 = s * s;
    m4 * (1.0 + s2) / 4.0 - lambda * m4 * m2 * (1.0 + s2 + s2 * s2) / 6.0
}

struct Rules {
    coarse: GaussLegendre,
    fine: GaussLegendre,
}

impl Rules {
    fn new() -> Self {
        Self { coarse: GaussLegendre::new(NODES), fine: GaussLegendre::new(2 * NODES) }
    }

    fn integrate(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let a = self.coarse.integrate(0.0, FRAC_PI_2, &g);
        let b = self.fine.integrate(0.0, FRAC_PI_2, &g);
        if !((a - b).abs() <= QUAD_REL_TOL * b.abs().max(1e-300)) {
            return Err(Error::Quadrature { lo: a, hi: b });
        }
        Ok(b)
    }

    fn half_width(&self, lambda: f64, m: f64) -> Result<f64> {
        self.integrate(|psi| {
            let s = libm::sin(psi);
            m / libm::sqrt(2.0 * reduced_gap(lambda, m, s))
        })
    }

    fn action(&self, lambda: f64, m: f64) -> Result<f64> {
        let e = QuinticParams::new(lambda).expect("λ ≥ 0").eval_primitive(m);
        let kinetic = self.integrate(|psi| {
            let (s, c) = (libm::sin(psi), libm::cos(psi));
            m * c * c * libm::sqrt(2.0 * reduced_gap(lambda, m, s))
        })?;
        Ok(2.0 * kinetic - e)
    }

    /// Turning value on the large-amplitude branch with half-width `½`.
    fn branch_amplitude(&self, lambda: f64) -> Result<Option<f64>> {
        let m_max = 1.0 / libm::sqrt(lambda);
        // Half-width blows up as M → 1/√λ; stay where the rules resolve it.
        let mut top = m_max * 0.99;
        while self.half_width(lambda, top)? < 0.5 && top < m_max * (1.0 - 1e-8) {
            top = m_max - 0.1 * (m_max - top);
        }
        // Half-width is unimodal in M on (0, 1/√λ): locate its minimum.
        let (mut a, mut b) = (1e-3 * m_max, top);
        let g = 0.5 * (libm::sqrt(5.0) - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.half_width(lambda, c)? < self.half_width(lambda, d)? {
                b = d;
            } else {
                a = c;
            }
            if b - a < 1e-12 * m_max {
                break;
            }
        }
        let m_min = 0.5 * (a + b);
        if self.half_width(lambda, m_min)? > 0.5 {
            return Ok(None);
        }
        let (mut lo, mut hi) = (m_min, top);
        if self.half_width(lambda, hi)? < 0.5 {
            return Err(Error::Quadrature { lo, hi });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.half_width(lambda, mid)? < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(Some(0.5 * (lo + hi)))
    }
}

/// Residuals of the two conditions at `λ` on the large-amplitude branch.
#[derive(Debug, Clone, Copy)]
pub struct TimemapResiduals {
    pub amplitude: f64,
    /// `half_width − ½`.
    pub half_width: f64,
    pub action: f64,
}

/// `None` when no positive solution fits in `(0,1)` at this `λ`.
pub fn timemap_residuals(lambda: f64) -> Result<Option<TimemapResiduals>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput("λ must be positive".into()));
    }
    let rules = Rules::new();
    let Some(m) = rules.branch_amplitude(lambda)? else { return Ok(None) };
    Ok(Some(TimemapResiduals {
        amplitude: m,
        half_width: rules.half_width(lambda, m)? - 0.5,
        action: rules.action(lambda, m)?,
    }))
}

/// Continuum `λ*`: outer bisection in `λ` on the sign of the branch action,
/// inner bisection in `M` on the half-width. Stops once `|action| ≤ tol` and
/// the bracket is tight.
pub fn lambda_star_timemap(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let below = |lambda: f64| -> Result<(bool, f64)> {
        Ok(match timemap_residuals(lambda)? {
            Some(r) => (r.action < 0.0, r.action),
            None => (false, f64::INFINITY),
        })
    };
    let mut hi = 1.0;
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < 1e-6 {
            return Err(Error::DegenerateFamily { lo: 1e-6, hi: 1.0 });
        }
        if below(lo)?.0 {
            break;
        }
        hi = lo;
    }
    let mut last = f64::NAN;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (is_below, act) = below(mid)?;
        last = act;
        if is_below {
            lo = mid;
        } else {
            hi = mid;
        }
        if act.abs() <= tol && hi - lo <= tol * mid {
            return Ok(mid);
        }
        if hi - lo <= 2.0 * f64::EPSILON * mid {
            break;
        }
    }
    if last.abs() <= tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::Quadrature { lo, hi })
    }
}
