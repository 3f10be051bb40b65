//! The one-dimensional cross-section problem `−φ'' = f(φ)` on `(0,1)` with
//! Dirichlet ends, its action
//!
//! ```text
//! I(φ) = ∫₀¹ ½ φ'² − F(φ) dx,
//! ```
//!
//! and the calibration of the quintic family to the critical parameter `λ*`
//! at which a positive profile of zero action appears.

mod shooting;
mod timemap;

pub use shooting::{bvp_by_shooting, shoot, Trajectory, DEFAULT_SLOPE_SCAN};
pub use timemap::{lambda_star_timemap, timemap_residuals, TimemapResiduals};

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::descent::{self, DescentOptions, Objective};
use crate::nonlinearity::{Nonlinearity, QuinticParams};
use crate::tridiag::{SymTridiagonal, ToeplitzSolver};
use crate::{Error, Result};

/// Max-norm below which a minimizer counts as the zero profile.
pub const COLLAPSE_THRESHOLD: f64 = 1e-3;
/// Energies below `-EPS_NEG` are certainly negative at the default resolution.
pub const EPS_NEG: f64 = 1e-6;
/// Amplitudes of the sine starts, in units of the positive root `1/√λ` of `f_λ`.
pub const START_AMPLITUDES: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

/// Nodal values of a profile on the uniform grid `x_i = i/nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionProfile {
    values: Vec<f64>,
    /// Discrete action `I` at `lambda` (NaN until evaluated).
    pub action: f64,
    pub lambda: f64,
}

impl CrossSectionProfile {
    /// Wraps nodal values; both end values must be exactly zero.
    pub fn new(values: Vec<f64>, lambda: f64) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput("profile needs nx >= 2".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::InvalidInput("profile end values must be zero".into()));
        }
        Ok(Self { values, action: f64::NAN, lambda })
    }

    pub fn zero(nx: usize) -> Self {
        Self { values: vec![0.0; nx + 1], action: 0.0, lambda: f64::NAN }
    }

    /// Samples `g` at the interior nodes.
    pub fn from_fn(nx: usize, mut g: impl FnMut(f64) -> f64) -> Self {
        let mut values: Vec<f64> = (0..=nx).map(|i| g(i as f64 / nx as f64)).collect();
        values[0] = 0.0;
        values[nx] = 0.0;
        Self { values, action: f64::NAN, lambda: f64::NAN }
    }

    pub fn sine(nx: usize, amplitude: f64) -> Self {
        Self::from_fn(nx, |x| amplitude * libm::sin(PI * x))
    }

    pub fn nx(&self) -> usize {
        self.values.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.nx() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.nx() as f64
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the (first) maximal value.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_positive(&self) -> bool {
        self.values[1..self.nx()].iter().all(|v| *v > 0.0)
    }

    pub fn abs(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.abs()).collect(), action: f64::NAN, lambda: self.lambda }
    }

    /// Recomputes `action` at `params` and returns `self`.
    pub fn with_action(mut self, params: &QuinticParams) -> Self {
        self.action = action(&self.values, params);
        self.lambda = params.lambda();
        self
    }
}

/// Trapezoid weight of node `i` out of `0..=n`.
#[inline]
pub(crate) fn trap(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

fn action<N: Nonlinearity + ?Sized>(v: &[f64], nl: &N) -> f64 {
    let nx = v.len() - 1;
    let h = 1.0 / nx as f64;
    let mut grad = 0.0;
    let mut pot = 0.0;
    for i in 0..nx {
        let d = v[i + 1] - v[i];
        grad += d * d;
    }
    for (i, x) in v.iter().enumerate() {
        pot += trap(i, nx) * nl.primitive(*x);
    }
    0.5 * grad / h - h * pot
}

/// Discrete action: forward differences on each interval for `½φ'²`,
/// composite trapezoid rule for `F(φ)`.
pub fn energy_i<N: Nonlinearity + ?Sized>(profile: &CrossSectionProfile, nl: &N) -> Result<f64> {
    Ok(action(&profile.values, nl))
}

/// Exact gradient of [`energy_i`]: `h·(−D²φ − f(φ))` inside, zero at both ends.
pub fn grad_i<N: Nonlinearity + ?Sized>(profile: &CrossSectionProfile, nl: &N) -> Result<Vec<f64>> {
    let mut g = vec![0.0; profile.values.len()];
    gradient_into(&profile.values, nl, &mut g);
    Ok(g)
}

fn gradient_into<N: Nonlinearity + ?Sized>(v: &[f64], nl: &N, g: &mut [f64]) {
    let nx = v.len() - 1;
    let h = 1.0 / nx as f64;
    g[0] = 0.0;
    g[nx] = 0.0;
    for i in 1..nx {
        g[i] = (2.0 * v[i] - v[i - 1] - v[i + 1]) / h - h * nl.f(v[i]);
    }
}

struct ActionObjective<'a> {
    params: &'a QuinticParams,
    n: usize,
    laplacian: ToeplitzSolver,
}

impl<'a> ActionObjective<'a> {
    fn new(params: &'a QuinticParams, nx: usize) -> Self {
        let h = 1.0 / nx as f64;
        // Metric h·(−D²) on the interior nodes: the discrete H¹₀ inner product.
        Self { params, n: nx + 1, laplacian: ToeplitzSolver::new(nx - 1, 0.0, 1.0 / h) }
    }
}

impl Objective for ActionObjective<'_> {
    fn dim(&self) -> usize {
        self.n
    }
    fn energy(&self, x: &[f64]) -> f64 {
        action(x, self.params)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        gradient_into(x, self.params, g)
    }
    fn project(&self, x: &mut [f64]) {
        x[0] = 0.0;
        x[self.n - 1] = 0.0;
    }
    fn energy_difference(&self, x: &[f64], y: &[f64]) -> f64 {
        let nx = self.n - 1;
        let h = 1.0 / nx as f64;
        let (mut grad, mut pot) = (0.0, 0.0);
        for i in 0..nx {
            let (a, b) = (x[i + 1] - x[i], y[i + 1] - y[i]);
            let d = (y[i + 1] - x[i + 1]) - (y[i] - x[i]);
            grad += d * (a + b);
        }
        for i in 0..=nx {
            pot += trap(i, nx) * self.params.primitive_difference(x[i], y[i]);
        }
        0.5 * grad / h - h * pot
    }
    fn precondition(&self, g: &[f64], out: &mut [f64]) {
        out.copy_from_slice(g);
        out[0] = 0.0;
        out[self.n - 1] = 0.0;
        self.laplacian.solve_in_place(&mut out[1..self.n - 1]);
    }
    fn metric(&self, s: &[f64], out: &mut [f64]) {
        let inv_h = (self.n - 1) as f64;
        out[0] = 0.0;
        out[self.n - 1] = 0.0;
        for i in 1..self.n - 1 {
            out[i] = (2.0 * s[i] - s[i - 1] - s[i + 1]) * inv_h;
        }
    }
}

/// Tolerances for the cross-section descent.
#[derive(Debug, Clone, Copy)]
pub struct CrossSectionOptions {
    /// Stop when the max-norm of the gradient (of [`energy_i`], which carries
    /// a factor `h`) falls below `grad_tol_per_node · nx`.
    pub grad_tol_per_node: f64,
    pub max_iter: usize,
}

impl Default for CrossSectionOptions {
    fn default() -> Self {
        Self { grad_tol_per_node: 1e-9, max_iter: 100_000 }
    }
}

impl CrossSectionOptions {
    /// Tight setting used for the profile that becomes a boundary state.
    pub fn polished() -> Self {
        Self { grad_tol_per_node: 1e-14, max_iter: 100_000 }
    }

    fn descent(&self, nx: usize) -> DescentOptions {
        DescentOptions {
            grad_tol: self.grad_tol_per_node * nx as f64,
            max_iter: self.max_iter,
            initial_step: Some(1.0),
            ..Default::default()
        }
    }
}

/// Result of a multistart minimization.
#[derive(Debug, Clone)]
pub struct Minimization {
    pub minimizer: CrossSectionProfile,
    pub m: f64,
    /// Converged endpoint of every start, in start order (zero start first).
    pub endpoints: Vec<CrossSectionProfile>,
}

/// The default sine starts `a·sin(πx)` with `a ∈ START_AMPLITUDES · 1/√λ`.
pub fn default_starts(params: &QuinticParams, nx: usize) -> Vec<CrossSectionProfile> {
    let scale = if params.lambda() > 0.0 { params.positive_root() } else { 1.0 };
    START_AMPLITUDES.iter().map(|a| CrossSectionProfile::sine(nx, a * scale)).collect()
}

/// Unconstrained BB descent of the action from the zero profile and every
/// start; returns the lowest-energy endpoint (earliest start wins ties).
pub fn minimize_i(params: &QuinticParams, nx: usize, starts: &[CrossSectionProfile]) -> Result<Minimization> {
    minimize_i_with(params, nx, starts, &CrossSectionOptions::default())
}

pub fn minimize_i_with(
    params: &QuinticParams,
    nx: usize,
    starts: &[CrossSectionProfile],
    opts: &CrossSectionOptions,
) -> Result<Minimization> {
    if nx < 2 {
        return Err(Error::InvalidInput("nx must be at least 2".into()));
    }
    if params.lambda() <= 0.0 {
        return Err(Error::InvalidInput("the action is unbounded below for λ = 0".into()));
    }
    let obj = ActionObjective::new(params, nx);
    let mut endpoints = Vec::with_capacity(starts.len() + 1);
    endpoints.push(CrossSectionProfile::zero(nx).with_action(params));
    for s in starts {
        if s.nx() != nx {
            return Err(Error::InvalidInput("start resolution does not match nx".into()));
        }
        let out = descent::minimize(&obj, s.values.clone(), &opts.descent(nx))?;
        let p = CrossSectionProfile { values: newton_polish(out.x, params), action: out.energy, lambda: params.lambda() };
        endpoints.push(p.with_action(params));
    }
    let mut best = 0;
    for (k, p) in endpoints.iter().enumerate() {
        if p.action < endpoints[best].action {
            best = k;
        }
    }
    let minimizer = endpoints[best].clone();
    let m = minimizer.action;
    Ok(Minimization { minimizer, m, endpoints })
}

/// A few Newton steps on `∇I = 0` from a descent endpoint, which leave the
/// energy-resolution floor of the line search behind. Steps are kept only
/// while they are small and shrink the residual.
fn newton_polish(mut v: Vec<f64>, params: &QuinticParams) -> Vec<f64> {
    let nx = v.len() - 1;
    if nx < 2 {
        return v;
    }
    let h = 1.0 / nx as f64;
    let mut g = vec![0.0; nx + 1];
    gradient_into(&v, params, &mut g);
    let mut res = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    for _ in 0..8 {
        let diag: Vec<f64> = (1..nx).map(|i| 2.0 / h - h * params.derivative(v[i])).collect();
        let jac = SymTridiagonal::new(diag, vec![-1.0 / h; nx - 2]);
        let Ok(step) = jac.solve_shifted(0.0, &g[1..nx]) else { break };
        if step.iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-3 * scale {
            break;
        }
        let mut trial = v.clone();
        for (t, d) in trial[1..nx].iter_mut().zip(&step) {
            *t -= d;
        }
        let mut g_trial = vec![0.0; nx + 1];
        gradient_into(&trial, params, &mut g_trial);
        let r = g_trial.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(r < res) {
            break;
        }
        v = trial;
        g = g_trial;
        res = r;
    }
    v
}

/// Outcome of the `λ*` calibration.
#[derive(Debug, Clone)]
pub struct LambdaStarResult {
    pub lambda_star: f64,
    /// Final bisection bracket `(lo, hi)`: nonzero minimizer at `lo`,
    /// collapse to zero at `hi`.
    pub bracket: (f64, f64),
    /// Minimal positive zero-action profile at `lambda_star`.
    pub phi: CrossSectionProfile,
    /// `(λ, m_λ)` for every evaluated `λ`, in evaluation order.
    pub m_trace: Vec<(f64, f64)>,
    /// Whether all zero-action candidates were pointwise ordered.
    pub candidates_ordered: bool,
    pub candidates: Vec<CrossSectionProfile>,
}

struct Probe {
    nonzero: Option<CrossSectionProfile>,
}

fn probe(lambda: f64, nx: usize, warm: Option<&CrossSectionProfile>, trace: &mut Vec<(f64, f64)>) -> Result<Probe> {
    let params = QuinticParams::new(lambda).ok_or_else(|| Error::InvalidInput("negative λ".into()))?;
    let mut starts = default_starts(&params, nx);
    if let Some(w) = warm {
        starts.push(w.clone());
    }
    let min = minimize_i(&params, nx, &starts)?;
    trace.push((lambda, min.m));
    let nonzero = (min.minimizer.max_norm() >= COLLAPSE_THRESHOLD && min.m < 0.0).then_some(min.minimizer);
    Ok(Probe { nonzero })
}

/// Calibrates `λ*` on a grid with `nx` intervals.
///
/// A bracket is found by halving/doubling from `λ = 1` inside `[1e-4, 1e4]`,
/// then bisected to width `tol` on "nonzero minimizer with `m_λ < 0`" versus
/// "minimizer collapses to 0". The bisected value is finally polished by a
/// Newton iteration on the action of the nonzero branch, using
/// `d I_λ(φ_λ)/dλ = Σ h φ⁶/6`, and the minimal positive minimizer at the
/// polished `λ*` is returned.
pub fn lambda_star_bisection(nx: usize, tol: f64) -> Result<LambdaStarResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let mut trace = Vec::new();
    let (lo_lim, hi_lim) = (1e-4, 1e4);

    let mut lam = 1.0;
    let first = probe(lam, nx, None, &mut trace)?;
    let (mut lo, mut hi, mut warm);
    if first.nonzero.is_some() {
        lo = lam;
        warm = first.nonzero;
        loop {
            lam *= 2.0;
            if lam > hi_lim {
                return Err(Error::DegenerateFamily { lo: lo_lim, hi: hi_lim });
            }
            let p = probe(lam, nx, warm.as_ref(), &mut trace)?;
            match p.nonzero {
                Some(z) => {
                    lo = lam;
                    warm = Some(z);
                }
                None => {
                    hi = lam;
                    break;
                }
            }
        }
    } else {
        hi = lam;
        loop {
            lam *= 0.5;
            if lam < lo_lim {
                return Err(Error::DegenerateFamily { lo: lo_lim, hi: hi_lim });
            }
            let p = probe(lam, nx, None, &mut trace)?;
            match p.nonzero {
                Some(z) => {
                    lo = lam;
                    warm = Some(z);
                    break;
                }
                None => hi = lam,
            }
        }
    }

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = probe(mid, nx, warm.as_ref(), &mut trace)?;
        match p.nonzero {
            Some(z) => {
                lo = mid;
                warm = Some(z);
            }
            None => hi = mid,
        }
    }

    let warm = warm.expect("bracket has a nonzero minimizer at its lower end");
    let lambda_star = polish_lambda(nx, lo, hi, warm.clone())?;
    let params = QuinticParams::new(lambda_star).expect("positive λ");
    let mm = minimal_minimizer_with_hint(&params, nx, Some(&warm))?;
    trace.push((lambda_star, mm.phi.action.min(0.0)));
    Ok(LambdaStarResult {
        lambda_star,
        bracket: (lo, hi),
        phi: mm.phi,
        m_trace: trace,
        candidates_ordered: mm.ordered,
        candidates: mm.candidates,
    })
}

/// Newton on `λ ↦ I_λ(φ_λ)` along the nonzero branch, kept inside `[lo, hi]`.
fn polish_lambda(nx: usize, lo: f64, hi: f64, mut branch: CrossSectionProfile) -> Result<f64> {
    let h = 1.0 / nx as f64;
    let mut lam = lo;
    let opts = CrossSectionOptions::polished();
    for _ in 0..30 {
        let params = QuinticParams::new(lam).expect("positive λ");
        let min = minimize_i_with(&params, nx, core::slice::from_ref(&branch), &opts)?;
        // endpoints[1] is the descent from the branch start.
        let p = min.endpoints[1].clone();
        if p.max_norm() < COLLAPSE_THRESHOLD {
            break;
        }
        let slope: f64 = p.values.iter().map(|v| h * libm::pow(*v, 6.0) / 6.0).sum();
        let next = (lam - p.action / slope).clamp(lo, hi);
        branch = p;
        if (next - lam).abs() <= 4.0 * f64::EPSILON * lam {
            lam = next;
            break;
        }
        lam = next;
    }
    Ok(lam)
}

/// Minimal positive zero-action profile at `params` and its competitors.
#[derive(Debug, Clone)]
pub struct MinimalMinimizer {
    pub phi: CrossSectionProfile,
    pub candidates: Vec<CrossSectionProfile>,
    pub ordered: bool,
}

/// Zero-action tolerance used to admit a candidate.
pub const ZERO_ACTION_TOL: f64 = 1e-8;

/// Among the positive zero-action profiles reached by multistart descent
/// (sine starts plus the shooting solution used as a start), returns the one
/// of smallest max-norm and whether all candidates are pointwise ordered.
pub fn minimal_minimizer(params: &QuinticParams, nx: usize) -> Result<MinimalMinimizer> {
    minimal_minimizer_with_hint(params, nx, None)
}

fn minimal_minimizer_with_hint(
    params: &QuinticParams,
    nx: usize,
    hint: Option<&CrossSectionProfile>,
) -> Result<MinimalMinimizer> {
    let mut starts = default_starts(params, nx);
    if let Some(h) = hint {
        starts.push(h.clone());
    }
    if let Ok(s) = bvp_by_shooting(params, nx, 64 * nx) {
        starts.push(s);
    }
    let min = minimize_i_with(params, nx, &starts, &CrossSectionOptions::polished())?;
    let scale = min.endpoints.iter().fold(1.0f64, |m, p| m.max(p.max_norm()));
    let mut candidates: Vec<CrossSectionProfile> = Vec::new();
    for p in min.endpoints.into_iter().skip(1) {
        if p.max_norm() < COLLAPSE_THRESHOLD || !p.is_positive() || p.action.abs() > ZERO_ACTION_TOL * scale {
            continue;
        }
        if !candidates.iter().any(|c| max_diff(c, &p) <= 1e-9 * scale) {
            candidates.push(p);
        }
    }
    if candidates.is_empty() {
        return Err(Error::H2Violated { lambda: params.lambda() });
    }
    let mut best = 0;
    for (k, c) in candidates.iter().enumerate() {
        if c.max_norm() < candidates[best].max_norm() {
            best = k;
        }
    }
    let phi = candidates[best].clone();
    let ordered = candidates.iter().all(|c| c.values.iter().zip(&phi.values).all(|(a, b)| *a >= b - 1e-6));
    Ok(MinimalMinimizer { phi, candidates, ordered })
}

pub(crate) fn max_diff(a: &CrossSectionProfile, b: &CrossSectionProfile) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
