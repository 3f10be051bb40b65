//! Projected gradient descent with Barzilai–Borwein steps.
//!
//! Monotone variant: every accepted iterate lowers the energy (Armijo
//! backtracking along the projected BB direction). Objectives may supply a
//! symmetric positive definite metric `K`; the descent then follows the
//! gradient in that metric, `K⁻¹∇E`, and the BB step is measured in it,
//! `α = sᵀKs / sᵀy`.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A smooth energy on `ℝᵈ` with a (possibly trivial) projection onto a
/// closed convex feasible set.
pub trait Objective {
    fn dim(&self) -> usize;
    fn energy(&self, x: &[f64]) -> f64;
    /// Writes `∇E(x)` into `grad`. Entries of frozen (Dirichlet) coordinates
    /// must be zero.
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    fn project(&self, _x: &mut [f64]) {}
    /// `E(y) − E(x)`. Override with a formula that sums local differences
    /// when `E` is a large sum that nearly cancels: the line search compares
    /// these differences against the predicted decrease.
    fn energy_difference(&self, x: &[f64], y: &[f64]) -> f64 {
        self.energy(y) - self.energy(x)
    }
    /// `out = K⁻¹ g`. Identity by default.
    fn precondition(&self, g: &[f64], out: &mut [f64]) {
        out.copy_from_slice(g);
    }
    /// `out = K s`. Must be the inverse of [`Objective::precondition`].
    fn metric(&self, s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(s);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    /// Stop once `‖P(x − ∇E) − x‖∞ ≤ grad_tol`.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub step_min: f64,
    pub step_max: f64,
    /// First BB step; defaults to `1/‖∇E(x₀)‖∞` when `None`.
    pub initial_step: Option<f64>,
    pub armijo: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iter: 200_000,
            step_min: 1e-30,
            step_max: 1e30,
            initial_step: None,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Max-norm of the projected gradient step `P(x − g) − x`.
pub fn projected_gradient_norm<O: Objective + ?Sized>(obj: &O, x: &[f64], g: &[f64], scratch: &mut [f64]) -> f64 {
    for ((s, xi), gi) in scratch.iter_mut().zip(x).zip(g) {
        *s = xi - gi;
    }
    obj.project(scratch);
    scratch.iter().zip(x).map(|(s, xi)| (s - xi).abs()).fold(0.0, f64::max)
}

/// `dir = P(x − α·step) − x`; returns the directional derivative `∇E·dir`.
fn projected_step<O: Objective + ?Sized>(obj: &O, x: &[f64], g: &[f64], step: &[f64], alpha: f64, dir: &mut [f64]) -> f64 {
    for ((d, xi), si) in dir.iter_mut().zip(x).zip(step) {
        *d = xi - alpha * si;
    }
    obj.project(dir);
    let mut slope = 0.0;
    for ((d, xi), gi) in dir.iter_mut().zip(x).zip(g) {
        *d -= xi;
        slope += gi * *d;
    }
    slope
}

/// Minimizes `obj` starting from `x0`.
///
/// On hitting the iteration cap returns [`Error::NotConverged`] carrying the
/// best iterate.
pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: Vec<f64>, opts: &DescentOptions) -> Result<DescentOutcome> {
    let n = obj.dim();
    assert_eq!(x0.len(), n);
    let mut x = x0;
    obj.project(&mut x);
    let mut g = vec![0.0; n];
    obj.gradient(&x, &mut g);
    let mut scratch = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut pg_dir = vec![0.0; n];
    let mut ks = vec![0.0; n];

    obj.precondition(&g, &mut pg_dir);
    let gmax = pg_dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut alpha = opts
        .initial_step
        .unwrap_or(if gmax > 0.0 { 1.0 / gmax } else { 1.0 })
        .clamp(opts.step_min, opts.step_max);

    for it in 0..opts.max_iter {
        let pg = projected_gradient_norm(obj, &x, &g, &mut scratch);
        if pg <= opts.grad_tol {
            return Ok(DescentOutcome { energy: obj.energy(&x), x, iterations: it, grad_norm: pg });
        }

        obj.precondition(&g, &mut pg_dir);
        let mut slope = projected_step(obj, &x, &g, &pg_dir, alpha, &mut dir);
        if !(slope < 0.0) {
            // The projected metric step is not a descent direction: fall back
            // to the Euclidean gradient with a step of the same size.
            let a = pg_dir.iter().fold(0.0f64, |m, v| m.max(v.abs())) * alpha / pg.max(f64::MIN_POSITIVE);
            slope = projected_step(obj, &x, &g, &g, a, &mut dir);
        }

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for ((tr, xi), d) in trial.iter_mut().zip(&x).zip(&dir) {
                *tr = xi + t * d;
            }
            let de = obj.energy_difference(&x, &trial);
            if de <= opts.armijo * t * slope {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Direction no longer resolvable in floating point.
            return Ok(DescentOutcome { energy: obj.energy(&x), x, iterations: it, grad_norm: pg });
        }

        obj.gradient(&trial, &mut g_new);
        for i in 0..n {
            dir[i] = trial[i] - x[i];
        }
        obj.metric(&dir, &mut ks);
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..n {
            ss += dir[i] * ks[i];
            sy += dir[i] * (g_new[i] - g[i]);
        }
        alpha = if sy > 0.0 { ss / sy } else { opts.step_max };
        alpha = alpha.clamp(opts.step_min, opts.step_max);
        core::mem::swap(&mut x, &mut trial);
        core::mem::swap(&mut g, &mut g_new);
    }

    let pg = projected_gradient_norm(obj, &x, &g, &mut scratch);
    if pg <= opts.grad_tol {
        return Ok(DescentOutcome { energy: obj.energy(&x), x, iterations: opts.max_iter, grad_norm: pg });
    }
    Err(Error::NotConverged { iterations: opts.max_iter, grad_norm: pg, energy: obj.energy(&x), best: x })
}
