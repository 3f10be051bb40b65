//! Truncated minimization on `(0,1) × (−n, n)` and continuation in `n`.
//!
//! Fields are stored slice by slice: `values[j * (nx + 1) + i]` is the value
//! at `x = i·hx`, `z = −L + j·hz`.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::cross_section::CrossSectionProfile;
use crate::descent::{self, DescentOptions, Objective};
use crate::diagnostics;
use crate::nonlinearity::{Nonlinearity, QuinticParams};
use crate::tridiag::ToeplitzSolver;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderField {
    nx: usize,
    nz: usize,
    half_length: f64,
    values: Vec<f64>,
    /// Height of the half-maximum crossing left over after recentering by
    /// whole slices; zero for fields that were never recentered.
    pub shift: f64,
}

impl CylinderField {
    /// Checks the shape, finiteness and the lateral zero columns.
    pub fn new(nx: usize, nz: usize, half_length: f64, values: Vec<f64>) -> Result<Self> {
        if nx < 2 || nz < 2 {
            return Err(Error::InvalidInput("a field needs nx, nz ≥ 2".into()));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidInput("half-length must be positive".into()));
        }
        if values.len() != (nx + 1) * (nz + 1) {
            return Err(Error::InvalidInput("value count does not match the grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite field value".into()));
        }
        let f = Self { nx, nz, half_length, values, shift: 0.0 };
        for j in 0..=nz {
            if f.get(0, j) != 0.0 || f.get(nx, j) != 0.0 {
                return Err(Error::InvalidInput("lateral boundary values must vanish".into()));
            }
        }
        Ok(f)
    }

    pub fn from_fn(nx: usize, nz: usize, half_length: f64, mut g: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let (hx, hz) = (1.0 / nx as f64, 2.0 * half_length / nz as f64);
        let mut values = vec![0.0; (nx + 1) * (nz + 1)];
        for j in 0..=nz {
            for i in 1..nx {
                values[j * (nx + 1) + i] = g(i as f64 * hx, -half_length + j as f64 * hz);
            }
        }
        Self::new(nx, nz, half_length, values)
    }

    /// `ξ(z)·φ(x)`.
    pub fn separable(phi: &CrossSectionProfile, nz: usize, half_length: f64, mut xi: impl FnMut(f64) -> f64) -> Result<Self> {
        let nx = phi.nx();
        let mut f = Self::new(nx, nz, half_length, vec![0.0; (nx + 1) * (nz + 1)])?;
        for j in 0..=nz {
            let w = xi(f.z(j));
            f.row_mut(j).iter_mut().zip(phi.values()).for_each(|(v, q)| *v = w * q);
        }
        Ok(f)
    }

    /// The limit configuration: `0` for `z < 0`, `φ` for `z > 0`, `φ/2` on `z = 0`.
    pub fn step(phi: &CrossSectionProfile, nz: usize, half_length: f64) -> Result<Self> {
        Self::separable(phi, nz, half_length, |z| if z > 0.0 { 1.0 } else if z < 0.0 { 0.0 } else { 0.5 })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nz(&self) -> usize {
        self.nz
    }
    pub fn half_length(&self) -> f64 {
        self.half_length
    }
    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }
    pub fn hz(&self) -> f64 {
        2.0 * self.half_length / self.nz as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }
    pub fn z(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.hz()
    }
    /// Slice-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * (self.nx + 1) + i] = v;
    }
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * (self.nx + 1)..(j + 1) * (self.nx + 1)]
    }
    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let w = self.nx + 1;
        &mut self.values[j * w..(j + 1) * w]
    }
    /// Nearest slice index to height `z`, clamped to the grid.
    pub fn slice_at(&self, z: f64) -> usize {
        let j = libm::round((z + self.half_length) / self.hz());
        j.clamp(0.0, self.nz as f64) as usize
    }

    fn check_phi(&self, phi: &CrossSectionProfile) -> Result<()> {
        if phi.nx() != self.nx {
            return Err(Error::InvalidInput("profile and field x-grids differ".into()));
        }
        Ok(())
    }
}

#[inline]
fn trap(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

fn energy_of<N: Nonlinearity + ?Sized>(v: &[f64], nx: usize, nz: usize, hx: f64, hz: f64, nl: &N) -> f64 {
    let w = nx + 1;
    let (mut ex, mut ez, mut pot) = (0.0, 0.0, 0.0);
    for j in 0..=nz {
        let row = &v[j * w..(j + 1) * w];
        let (mut sx, mut sp) = (0.0, 0.0);
        for i in 0..nx {
            let d = row[i + 1] - row[i];
            sx += d * d;
        }
        for (i, u) in row.iter().enumerate() {
            sp += trap(i, nx) * nl.primitive(*u);
        }
        ex += trap(j, nz) * sx;
        pot += trap(j, nz) * sp;
        if j < nz {
            let next = &v[(j + 1) * w..(j + 2) * w];
            let mut sz = 0.0;
            for i in 0..=nx {
                let d = next[i] - row[i];
                sz += trap(i, nx) * d * d;
            }
            ez += sz;
        }
    }
    0.5 * ex * hz / hx + 0.5 * ez * hx / hz - hx * hz * pot
}

/// Discrete `J`: forward differences on every edge for `½|∇u|²` and the
/// tensor trapezoid rule for `F(u)`. On a `z`-independent field it equals
/// `2L` times the discrete cross-section action of its slice.
pub fn energy_j(field: &CylinderField, params: &QuinticParams) -> f64 {
    energy_of(&field.values, field.nx, field.nz, field.hx(), field.hz(), params)
}

fn gradient_of<N: Nonlinearity + ?Sized>(v: &[f64], nx: usize, nz: usize, hx: f64, hz: f64, nl: &N, g: &mut [f64]) {
    let w = nx + 1;
    let (cx, cz, c0) = (hz / hx, hx / hz, hx * hz);
    g.iter_mut().for_each(|x| *x = 0.0);
    for j in 1..nz {
        for i in 1..nx {
            let k = j * w + i;
            let u = v[k];
            g[k] = cx * (2.0 * u - v[k - 1] - v[k + 1]) + cz * (2.0 * u - v[k - w] - v[k + w]) - c0 * nl.f(u);
        }
    }
}

/// Exact gradient of [`energy_j`]; interior entries are
/// `hx·hz·(−Δ₅u − f(u))`, Dirichlet rows and columns are zero.
pub fn grad_j(field: &CylinderField, params: &QuinticParams) -> Vec<f64> {
    let mut g = vec![0.0; field.values.len()];
    gradient_of(&field.values, field.nx, field.nz, field.hx(), field.hz(), params, &mut g);
    g
}

/// Max-norm of `−Δ₅u − f(u)` over interior nodes.
pub fn pde_residual(field: &CylinderField, params: &QuinticParams) -> f64 {
    let c0 = field.hx() * field.hz();
    grad_j(field, params).iter().fold(0.0f64, |m, g| m.max(g.abs())) / c0
}

/// Clips every interior value into `[0, φ(x_i)]`; Dirichlet rows are kept.
pub fn project_box(field: &CylinderField, phi: &CrossSectionProfile) -> Result<CylinderField> {
    field.check_phi(phi)?;
    let mut out = field.clone();
    clip(&mut out.values, field.nx, field.nz, phi.values());
    Ok(out)
}

fn clip(v: &mut [f64], nx: usize, nz: usize, phi: &[f64]) {
    let w = nx + 1;
    for j in 1..nz {
        for i in 1..nx {
            let u = &mut v[j * w + i];
            *u = u.clamp(0.0, phi[i].max(0.0));
        }
    }
}

/// Resolution and stopping parameters shared by the truncated solves and
/// the continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub nx: usize,
    /// Slices per unit height; `n·nz_per_unit` must be an integer.
    pub nz_per_unit: usize,
    /// Tolerance on the max-norm of the interior PDE residual `−Δ₅u − f(u)`.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub ramp_width: f64,
    pub n_schedule: Vec<f64>,
    pub eps_tail: f64,
    pub eps_h: f64,
    /// Keep going through the whole schedule even after the tail criteria
    /// hold.
    pub exhaust_schedule: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            nz_per_unit: 64,
            grad_tol: 1e-8,
            max_iter: 50_000,
            ramp_width: 1.0,
            n_schedule: vec![4.0, 6.0, 8.0, 12.0],
            eps_tail: 1e-2,
            eps_h: 1e-3,
            exhaust_schedule: true,
        }
    }
}

impl SolverConfig {
    fn slices(&self, n: f64) -> Result<usize> {
        let half = n * self.nz_per_unit as f64;
        let r = libm::round(half);
        if !(n >= 2.0) || (half - r).abs() > 1e-9 * half.max(1.0) {
            return Err(Error::InvalidInput("n must be at least 2 with n·nz_per_unit integral".into()));
        }
        Ok(2 * r as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSolveReport {
    pub n: f64,
    /// Minimum of the truncated energy.
    pub c_n: f64,
    /// Hamiltonian at the bottom `z = −n`.
    pub h_n: f64,
    /// Half-maximum crossing height of the `argmax φ` column.
    pub z_n: f64,
    pub iterations: usize,
    /// Final projected gradient norm of `J` (same scale as [`grad_j`]).
    pub grad_norm: f64,
}

/// `J` restricted to the interior unknowns, with the fast Dirichlet
/// Laplacian `hx·hz·(−Δ₅)` as metric.
struct CylinderObjective<'a> {
    nx: usize,
    nz: usize,
    hx: f64,
    hz: f64,
    params: &'a QuinticParams,
    phi: &'a [f64],
    /// `sin(kπi/nx)` for `k, i = 1..nx`, row-major in `k`.
    sines: Vec<f64>,
    /// One tridiagonal solver in `z` per sine mode.
    modes: Vec<ToeplitzSolver>,
    scratch: RefCell<Vec<f64>>,
}

impl<'a> CylinderObjective<'a> {
    fn new(nx: usize, nz: usize, hx: f64, hz: f64, params: &'a QuinticParams, phi: &'a [f64]) -> Self {
        let m = nx - 1;
        let mut sines = vec![0.0; m * m];
        for k in 0..m {
            for i in 0..m {
                // Reduce the argument to keep the table exactly symmetric.
                let p = ((k + 1) * (i + 1)) % (2 * nx);
                sines[k * m + i] = libm::sin(core::f64::consts::PI * p as f64 / nx as f64);
            }
        }
        let modes = (1..nx)
            .map(|k| {
                let s = libm::sin(core::f64::consts::PI * k as f64 / (2.0 * nx as f64));
                let mu = 4.0 * s * s / (hx * hx);
                ToeplitzSolver::new(nz - 1, hx * hz * mu, hx / hz)
            })
            .collect();
        Self { nx, nz, hx, hz, params, phi, sines, modes, scratch: RefCell::new(vec![0.0; m * (nz - 1)]) }
    }
}

impl Objective for CylinderObjective<'_> {
    fn dim(&self) -> usize {
        (self.nx + 1) * (self.nz + 1)
    }
    fn energy(&self, x: &[f64]) -> f64 {
        energy_of(x, self.nx, self.nz, self.hx, self.hz, self.params)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        gradient_of(x, self.nx, self.nz, self.hx, self.hz, self.params, g);
    }
    fn project(&self, x: &mut [f64]) {
        clip(x, self.nx, self.nz, self.phi);
    }
    fn energy_difference(&self, x: &[f64], y: &[f64]) -> f64 {
        // Only interior nodes move, so only edges touching them contribute.
        let (nx, nz, w) = (self.nx, self.nz, self.nx + 1);
        let (mut ex, mut ez, mut pot) = (0.0, 0.0, 0.0);
        for j in 1..nz {
            for i in 0..nx {
                let k = j * w + i;
                let d = (y[k + 1] - x[k + 1]) - (y[k] - x[k]);
                ex += d * ((x[k + 1] - x[k]) + (y[k + 1] - y[k]));
            }
        }
        for j in 0..nz {
            for i in 1..nx {
                let k = j * w + i;
                let d = (y[k + w] - x[k + w]) - (y[k] - x[k]);
                ez += d * ((x[k + w] - x[k]) + (y[k + w] - y[k]));
            }
        }
        for j in 1..nz {
            for i in 1..nx {
                let k = j * w + i;
                pot += self.params.primitive_difference(x[k], y[k]);
            }
        }
        0.5 * ex * self.hz / self.hx + 0.5 * ez * self.hx / self.hz - self.hx * self.hz * pot
    }
    fn precondition(&self, g: &[f64], out: &mut [f64]) {
        let (nx, nz, w, m) = (self.nx, self.nz, self.nx + 1, self.nx - 1);
        let mut hat = self.scratch.borrow_mut();
        let norm = 2.0 / nx as f64;
        // Sine transform of each interior slice: hat[k][j].
        for j in 1..nz {
            let row = &g[j * w + 1..j * w + nx];
            for k in 0..m {
                let s = &self.sines[k * m..(k + 1) * m];
                let dot: f64 = s.iter().zip(row).map(|(a, b)| a * b).sum();
                hat[k * (nz - 1) + j - 1] = norm * dot;
            }
        }
        for (k, solver) in self.modes.iter().enumerate() {
            solver.solve_in_place(&mut hat[k * (nz - 1)..(k + 1) * (nz - 1)]);
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 1..nz {
            let row = &mut out[j * w + 1..j * w + nx];
            for k in 0..m {
                let a = hat[k * (nz - 1) + j - 1];
                let s = &self.sines[k * m..(k + 1) * m];
                row.iter_mut().zip(s).for_each(|(r, s)| *r += a * s);
            }
        }
    }
    fn metric(&self, s: &[f64], out: &mut [f64]) {
        let (nx, nz, w) = (self.nx, self.nz, self.nx + 1);
        let (cx, cz) = (self.hz / self.hx, self.hx / self.hz);
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 1..nz {
            for i in 1..nx {
                let k = j * w + i;
                // Frozen neighbours carry no step.
                let at = |q: usize, qi: usize, qj: usize| {
                    if qi == 0 || qi == nx || qj == 0 || qj == nz {
                        0.0
                    } else {
                        s[q]
                    }
                };
                out[k] = cx * (2.0 * s[k] - at(k - 1, i - 1, j) - at(k + 1, i + 1, j))
                    + cz * (2.0 * s[k] - at(k - w, i, j - 1) - at(k + w, i, j + 1));
            }
        }
    }
}

/// `ξ(z) = ½(1 + tanh(z/w))`, affinely rescaled to `0` at `−n` and `1` at `n`.
pub fn ramp(z: f64, n: f64, width: f64) -> f64 {
    let xi = |t: f64| 0.5 * (1.0 + libm::tanh(t / width));
    ((xi(z) - xi(-n)) / (xi(n) - xi(-n))).clamp(0.0, 1.0)
}

/// `ξ(z)·φ(x)` on `(0,1) × (−n, n)`.
pub fn ramp_field(n: f64, phi: &CrossSectionProfile, config: &SolverConfig) -> Result<CylinderField> {
    let nz = config.slices(n)?;
    let mut f = CylinderField::separable(phi, nz, n, |z| ramp(z, n, config.ramp_width))?;
    f.row_mut(0).iter_mut().for_each(|v| *v = 0.0);
    f.row_mut(nz).copy_from_slice(phi.values());
    Ok(f)
}

/// Minimizes `J_n` from the ramp initializer.
pub fn solve_truncated(
    n: f64,
    params: &QuinticParams,
    phi: &CrossSectionProfile,
    config: &SolverConfig,
) -> Result<(CylinderField, TruncatedSolveReport)> {
    let start = ramp_field(n, phi, config)?;
    solve_truncated_from(start, params, phi, config)
}

/// Minimizes `J_n` on the grid of `start`, from `start`. The bottom row is
/// reset to `0` and the top row to `φ`.
pub fn solve_truncated_from(
    start: CylinderField,
    params: &QuinticParams,
    phi: &CrossSectionProfile,
    config: &SolverConfig,
) -> Result<(CylinderField, TruncatedSolveReport)> {
    start.check_phi(phi)?;
    let n = start.half_length;
    if !(n >= 2.0) {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let (nx, nz, hx, hz) = (start.nx, start.nz, start.hx(), start.hz());
    let mut x = start.values;
    x[..=nx].iter_mut().for_each(|v| *v = 0.0);
    x[nz * (nx + 1)..].copy_from_slice(phi.values());

    let obj = CylinderObjective::new(nx, nz, hx, hz, params, phi.values());
    let opts = DescentOptions {
        grad_tol: config.grad_tol * hx * hz,
        max_iter: config.max_iter,
        initial_step: Some(1.0),
        ..Default::default()
    };
    let out = descent::minimize(&obj, x, &opts)?;
    let field = CylinderField { nx, nz, half_length: n, values: out.x, shift: 0.0 };
    let report = truncated_report(&field, params, phi, out.iterations, out.grad_norm)?;
    Ok((field, report))
}

fn truncated_report(
    field: &CylinderField,
    params: &QuinticParams,
    phi: &CrossSectionProfile,
    iterations: usize,
    grad_norm: f64,
) -> Result<TruncatedSolveReport> {
    Ok(TruncatedSolveReport {
        n: field.half_length,
        c_n: energy_j(field, params),
        h_n: diagnostics::bottom_hamiltonian(field, params),
        z_n: find_zn(field, phi)?,
        iterations,
        grad_norm,
    })
}

/// Height where the column through `argmax φ` first reaches `½ max φ`,
/// interpolated linearly; the midpoint of a flat run at exactly that level.
pub fn find_zn(field: &CylinderField, phi: &CrossSectionProfile) -> Result<f64> {
    field.check_phi(phi)?;
    let i = phi.argmax();
    let target = 0.5 * phi.max_norm();
    let col: Vec<f64> = (0..=field.nz).map(|j| field.get(i, j)).collect();
    let Some(first) = col.iter().position(|u| *u >= target) else {
        return Err(Error::DegenerateProfile("the column never reaches half of max φ".into()));
    };
    if first == 0 {
        return Err(Error::DegenerateProfile("the column starts above half of max φ".into()));
    }
    if col[first] == target {
        let last = first + col[first..].iter().take_while(|u| **u == target).count() - 1;
        return Ok(0.5 * (field.z(first) + field.z(last)));
    }
    let (a, b) = (col[first - 1], col[first]);
    Ok(field.z(first - 1) + field.hz() * (target - a) / (b - a))
}

/// Moves the field down by `round(z_n/hz)` slices; vacated slices take the
/// limit values (`0` below, `φ` above). The leftover fraction goes to `shift`.
pub fn recenter(field: &CylinderField, z_n: f64, phi: &CrossSectionProfile) -> CylinderField {
    let k = libm::round(z_n / field.hz()) as i64;
    let mut out = shifted(field, k, field.nz, phi);
    out.shift = z_n - k as f64 * field.hz();
    out
}

/// Field on `nz_new` slices of the same spacing, centred on the old one and
/// then moved down by `k` slices, extended by `0` below and `φ` above.
fn shifted(field: &CylinderField, k: i64, nz_new: usize, phi: &CrossSectionProfile) -> CylinderField {
    let w = field.nx + 1;
    let pad = (nz_new as i64 - field.nz as i64) / 2;
    let mut values = vec![0.0; w * (nz_new + 1)];
    for j in 0..=nz_new as i64 {
        let src = j - pad + k;
        let row = &mut values[j as usize * w..(j as usize + 1) * w];
        if src < 0 {
            row.iter_mut().for_each(|v| *v = 0.0);
        } else if src > field.nz as i64 {
            row.copy_from_slice(phi.values());
        } else {
            row.copy_from_slice(field.row(src as usize));
        }
    }
    let half_length = field.hz() * nz_new as f64 / 2.0;
    CylinderField { nx: field.nx, nz: nz_new, half_length, values, shift: 0.0 }
}

/// One stage of the continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationStep {
    pub report: TruncatedSolveReport,
    /// The stage's truncated minimizer as solved (not recentered).
    pub minimizer: CylinderField,
    /// `max|u(·, −L+1)|` on the recentered field.
    pub bottom_err: f64,
    /// `max|u(·, L−1) − φ|` on the recentered field.
    pub top_err: f64,
    /// `|H|` of the recentered field (median of its slice trace).
    pub h_level: f64,
    /// Spread of the slice trace.
    pub h_drift: f64,
    /// `false` when the descent hit `max_iter`; the stage then holds the
    /// last iterate and ends the continuation.
    pub descent_converged: bool,
    pub criteria_met: bool,
}

#[derive(Debug, Clone)]
pub struct HeteroclinicReport {
    /// Recentered field of the last stage.
    pub field: CylinderField,
    pub steps: Vec<ContinuationStep>,
    /// Every descent converged and the last stage meets the criteria.
    pub converged: bool,
}

/// Continuation over `config.n_schedule`. Each stage warm-starts from the
/// previous minimizer, moved towards the centre by whole slices as far as
/// the new cylinder allows and extended by `0`/`φ`, so `c_n` cannot
/// increase. Criteria not being met is reported, not an error; neither is a
/// descent hitting `max_iter`, which ends the run with that stage's last iterate.
pub fn solve_heteroclinic(
    params: &QuinticParams,
    phi: &CrossSectionProfile,
    config: &SolverConfig,
) -> Result<HeteroclinicReport> {
    if config.n_schedule.is_empty() || config.n_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("n schedule must be non-empty and strictly increasing".into()));
    }
    let mut steps = Vec::new();
    let mut prev: Option<(CylinderField, f64)> = None;
    let mut last = None;
    for &n in &config.n_schedule {
        let start = match &prev {
            None => ramp_field(n, phi, config)?,
            Some((f, z_n)) => {
                let nz = config.slices(n)?;
                let room = ((nz - f.nz) / 2) as i64;
                let k = (libm::round(z_n / f.hz()) as i64).clamp(-room, room);
                shifted(f, k, nz, phi)
            }
        };
        let (nx, nz) = (start.nx, start.nz);
        let (field, report, descent_converged) = match solve_truncated_from(start, params, phi, config) {
            Ok((f, r)) => (f, r, true),
            Err(Error::NotConverged { iterations, grad_norm, best, .. }) => {
                let f = CylinderField { nx, nz, half_length: n, values: best, shift: 0.0 };
                let r = truncated_report(&f, params, phi, iterations, grad_norm)?;
                (f, r, false)
            }
            Err(e) => return Err(e),
        };
        let centred = recenter(&field, report.z_n, phi);
        let (bottom_err, top_err) = diagnostics::limit_profile_errors(&centred, phi, 1.0)?;
        let trace = diagnostics::hamiltonian_trace(&centred, params)?;
        let h_level = trace.level.abs();
        let criteria_met = bottom_err <= config.eps_tail && top_err <= config.eps_tail && h_level <= config.eps_h;
        let z_n = report.z_n;
        steps.push(ContinuationStep {
            report,
            minimizer: field.clone(),
            bottom_err,
            top_err,
            h_level,
            h_drift: trace.drift,
            descent_converged,
            criteria_met,
        });
        prev = Some((field, z_n));
        last = Some(centred);
        if !descent_converged || (criteria_met && !config.exhaust_schedule) {
            break;
        }
    }
    let converged = steps.iter().all(|s| s.descent_converged) && steps.last().is_some_and(|s| s.criteria_met);
    Ok(HeteroclinicReport { field: last.expect("schedule is non-empty"), steps, converged })
}

#[cfg(test)]
mod tests;
