//! Checks of the qualitative properties of computed fields: the conserved
//! slice Hamiltonian, bounds, monotonicity, limits and the linearized
//! stability of the limit states.

use alloc::vec;
use alloc::vec::Vec;

use crate::cross_section::CrossSectionProfile;
use crate::cylinder::CylinderField;
use crate::nonlinearity::{Nonlinearity, QuinticParams};
use crate::tridiag::SymTridiagonal;
use crate::{Error, Result};

/// Strictness threshold for the report-only interior checks.
pub const STRICT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianTrace {
    pub heights: Vec<f64>,
    pub values: Vec<f64>,
    /// `max − min` of `values`.
    pub drift: f64,
    /// Median of `values`: the conserved level, insensitive to the
    /// discretization error concentrated in the transition layer.
    pub level: f64,
}

fn slice_hamiltonian(field: &CylinderField, params: &QuinticParams, j: usize, dz: impl Fn(usize) -> f64) -> f64 {
    let (nx, hx) = (field.nx(), field.hx());
    let row = field.row(j);
    let mut grad = 0.0;
    for i in 0..nx {
        let d = row[i + 1] - row[i];
        grad += d * d;
    }
    let mut rest = 0.0;
    for i in 0..=nx {
        let w = if i == 0 || i == nx { 0.5 } else { 1.0 };
        let d = dz(i);
        rest += w * (0.5 * d * d + params.primitive(row[i]));
    }
    0.5 * grad / hx - hx * rest
}

/// `H(t_j) = Σ hx(½((Dx u)² − (Dz u)²) − F(u))` on every interior slice,
/// with forward `Dx` (as in the energy) and central `Dz`.
pub fn hamiltonian_trace(field: &CylinderField, params: &QuinticParams) -> Result<HamiltonianTrace> {
    let nz = field.nz();
    if nz < 4 {
        return Err(Error::InvalidInput("the Hamiltonian trace needs nz ≥ 4".into()));
    }
    let hz = field.hz();
    let mut heights = Vec::with_capacity(nz - 1);
    let mut values = Vec::with_capacity(nz - 1);
    for j in 1..nz {
        let h = slice_hamiltonian(field, params, j, |i| (field.get(i, j + 1) - field.get(i, j - 1)) / (2.0 * hz));
        heights.push(field.z(j));
        values.push(h);
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let level = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    Ok(HamiltonianTrace { heights, values, drift: hi - lo, level })
}

/// `H` on the bottom row with the second-order one-sided `Dz`; on a zero
/// bottom row only `−½Σ hx (Dz u)²` survives.
pub fn bottom_hamiltonian(field: &CylinderField, params: &QuinticParams) -> f64 {
    let hz = field.hz();
    slice_hamiltonian(field, params, 0, |i| {
        (-3.0 * field.get(i, 0) + 4.0 * field.get(i, 1) - field.get(i, 2)) / (2.0 * hz)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCheck {
    /// Minimum of `(u(i, j+1) − u(i, j))/hz` over interior columns.
    pub min_dz: f64,
    /// `(i, j)` of the minimum.
    pub at: (usize, usize),
    /// Per slice gap `j → j+1`: the minimum over interior columns.
    pub per_slice: Vec<f64>,
    pub pass: bool,
}

pub fn check_monotone(field: &CylinderField) -> MonotoneCheck {
    let (nx, nz, hz) = (field.nx(), field.nz(), field.hz());
    let mut per_slice = vec![f64::INFINITY; nz];
    let (mut min_dz, mut at) = (f64::INFINITY, (0, 0));
    for j in 0..nz {
        for i in 1..nx {
            let d = (field.get(i, j + 1) - field.get(i, j)) / hz;
            per_slice[j] = per_slice[j].min(d);
            if d < min_dz {
                min_dz = d;
                at = (i, j);
            }
        }
    }
    MonotoneCheck { min_dz, at, per_slice, pass: min_dz > 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsCheck {
    /// `max(−u, u − φ)` over all nodes; `≤ 0` means inside the box.
    pub max_violation: f64,
    /// Every interior node lies in `(STRICT_TOL, φ − STRICT_TOL)`.
    pub strict_interior: bool,
    /// The same, slice by slice (interior slices `1..nz`).
    pub strict_per_slice: Vec<bool>,
}

pub fn check_bounds(field: &CylinderField, phi: &CrossSectionProfile) -> Result<BoundsCheck> {
    if phi.nx() != field.nx() {
        return Err(Error::InvalidInput("profile and field x-grids differ".into()));
    }
    let (nx, nz) = (field.nx(), field.nz());
    let p = phi.values();
    let mut max_violation = f64::NEG_INFINITY;
    for j in 0..=nz {
        for (u, q) in field.row(j).iter().zip(p) {
            max_violation = max_violation.max((-u).max(u - q));
        }
    }
    let strict_per_slice: Vec<bool> = (1..nz)
        .map(|j| (1..nx).all(|i| {
            let u = field.get(i, j);
            u > STRICT_TOL && u < p[i] - STRICT_TOL
        }))
        .collect();
    Ok(BoundsCheck { max_violation, strict_interior: strict_per_slice.iter().all(|s| *s), strict_per_slice })
}

/// `(max|u(·, −L+margin)|, max|u(·, L−margin) − φ|)` on the nearest slices.
pub fn limit_profile_errors(field: &CylinderField, phi: &CrossSectionProfile, margin: f64) -> Result<(f64, f64)> {
    if phi.nx() != field.nx() {
        return Err(Error::InvalidInput("profile and field x-grids differ".into()));
    }
    let l = field.half_length();
    if !(margin >= 0.0 && margin < l) {
        return Err(Error::InvalidInput("margin must lie in [0, L)".into()));
    }
    let bottom = field.row(field.slice_at(-l + margin)).iter().fold(0.0f64, |m, u| m.max(u.abs()));
    let top = field
        .row(field.slice_at(l - margin))
        .iter()
        .zip(phi.values())
        .fold(0.0f64, |m, (u, q)| m.max((u - q).abs()));
    Ok((bottom, top))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Zero,
    Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub state: StateKind,
    pub smallest_eig: f64,
    /// `‖Av − θv‖∞` for the unit eigenvector `v`.
    pub eigvector_norm_check: f64,
    pub eigvector: Vec<f64>,
}

/// Smallest eigenvalue of `−d²/dx² − f′(state)` with Dirichlet ends, by
/// shifted inverse iteration. The shift is `−10`, or lower when the
/// Gershgorin bound says the spectrum may reach below it.
pub fn stability_spectrum(state: &CrossSectionProfile, params: &QuinticParams) -> Result<StabilityReport> {
    let nx = state.nx();
    let h2 = state.h() * state.h();
    let v = state.values();
    let diag: Vec<f64> = (1..nx).map(|i| 2.0 / h2 - params.derivative(v[i])).collect();
    let off = vec![-1.0 / h2; nx - 2];
    let gershgorin = diag.iter().fold(f64::INFINITY, |m, d| m.min(d - 2.0 / h2));
    let shift = (-10.0f64).min(gershgorin - 1.0);
    let a = SymTridiagonal::new(diag, off);
    let (theta, vec, res) = a.smallest_eigenpair(shift, 1e-12, 10_000)?;
    let state_kind = if v.iter().all(|x| *x == 0.0) { StateKind::Zero } else { StateKind::Profile };
    Ok(StabilityReport { state: state_kind, smallest_eig: theta, eigvector_norm_check: res, eigvector: vec })
}
