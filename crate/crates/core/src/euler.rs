//! Odd reflections of the strip solution, the steady Euler flow it
//! generates as a streamfunction, and certificates about that flow.
//!
//! On a sampled grid the velocity is `(−D₀z u, D₀x u)` and the pressure
//! `−|∇u|²/2 − F(u)`, all with collocated central differences.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cross_section::CrossSectionProfile;
use crate::cylinder::CylinderField;
use crate::nonlinearity::{Nonlinearity, QuinticParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// `(0,1) × ℝ`.
    Strip,
    /// `(0,∞) × ℝ`: odd reflection across `x₁ = 1`, then 2-periodic.
    HalfPlane,
    /// `ℝ²`: the half-plane extension reflected oddly across `x₁ = 0`.
    Plane,
}

/// Closed rectangle `[x_min, x_max] × [z_min, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, z_min: f64, z_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, z_min, z_max].iter().all(|v| v.is_finite()) && x_min < x_max && z_min < z_max;
        if !ok {
            return Err(Error::InvalidInput("window must be a non-empty finite rectangle".into()));
        }
        Ok(Self { x_min, x_max, z_min, z_max })
    }
}

#[derive(Debug, Clone)]
pub struct ExtendedSolution {
    base: CylinderField,
    /// Upper limit profile, used above the stored range.
    limit: Vec<f64>,
    kind: DomainKind,
}

impl ExtendedSolution {
    pub fn new(base: CylinderField, phi: &CrossSectionProfile, kind: DomainKind) -> Result<Self> {
        if phi.nx() != base.nx() {
            return Err(Error::InvalidInput("profile and field x-grids differ".into()));
        }
        Ok(Self { base, limit: phi.values().to_vec(), kind })
    }

    pub fn base(&self) -> &CylinderField {
        &self.base
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn contains(&self, x1: f64) -> bool {
        match self.kind {
            DomainKind::Strip => (0.0..=1.0).contains(&x1),
            DomainKind::HalfPlane => x1 >= 0.0,
            DomainKind::Plane => x1.is_finite(),
        }
    }

    /// Strip solution `u₀` at `x ∈ [0,1]`: bilinear inside the stored range,
    /// `0` below it and `φ(x)` above it.
    fn strip_value(&self, x: f64, z: f64) -> f64 {
        let f = &self.base;
        let nx = f.nx();
        let s = (x * nx as f64).clamp(0.0, nx as f64);
        let i = (libm::floor(s) as usize).min(nx - 1);
        let a = s - i as f64;
        let lerp = |row: &[f64]| {
            if a == 0.0 {
                row[i]
            } else {
                (1.0 - a) * row[i] + a * row[i + 1]
            }
        };
        let l = f.half_length();
        if z < -l {
            return 0.0;
        }
        if z > l {
            return lerp(&self.limit);
        }
        let t = ((z + l) / f.hz()).clamp(0.0, f.nz() as f64);
        let j = (libm::floor(t) as usize).min(f.nz() - 1);
        let b = t - j as f64;
        if b == 0.0 {
            lerp(f.row(j))
        } else {
            (1.0 - b) * lerp(f.row(j)) + b * lerp(f.row(j + 1))
        }
    }

    /// `v` on `[0, 2]`: `u₀` then `−u₀(2 − x₁)`.
    fn period_value(&self, x: f64, z: f64) -> f64 {
        if x <= 1.0 {
            self.strip_value(x, z)
        } else {
            -self.strip_value(2.0 - x, z)
        }
    }

    fn half_plane_value(&self, x: f64, z: f64) -> f64 {
        let r = x - 2.0 * libm::floor(x / 2.0);
        self.period_value(r, z)
    }

    /// Value of the extension, or `None` outside its domain.
    pub fn eval_extended(&self, x1: f64, x2: f64) -> Option<f64> {
        if !self.contains(x1) || x2.is_nan() {
            return None;
        }
        Some(match self.kind {
            DomainKind::Strip => self.strip_value(x1, x2),
            DomainKind::HalfPlane => self.half_plane_value(x1, x2),
            DomainKind::Plane => {
                if x1 >= 0.0 {
                    self.half_plane_value(x1, x2)
                } else {
                    -self.half_plane_value(-x1, x2)
                }
            }
        })
    }

    /// Samples on the grid `x_min + a·h`, `z_min + b·h` covering `window`.
    pub fn sample(&self, window: &Window, h: f64) -> Result<Samples> {
        if !(self.contains(window.x_min) && self.contains(window.x_max)) {
            return Err(Error::InvalidInput("window leaves the domain of the extension".into()));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidInput("sampling step must be positive".into()));
        }
        let nx = libm::round((window.x_max - window.x_min) / h) as usize;
        let nz = libm::round((window.z_max - window.z_min) / h) as usize;
        if nx < 4 || nz < 4 {
            return Err(Error::InvalidInput("window holds fewer than 5×5 samples".into()));
        }
        let mut values = Vec::with_capacity((nx + 1) * (nz + 1));
        for b in 0..=nz {
            let z = window.z_min + b as f64 * h;
            for a in 0..=nx {
                let x = (window.x_min + a as f64 * h).min(window.x_max);
                values.push(self.eval_extended(x, z).expect("inside the domain"));
            }
        }
        Ok(Samples { x_min: window.x_min, z_min: window.z_min, hx: h, hz: h, nx, nz, values })
    }
}

/// Values on a uniform collocated grid, slice-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x_min: f64,
    pub z_min: f64,
    pub hx: f64,
    pub hz: f64,
    pub nx: usize,
    pub nz: usize,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn from_field(field: &CylinderField) -> Self {
        Self {
            x_min: 0.0,
            z_min: -field.half_length(),
            hx: field.hx(),
            hz: field.hz(),
            nx: field.nx(),
            nz: field.nz(),
            values: field.values().to_vec(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.nx + 1) + i]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.hx
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z_min + j as f64 * self.hz
    }

    pub fn window(&self) -> Window {
        Window {
            x_min: self.x_min,
            x_max: self.x(self.nx),
            z_min: self.z_min,
            z_max: self.z(self.nz),
        }
    }

    /// Central difference with stride `s` in the interior, one-sided
    /// (second order) at the edges.
    fn dx(&self, i: usize, j: usize, s: usize) -> f64 {
        let h = s as f64 * self.hx;
        if i >= s && i + s <= self.nx {
            (self.get(i + s, j) - self.get(i - s, j)) / (2.0 * h)
        } else if i < s {
            (-3.0 * self.get(i, j) + 4.0 * self.get(i + s, j) - self.get(i + 2 * s, j)) / (2.0 * h)
        } else {
            (3.0 * self.get(i, j) - 4.0 * self.get(i - s, j) + self.get(i - 2 * s, j)) / (2.0 * h)
        }
    }

    fn dz(&self, i: usize, j: usize, s: usize) -> f64 {
        let h = s as f64 * self.hz;
        if j >= s && j + s <= self.nz {
            (self.get(i, j + s) - self.get(i, j - s)) / (2.0 * h)
        } else if j < s {
            (-3.0 * self.get(i, j) + 4.0 * self.get(i, j + s) - self.get(i, j + 2 * s)) / (2.0 * h)
        } else {
            (3.0 * self.get(i, j) - 4.0 * self.get(i, j - s) + self.get(i, j - 2 * s)) / (2.0 * h)
        }
    }
}

/// Max over interior sample nodes of `|−Δ_h u − f(u)|`, five-point stencil
/// at spacing `h` on values of the extension.
pub fn pde_residual_extended(sol: &ExtendedSolution, window: &Window, h: f64, params: &QuinticParams) -> Result<f64> {
    let s = sol.sample(window, h)?;
    let mut worst = 0.0f64;
    for j in 1..s.nz {
        for i in 1..s.nx {
            let u = s.get(i, j);
            let lap = (s.get(i + 1, j) + s.get(i - 1, j) - 2.0 * u) / (h * h)
                + (s.get(i, j + 1) + s.get(i, j - 1) - 2.0 * u) / (h * h);
            worst = worst.max((-lap - params.f(u)).abs());
        }
    }
    Ok(worst)
}

/// Velocity and pressure of the flow with streamfunction `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerFlow {
    pub psi: Samples,
    pub lambda: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl EulerFlow {
    pub fn window(&self) -> Window {
        self.psi.window()
    }

    /// `|u|` at every node.
    pub fn speed(&self) -> Vec<f64> {
        self.u1.iter().zip(&self.u2).map(|(a, b)| libm::hypot(*a, *b)).collect()
    }
}

fn velocity(psi: &Samples, s: usize) -> (Vec<f64>, Vec<f64>) {
    let n = psi.values.len();
    let (mut u1, mut u2) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..=psi.nz {
        for i in 0..=psi.nx {
            let k = j * (psi.nx + 1) + i;
            u1[k] = -psi.dz(i, j, s);
            u2[k] = psi.dx(i, j, s);
        }
    }
    (u1, u2)
}

fn pressure(psi: &Samples, u1: &[f64], u2: &[f64], params: &QuinticParams) -> Vec<f64> {
    psi.values
        .iter()
        .zip(u1.iter().zip(u2))
        .map(|(p, (a, b))| -0.5 * (a * a + b * b) - params.primitive(*p))
        .collect()
}

/// Flow generated by sampled streamfunction values.
pub fn euler_flow(psi: Samples, params: &QuinticParams) -> EulerFlow {
    let (u1, u2) = velocity(&psi, 1);
    let pressure = pressure(&psi, &u1, &u2, params);
    EulerFlow { psi, lambda: params.lambda(), u1, u2, pressure }
}

/// Flow of the strip solution on its own grid.
pub fn euler_fields(field: &CylinderField, params: &QuinticParams) -> EulerFlow {
    euler_flow(Samples::from_field(field), params)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerResiduals {
    /// `max|u·∇u + ∇p|` for strides `1, 2, 4, …`, on the common interior.
    pub momentum: Vec<f64>,
    /// `max|div u|` at stride 1.
    pub divergence: f64,
    /// `log₂` of successive momentum ratios.
    pub orders: Vec<f64>,
}

impl EulerResiduals {
    pub fn momentum_res(&self) -> f64 {
        self.momentum[0]
    }
    /// Smallest observed order, if at least one refinement was made.
    pub fn order(&self) -> Option<f64> {
        self.orders.iter().copied().reduce(f64::min)
    }
}

/// Residuals of the steady Euler equations with matched central stencils.
/// The streamfunction is re-differentiated with strides `1, 2, …, 2^r`
/// (`r = h_refinements`), which yields the empirical order without
/// re-solving.
pub fn euler_residual(flow: &EulerFlow, h_refinements: usize) -> Result<EulerResiduals> {
    let psi = &flow.psi;
    let params = QuinticParams::new(flow.lambda).ok_or_else(|| Error::InvalidInput("invalid λ".into()))?;
    let top = 1usize << h_refinements;
    let margin = 2 * top;
    if psi.nx <= 2 * margin || psi.nz <= 2 * margin {
        return Err(Error::InvalidInput("window too small for the requested refinements".into()));
    }
    let w = psi.nx + 1;
    let mut momentum = Vec::new();
    let mut divergence = 0.0f64;
    for r in 0..=h_refinements {
        let s = 1usize << r;
        let (u1, u2) = if s == 1 { (flow.u1.clone(), flow.u2.clone()) } else { velocity(psi, s) };
        let p = if s == 1 { flow.pressure.clone() } else { pressure(psi, &u1, &u2, &params) };
        let (hx, hz) = (s as f64 * psi.hx, s as f64 * psi.hz);
        let mut worst = 0.0f64;
        for j in margin..=psi.nz - margin {
            for i in margin..=psi.nx - margin {
                let k = j * w + i;
                let ddx = |v: &[f64]| (v[k + s] - v[k - s]) / (2.0 * hx);
                let ddz = |v: &[f64]| (v[k + s * w] - v[k - s * w]) / (2.0 * hz);
                let r1 = u1[k] * ddx(&u1) + u2[k] * ddz(&u1) + ddx(&p);
                let r2 = u1[k] * ddx(&u2) + u2[k] * ddz(&u2) + ddz(&p);
                worst = worst.max(libm::hypot(r1, r2));
                if s == 1 {
                    divergence = divergence.max((ddx(&u1) + ddz(&u2)).abs());
                }
            }
        }
        momentum.push(worst);
    }
    let orders = momentum.windows(2).map(|m| libm::log2(m[1] / m[0])).collect();
    Ok(EulerResiduals { momentum, divergence, orders })
}

/// `ρ = |∇u|` and the column-wise continuous angle `θ` of `∇u` (NaN where
/// `ρ` is below the rounding floor).
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    pub grid: Samples,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSummary {
    pub min_rho: f64,
    pub min_rho_at: (f64, f64),
    pub theta_min: f64,
    pub theta_max: f64,
    /// `θ` range over nodes off the walls.
    pub interior_theta_min: f64,
    pub interior_theta_max: f64,
    /// `max|θ(0, ·)|` and `max|θ(1, ·) − π|` over wall nodes in the window.
    pub left_trace_dev: f64,
    pub right_trace_dev: f64,
    /// Largest `|Δθ|` between vertically adjacent nodes.
    pub max_jump: f64,
    /// `max|div(ρ²∇θ)|` over nodes two away from the window edges.
    pub div_residual: f64,
    /// Nodes with `ρ = 0`.
    pub critical_points: Vec<(f64, f64)>,
    /// Rounding floor of the difference quotients; `θ` is left undefined
    /// (NaN) where `ρ` does not exceed it.
    pub rho_floor: f64,
    pub unresolved: usize,
}

/// `ρ`, `θ` on the field nodes inside `window` (which must lie in the
/// stored range of the strip). Gradients are central differences of the
/// full field, one-sided on its edges.
pub fn theta_analysis(field: &CylinderField, window: &Window) -> Result<(ThetaField, ThetaSummary)> {
    let l = field.half_length();
    if window.x_min < 0.0 || window.x_max > 1.0 || window.z_min < -l || window.z_max > l {
        return Err(Error::InvalidInput("window leaves the stored strip".into()));
    }
    let full = Samples::from_field(field);
    let i0 = libm::ceil(window.x_min * field.nx() as f64 - 1e-9) as usize;
    let i1 = libm::floor(window.x_max * field.nx() as f64 + 1e-9) as usize;
    let j0 = field.slice_at(window.z_min).max(libm::ceil((window.z_min + l) / field.hz() - 1e-9) as usize);
    let j1 = libm::floor((window.z_max + l) / field.hz() + 1e-9) as usize;
    if i1 < i0 + 4 || j1 < j0 + 4 {
        return Err(Error::InvalidInput("window holds fewer than 5×5 nodes".into()));
    }
    let (nx, nz) = (i1 - i0, j1 - j0);
    let w = nx + 1;
    let n = w * (nz + 1);
    let (mut gx, mut gz) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..=nz {
        for i in 0..=nx {
            gx[j * w + i] = full.dx(i + i0, j + j0, 1);
            gz[j * w + i] = full.dz(i + i0, j + j0, 1);
        }
    }
    let rho: Vec<f64> = gx.iter().zip(&gz).map(|(a, b)| libm::hypot(*a, *b)).collect();
    // Below this, ∇u is a difference of values equal to within rounding.
    let umax = field.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rho_floor = 64.0 * f64::EPSILON * umax / field.hx().min(field.hz());
    let mut theta: Vec<f64> = gx
        .iter()
        .zip(&gz)
        .zip(&rho)
        .map(|((a, b), r)| if *r > rho_floor { libm::atan2(*b, *a) } else { f64::NAN })
        .collect();
    // Unwrap upwards along each column, carrying the last defined angle
    // across unresolved nodes.
    for i in 0..=nx {
        let mut prev = f64::NAN;
        for j in 0..=nz {
            let t = &mut theta[j * w + i];
            if t.is_nan() {
                continue;
            }
            if !prev.is_nan() {
                while *t - prev > PI {
                    *t -= 2.0 * PI;
                }
                while *t - prev < -PI {
                    *t += 2.0 * PI;
                }
            }
            prev = *t;
        }
    }
    let grid = Samples {
        x_min: full.x(i0),
        z_min: full.z(j0),
        hx: full.hx,
        hz: full.hz,
        nx,
        nz,
        values: (j0..=j1).flat_map(|j| field.row(j)[i0..=i1].to_vec()).collect(),
    };

    let mut min_rho = f64::INFINITY;
    let mut min_rho_at = (0.0, 0.0);
    let mut critical_points = Vec::new();
    for j in 0..=nz {
        for i in 0..=nx {
            let r = rho[j * w + i];
            if r < min_rho {
                min_rho = r;
                min_rho_at = (grid.x(i), grid.z(j));
            }
            if r == 0.0 {
                critical_points.push((grid.x(i), grid.z(j)));
            }
        }
    }
    let (theta_min, theta_max) =
        theta.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    let (mut interior_theta_min, mut interior_theta_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..=nz {
        for i in 0..=nx {
            let on_wall = (i == 0 && i0 == 0) || (i == nx && i1 == field.nx());
            if !on_wall {
                interior_theta_min = interior_theta_min.min(theta[j * w + i]);
                interior_theta_max = interior_theta_max.max(theta[j * w + i]);
            }
        }
    }
    let mut left_trace_dev = 0.0f64;
    let mut right_trace_dev = 0.0f64;
    for j in 0..=nz {
        if i0 == 0 {
            left_trace_dev = left_trace_dev.max(theta[j * w].abs());
        }
        if i1 == field.nx() {
            right_trace_dev = right_trace_dev.max((theta[j * w + nx] - PI).abs());
        }
    }
    let mut max_jump = 0.0f64;
    for j in 1..=nz {
        for i in 0..=nx {
            max_jump = max_jump.max((theta[j * w + i] - theta[(j - 1) * w + i]).abs());
        }
    }
    // ρ²∇θ = u_x ∇u_z − u_z ∇u_x, then its divergence.
    let mut div_residual = 0.0f64;
    if nx >= 4 && nz >= 4 {
        let (hx, hz) = (grid.hx, grid.hz);
        let mut vx = vec![0.0; n];
        let mut vz = vec![0.0; n];
        for j in 1..nz {
            for i in 1..nx {
                let k = j * w + i;
                let dxx = (gx[k + 1] - gx[k - 1]) / (2.0 * hx);
                let dzx = (gz[k + 1] - gz[k - 1]) / (2.0 * hx);
                let dxz = (gx[k + w] - gx[k - w]) / (2.0 * hz);
                let dzz = (gz[k + w] - gz[k - w]) / (2.0 * hz);
                vx[k] = gx[k] * dzx - gz[k] * dxx;
                vz[k] = gx[k] * dzz - gz[k] * dxz;
            }
        }
        for j in 2..nz - 1 {
            for i in 2..nx - 1 {
                let k = j * w + i;
                let d = (vx[k + 1] - vx[k - 1]) / (2.0 * hx) + (vz[k + w] - vz[k - w]) / (2.0 * hz);
                div_residual = div_residual.max(d.abs());
            }
        }
    }
    let summary = ThetaSummary {
        min_rho,
        min_rho_at,
        theta_min,
        theta_max,
        interior_theta_min,
        interior_theta_max,
        left_trace_dev,
        right_trace_dev,
        max_jump,
        div_residual,
        critical_points,
        rho_floor,
        unresolved: theta.iter().filter(|t| t.is_nan()).count(),
    };
    Ok((ThetaField { grid, rho, theta }, summary))
}

/// `ρ`, `θ` from sampled values of any extension. Each row is unwrapped
/// outwards from the column nearest `x₁ = 0` (where `θ = 0` on the
/// reflection axis), so the branch grows like `π|x₁|` across the strips.
/// Nodes below the rounding floor of `ρ` get `θ = NaN`.
pub fn theta_from_samples(s: &Samples) -> ThetaField {
    let w = s.nx + 1;
    let n = s.values.len();
    let (mut rho, mut theta) = (vec![0.0; n], vec![0.0; n]);
    let umax = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * umax / s.hx.min(s.hz);
    for j in 0..=s.nz {
        for i in 0..=s.nx {
            let (gx, gz) = (s.dx(i, j, 1), s.dz(i, j, 1));
            let k = j * w + i;
            rho[k] = libm::hypot(gx, gz);
            theta[k] = if rho[k] > floor { libm::atan2(gz, gx) } else { f64::NAN };
        }
    }
    let anchor = (libm::round(-s.x_min / s.hx).max(0.0) as usize).min(s.nx);
    let unwrap = |t: &mut f64, prev: f64| {
        while *t - prev > PI {
            *t -= 2.0 * PI;
        }
        while *t - prev < -PI {
            *t += 2.0 * PI;
        }
    };
    for j in 0..=s.nz {
        let row = &mut theta[j * w..(j + 1) * w];
        for range in [(anchor + 1..=s.nx).collect::<Vec<_>>(), (0..anchor).rev().collect()] {
            let mut prev = row[anchor];
            for i in range {
                if row[i].is_nan() {
                    continue;
                }
                if !prev.is_nan() {
                    unwrap(&mut row[i], prev);
                }
                prev = row[i];
            }
        }
    }
    ThetaField { grid: s.clone(), rho, theta }
}

/// Continuous angle of `∇u` for the plane extension at `x₁`, given the
/// strip angle `theta0` at the preimage of `x₁` in `[0, 1]`: the odd
/// reflections turn it into `2πm + θ₀` or `2πm + 2π − θ₀`, and
/// `θ(−x₁) = −θ(x₁)`.
pub fn plane_theta(theta0: f64, x1: f64) -> f64 {
    let (sign, x1) = if x1 < 0.0 { (-1.0, -x1) } else { (1.0, x1) };
    let m = libm::floor(x1 / 2.0);
    let r = x1 - 2.0 * m;
    let t = if r <= 1.0 { theta0 } else { 2.0 * PI - theta0 };
    sign * (2.0 * PI * m + t)
}

/// `max|θ|/R` of the plane extension over `[−R,R]² ∩ (ℝ × window)`, with
/// the strip angle field mapped by the reflection symmetry. `θ` is odd in
/// `x₁`, so only `x₁ ≥ 0` is visited.
pub fn theta_growth(theta: &ThetaField, radius: u32) -> Result<f64> {
    let g = &theta.grid;
    if radius == 0 || g.x_min != 0.0 || (g.x(g.nx) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput("growth probe needs a full-width strip window and R ≥ 1".into()));
    }
    let r = radius as f64;
    let mut best = 0.0f64;
    for j in (0..=g.nz).filter(|j| g.z(*j).abs() <= r) {
        for i in 0..=g.nx {
            let (x, t0) = (g.x(i), theta.theta[j * (g.nx + 1) + i]);
            let mut m = 0.0;
            while 2.0 * m + x <= r + 1e-12 {
                best = best.max(plane_theta(t0, 2.0 * m + x).abs());
                if 2.0 * m + 2.0 - x <= r + 1e-12 {
                    best = best.max(plane_theta(t0, 2.0 * m + 2.0 - x).abs());
                }
                m += 1.0;
            }
        }
    }
    Ok(best / r)
}

/// Deviation of `flow` from the best shear fit `U(x·e⊥)e`, minimized over
/// directions `e` (1° sweep, then golden-section refinement around the best
/// few). For each direction the window is cut into 64 bins of `x·e⊥` and
/// `U` is a least-squares line in each bin.
pub fn non_shear_certificate(flow: &EulerFlow) -> f64 {
    let sweep: Vec<(f64, f64)> = (0..180)
        .map(|d| {
            let a = d as f64 * PI / 180.0;
            (a, shear_deviation(flow, a))
        })
        .collect();
    let mut order: Vec<usize> = (0..sweep.len()).collect();
    order.sort_by(|a, b| sweep[*a].1.total_cmp(&sweep[*b].1));
    let mut best = sweep[order[0]].1;
    for &k in order.iter().take(3) {
        let c = sweep[k].0;
        let (mut lo, mut hi) = (c - PI / 180.0, c + PI / 180.0);
        let g = 0.5 * (libm::sqrt(5.0) - 1.0);
        let mut a = hi - g * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let (mut fa, mut fb) = (shear_deviation(flow, a), shear_deviation(flow, b));
        for _ in 0..40 {
            if fa < fb {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = shear_deviation(flow, a);
            } else {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = shear_deviation(flow, b);
            }
        }
        best = best.min(fa).min(fb);
    }
    best
}

/// Max-norm deviation from the binned shear fit along direction angle `a`.
pub fn shear_deviation(flow: &EulerFlow, a: f64) -> f64 {
    const BINS: usize = 64;
    let (ex, ez) = (libm::cos(a), libm::sin(a));
    let psi = &flow.psi;
    let w = psi.nx + 1;
    let s_of = |i: usize, j: usize| -psi.x(i) * ez + psi.z(j) * ex;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in [0, psi.nz] {
        for i in [0, psi.nx] {
            let s = s_of(i, j);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let width = (hi - lo) / BINS as f64;
    let bin = |s: f64| (((s - lo) / width) as usize).min(BINS - 1);
    // Per bin sums for the line fit of u·e against s.
    let mut acc = [[0.0f64; 5]; BINS];
    for j in 0..=psi.nz {
        for i in 0..=psi.nx {
            let k = j * w + i;
            let s = s_of(i, j);
            let c = &mut acc[bin(s)];
            let v = flow.u1[k] * ex + flow.u2[k] * ez;
            let ds = s - (lo + (bin(s) as f64 + 0.5) * width);
            c[0] += 1.0;
            c[1] += ds;
            c[2] += ds * ds;
            c[3] += v;
            c[4] += ds * v;
        }
    }
    let fit: Vec<(f64, f64)> = acc
        .iter()
        .map(|c| {
            if c[0] == 0.0 {
                return (0.0, 0.0);
            }
            let det = c[0] * c[2] - c[1] * c[1];
            if det.abs() <= 1e-12 * c[0] * c[2].max(f64::MIN_POSITIVE) || c[2] == 0.0 {
                (c[3] / c[0], 0.0)
            } else {
                ((c[2] * c[3] - c[1] * c[4]) / det, (c[0] * c[4] - c[1] * c[3]) / det)
            }
        })
        .collect();
    let mut worst = 0.0f64;
    for j in 0..=psi.nz {
        for i in 0..=psi.nx {
            let k = j * w + i;
            let s = s_of(i, j);
            let b = bin(s);
            let ds = s - (lo + (b as f64 + 0.5) * width);
            let u = fit[b].0 + fit[b].1 * ds;
            worst = worst.max(libm::hypot(flow.u1[k] - u * ex, flow.u2[k] - u * ez));
        }
    }
    worst
}

/// Smallest speed on the grid and the cells that may hold a zero of the
/// velocity: both components take values `≤ 0` and `≥ 0` on the corners.
#[derive(Debug, Clone, PartialEq)]
pub struct StagnationCheck {
    pub min_speed: f64,
    pub min_speed_at: (f64, f64),
    pub stagnation_cells: Vec<(f64, f64)>,
}

pub fn stagnation_check(flow: &EulerFlow) -> StagnationCheck {
    let psi = &flow.psi;
    let w = psi.nx + 1;
    let speed = flow.speed();
    let mut min_speed = f64::INFINITY;
    let mut min_speed_at = (0.0, 0.0);
    for j in 0..=psi.nz {
        for i in 0..=psi.nx {
            if speed[j * w + i] < min_speed {
                min_speed = speed[j * w + i];
                min_speed_at = (psi.x(i), psi.z(j));
            }
        }
    }
    let changes = |v: &[f64], k: usize| {
        let c = [v[k], v[k + 1], v[k + w], v[k + w + 1]];
        c.iter().any(|x| *x >= 0.0) && c.iter().any(|x| *x <= 0.0)
    };
    let mut stagnation_cells = Vec::new();
    for j in 0..psi.nz {
        for i in 0..psi.nx {
            let k = j * w + i;
            if changes(&flow.u1, k) && changes(&flow.u2, k) {
                stagnation_cells.push((psi.x(i) + 0.5 * psi.hx, psi.z(j) + 0.5 * psi.hz));
            }
        }
    }
    StagnationCheck { min_speed, min_speed_at, stagnation_cells }
}
