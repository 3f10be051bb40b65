use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use heterocyl_core::cross_section::{bvp_by_shooting, lambda_star_bisection, lambda_star_timemap, minimal_minimizer};
use heterocyl_core::cylinder::{energy_j, solve_heteroclinic};
use heterocyl_core::diagnostics::{
    check_bounds, check_monotone, hamiltonian_trace, limit_profile_errors, stability_spectrum,
};
use heterocyl_core::euler::{
    euler_fields, euler_flow, euler_residual, non_shear_certificate, stagnation_check, theta_analysis,
    theta_from_samples, theta_growth,
};
use heterocyl_core::{CrossSectionProfile, DomainKind, ExtendedSolution, QuinticParams, Window};

use crate::config::RunConfig;
use crate::formats::{flow_csv, theta_csv, write_profile, write_text, write_trace, Checkpoint};
use crate::report::{to_toml, Check, LambdaStarReport, SolveReport, StageReport, VerificationReport};

const BISECTION_TOL: f64 = 1e-9;
const TIMEMAP_TOL: f64 = 1e-12;
const GROWTH_RADII: [u32; 3] = [4, 8, 16];
/// Exported windows larger than this many samples are refused.
const MAX_SAMPLES: f64 = 4e7;

pub const CHECKPOINT_FILE: &str = "field.txt";
pub const LAMBDA_REPORT_FILE: &str = "lambda_star.toml";
pub const SOLVE_REPORT_FILE: &str = "solve_report.toml";
pub const VERIFY_REPORT_FILE: &str = "verification.toml";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Process exit status; the numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Usage,
    OracleDisagreement,
    NotConverged,
    VerificationFailed,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Usage => 1,
            Outcome::OracleDisagreement => 2,
            Outcome::NotConverged => 3,
            Outcome::VerificationFailed => 4,
        }
    }
}

fn output_dir(config: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = config
        .output_dir
        .clone()
        .context("no output directory: set output_dir in the config, HETEROCYL_OUTPUT_DIR, or --output-dir")?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn params(lambda: f64) -> anyhow::Result<QuinticParams> {
    QuinticParams::new(lambda).with_context(|| format!("invalid λ = {lambda}"))
}

fn max_diff(a: &CrossSectionProfile, b: &CrossSectionProfile) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `λ` and `φ` for the solver grid: λ* calibrated on that grid, or the
/// override with its minimal minimizer.
pub fn calibrate(config: &RunConfig) -> anyhow::Result<(f64, CrossSectionProfile, &'static str)> {
    match config.lambda_override {
        Some(l) => Ok((l, minimal_minimizer(&params(l)?, config.nx)?.phi, "override")),
        None => {
            let r = lambda_star_bisection(config.nx, BISECTION_TOL)?;
            Ok((r.lambda_star, r.phi, "calibrated"))
        }
    }
}

pub fn cmd_lambda_star(config: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = output_dir(config)?;
    let nx = config.lambda_nx;
    let res = lambda_star_bisection(nx, BISECTION_TOL)?;
    let tm = lambda_star_timemap(TIMEMAP_TOL)?;
    let rel = (res.lambda_star - tm).abs() / tm;
    let shooting = bvp_by_shooting(&params(res.lambda_star)?, nx, 64 * nx).ok();
    let report = LambdaStarReport {
        nx,
        lambda_star: res.lambda_star,
        lambda_timemap: tm,
        relative_difference: rel,
        lambda_tol: config.lambda_tol,
        agree: rel <= config.lambda_tol,
        bracket_lo: res.bracket.0,
        bracket_hi: res.bracket.1,
        phi_max: res.phi.max_norm(),
        phi_action: res.phi.action,
        candidates_ordered: res.candidates_ordered,
        shooting_action: shooting.as_ref().map(|s| s.action),
        shooting_vs_minimizer: shooting.as_ref().map(|s| max_diff(s, &res.phi)),
        m_trace: res.m_trace.iter().map(|(l, m)| [*l, *m]).collect(),
    };
    write_profile(&dir.join("phi.csv"), &res.phi)?;
    write_text(&dir.join(LAMBDA_REPORT_FILE), to_toml(&report))?;
    write_text(&dir.join("config.toml"), config.to_saved_toml())?;
    println!("lambda_star (bisection, nx = {nx}) = {:.12e}", res.lambda_star);
    println!("lambda_star (time map)            = {tm:.12e}");
    println!("relative difference {rel:.3e} (tolerance {:.1e})", config.lambda_tol);
    if report.agree {
        Ok(Outcome::Success)
    } else {
        eprintln!("λ* oracles disagree: bisection {:.12e} vs time map {tm:.12e}", res.lambda_star);
        Ok(Outcome::OracleDisagreement)
    }
}

/// `solve` without console output: writes the checkpoint, trace, `φ`,
/// report and configuration and returns the report.
pub fn run_solve(config: &RunConfig) -> anyhow::Result<SolveReport> {
    let dir = output_dir(config)?;
    let (lambda, phi, source) = calibrate(config)?;
    let p = params(lambda)?;
    let rep = solve_heteroclinic(&p, &phi, &config.solver())?;
    let f = &rep.field;
    Checkpoint { field: f.clone(), lambda }.save(&dir.join(CHECKPOINT_FILE))?;
    write_trace(&dir.join("hamiltonian.csv"), &hamiltonian_trace(f, &p)?)?;
    write_profile(&dir.join("phi_solver.csv"), &phi)?;
    let report = SolveReport {
        lambda,
        lambda_source: source.into(),
        nx: f.nx(),
        nz: f.nz(),
        half_length: f.half_length(),
        shift: f.shift,
        converged: rep.converged,
        stages: rep
            .steps
            .iter()
            .map(|s| StageReport {
                n: s.report.n,
                c_n: s.report.c_n,
                h_n: s.report.h_n,
                z_n: s.report.z_n,
                iterations: s.report.iterations,
                grad_norm: s.report.grad_norm,
                bottom_err: s.bottom_err,
                top_err: s.top_err,
                h_level: s.h_level,
                h_drift: s.h_drift,
                descent_converged: s.descent_converged,
                criteria_met: s.criteria_met,
            })
            .collect(),
    };
    write_text(&dir.join(SOLVE_REPORT_FILE), to_toml(&report))?;
    write_text(&dir.join("config.toml"), config.to_saved_toml())?;
    Ok(report)
}

pub fn cmd_solve(config: &RunConfig) -> anyhow::Result<Outcome> {
    let report = run_solve(config)?;
    for s in &report.stages {
        println!(
            "n = {:>5}: c_n = {:.10e}  H_n = {:.3e}  tails {:.2e} / {:.2e}  |H| {:.2e}{}",
            s.n,
            s.c_n,
            s.h_n,
            s.bottom_err,
            s.top_err,
            s.h_level.abs(),
            if s.criteria_met { "  ok" } else { "" }
        );
        if !s.descent_converged {
            eprintln!("n = {}: descent stopped after {} iterations (projected gradient {:.3e})", s.n, s.iterations, s.grad_norm);
        }
    }
    Ok(if report.converged { Outcome::Success } else { Outcome::NotConverged })
}

/// The full diagnostic and Euler suite on a checkpoint.
pub fn verification(cp: &Checkpoint, phi: &CrossSectionProfile, config: &RunConfig) -> anyhow::Result<VerificationReport> {
    let f = &cp.field;
    let p = params(cp.lambda)?;
    let l = f.half_length();
    let mut checks = Vec::new();

    checks.push(Check::le("box violation max(−u, u−φ)", check_bounds(f, phi)?.max_violation, 0.0));
    checks.push(Check::ge("min ∂z u", check_monotone(f).min_dz, -config.monotone_tol));
    let margin = if l > 1.0 { 1.0 } else { 0.0 };
    let (bottom, top) = limit_profile_errors(f, phi, margin)?;
    checks.push(Check::le("bottom tail max|u|", bottom, config.eps_tail));
    checks.push(Check::le("top tail max|u − φ|", top, config.eps_tail));
    match hamiltonian_trace(f, &p) {
        Ok(t) => {
            checks.push(Check::le("|H| level", t.level.abs(), config.eps_h));
            checks.push(Check::le("H drift", t.drift, config.h_drift_tol));
        }
        Err(e) => checks.push(Check::le("|H| level", f64::NAN, config.eps_h).with_note(e.to_string())),
    }

    let zero = stability_spectrum(&CrossSectionProfile::zero(f.nx()), &p)?;
    let pi2 = PI * PI;
    checks.push(Check::le("|eig(0) − π²|/π²", (zero.smallest_eig - pi2).abs() / pi2, 1e-2));
    let at_phi = stability_spectrum(phi, &p)?;
    checks.push(Check::ge("eig(φ)", at_phi.smallest_eig, -1e-6));

    let flow = euler_fields(f, &p);
    let (momentum, divergence, order) = match euler_residual(&flow, 2) {
        Ok(r) => (r.momentum.clone(), r.divergence, r.order().unwrap_or(f64::NAN)),
        Err(_) => (Vec::new(), f64::NAN, f64::NAN),
    };
    checks.push(Check::le("div u", divergence, 1e-12));
    checks.push(Check::ge("momentum residual order", order, 1.8));

    let cw = config.central_window.min(l);
    let central = Window::new(0.0, 1.0, -cw, cw)?;
    let sol = ExtendedSolution::new(f.clone(), phi, DomainKind::Strip)?;
    let cflow = euler_flow(sol.sample(&central, f.hx())?, &p);
    let certificate = non_shear_certificate(&cflow);
    checks.push(Check::gt("non-shear certificate", certificate, 0.01));
    let stag = stagnation_check(&cflow);
    checks.push(Check::gt("min |u| on central window", stag.min_speed, 0.0));
    checks.push(Check::le("stagnation cells on central window", stag.stagnation_cells.len() as f64, 0.0));

    let tw = config.theta_window.min(l);
    let (_, ts) = theta_analysis(f, &Window::new(0.0, 1.0, -tw, tw)?)?;
    let note = format!("window [0,1]×[−{tw},{tw}]");
    checks.push(Check::gt("min ρ", ts.min_rho, 0.0).with_note(note.clone()));
    checks.push(Check::le("|θ(0,·)|", ts.left_trace_dev, 2.0 * f.hx()));
    checks.push(Check::le("|θ(1,·) − π|", ts.right_trace_dev, 2.0 * f.hx()));
    checks.push(Check::gt("interior θ min", ts.interior_theta_min, 0.0).with_note(note.clone()));
    checks.push(Check::lt("interior θ max", ts.interior_theta_max, PI).with_note(note.clone()));
    checks.push(Check::le("θ jump between neighbours", ts.max_jump, PI / 2.0).with_note(note));

    let (full_theta, full) = theta_analysis(f, &Window::new(0.0, 1.0, -l, l)?)?;
    let mut growth: Vec<[f64; 2]> = Vec::new();
    for r in GROWTH_RADII {
        let g = theta_growth(&full_theta, r)?;
        checks.push(Check::le(&format!("|max|θ|/R − π| at R = {r}"), (g - PI).abs(), 0.1));
        if let Some([_, prev]) = growth.last() {
            checks.push(Check::ge(&format!("growth increase to R = {r}"), g - prev, -0.1));
        }
        growth.push([r as f64, g]);
    }

    Ok(VerificationReport {
        lambda: cp.lambda,
        nx: f.nx(),
        nz: f.nz(),
        half_length: l,
        energy: energy_j(f, &p),
        smallest_eig_zero: zero.smallest_eig,
        smallest_eig_phi: at_phi.smallest_eig,
        momentum_residuals: momentum,
        non_shear_certificate: certificate,
        min_speed_central: stag.min_speed,
        min_rho_full: full.min_rho,
        unresolved_full: full.unresolved,
        growth,
        all_pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

/// The checkpoint and `φ` recomputed at its `λ` on its grid.
fn load_with_phi(path: &Path) -> anyhow::Result<(Checkpoint, CrossSectionProfile)> {
    let cp = Checkpoint::load(path)?;
    let phi = minimal_minimizer(&params(cp.lambda)?, cp.field.nx()).context("recomputing φ at the checkpoint's λ")?.phi;
    Ok((cp, phi))
}

pub fn cmd_verify(config: &RunConfig, checkpoint: &Path) -> anyhow::Result<Outcome> {
    let dir = output_dir(config)?;
    let (cp, phi) = load_with_phi(checkpoint)?;
    let report = verification(&cp, &phi, config)?;
    write_text(&dir.join(VERIFY_REPORT_FILE), to_toml(&report))?;
    for c in &report.checks {
        println!("{}", c.line());
    }
    Ok(if report.all_pass { Outcome::Success } else { Outcome::VerificationFailed })
}

pub fn kind_name(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Strip => "strip",
        DomainKind::HalfPlane => "half_plane",
        DomainKind::Plane => "plane",
    }
}

/// Writes `euler_<kind>.csv` and `theta_<kind>.csv`; `h` defaults to the
/// checkpoint's `hx`.
pub fn cmd_euler_export(
    config: &RunConfig,
    checkpoint: &Path,
    kind: DomainKind,
    window: Window,
    h: Option<f64>,
) -> anyhow::Result<Outcome> {
    let dir = output_dir(config)?;
    let (cp, phi) = load_with_phi(checkpoint)?;
    let h = h.unwrap_or(cp.field.hx());
    let count = ((window.x_max - window.x_min) / h + 1.0) * ((window.z_max - window.z_min) / h + 1.0);
    anyhow::ensure!(count <= MAX_SAMPLES, "window needs {count:.0} samples (limit {MAX_SAMPLES:.0})");
    let sol = ExtendedSolution::new(cp.field, &phi, kind)?;
    let samples = sol.sample(&window, h)?;
    let theta = theta_from_samples(&samples);
    let flow = euler_flow(samples, &params(cp.lambda)?);
    let name = kind_name(kind);
    write_text(&dir.join(format!("euler_{name}.csv")), flow_csv(&flow))?;
    write_text(&dir.join(format!("theta_{name}.csv")), theta_csv(&theta))?;
    println!("wrote euler_{name}.csv and theta_{name}.csv ({} × {} nodes)", flow.psi.nx + 1, flow.psi.nz + 1);
    Ok(Outcome::Success)
}

/// Collects whatever reports exist in the output directory into
/// `summary.txt`.
pub fn cmd_report(config: &RunConfig) -> anyhow::Result<Outcome> {
    let dir = output_dir(config)?;
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).ok();
    let mut s = String::new();
    let mut found = false;
    if let Some(text) = read(LAMBDA_REPORT_FILE) {
        let r: LambdaStarReport = toml::from_str(&text).context(LAMBDA_REPORT_FILE)?;
        found = true;
        writeln!(s, "lambda_star").unwrap();
        writeln!(s, "  bisection (nx = {})  {:.12e}", r.nx, r.lambda_star).unwrap();
        writeln!(s, "  time map              {:.12e}", r.lambda_timemap).unwrap();
        writeln!(s, "  relative difference   {:.3e}  [{}]", r.relative_difference, if r.agree { "PASS" } else { "FAIL" }).unwrap();
        writeln!(s, "  max φ = {:.6}, I(φ) = {:.3e}", r.phi_max, r.phi_action).unwrap();
    }
    if let Some(text) = read(SOLVE_REPORT_FILE) {
        let r: SolveReport = toml::from_str(&text).context(SOLVE_REPORT_FILE)?;
        found = true;
        writeln!(s, "solve (λ = {:.12e}, {}, nx = {}, L = {})", r.lambda, r.lambda_source, r.nx, r.half_length).unwrap();
        writeln!(s, "  {:>6} {:>20} {:>11} {:>10} {:>10} {:>10} {:>10}", "n", "c_n", "H_n", "bottom", "top", "|H|", "drift").unwrap();
        for t in &r.stages {
            writeln!(
                s,
                "  {:>6} {:>20.12e} {:>11.3e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
                t.n,
                t.c_n,
                t.h_n,
                t.bottom_err,
                t.top_err,
                t.h_level.abs(),
                t.h_drift
            )
            .unwrap();
        }
        writeln!(s, "  converged: {}", r.converged).unwrap();
    }
    if let Some(text) = read(VERIFY_REPORT_FILE) {
        let r: VerificationReport = toml::from_str(&text).context(VERIFY_REPORT_FILE)?;
        found = true;
        writeln!(s, "verification ({} checks, all pass: {})", r.checks.len(), r.all_pass).unwrap();
        for c in &r.checks {
            writeln!(s, "  {}", c.line()).unwrap();
        }
    }
    anyhow::ensure!(found, "no reports in {}", dir.display());
    write_text(&dir.join(SUMMARY_FILE), s.clone())?;
    print!("{s}");
    Ok(Outcome::Success)
}
