use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use heterocyl_core::SolverConfig;
use serde::{Deserialize, Serialize};

/// Environment override for `output_dir` (the only one).
pub const OUTPUT_DIR_ENV: &str = "HETEROCYL_OUTPUT_DIR";

/// Everything a run depends on. Stored as flat TOML next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nx: usize,
    pub nz_per_unit: usize,
    pub n_schedule: Vec<f64>,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub eps_tail: f64,
    #[serde(rename = "eps_H")]
    pub eps_h: f64,
    /// Relative agreement required between the two λ* oracles.
    pub lambda_tol: f64,
    /// Grid of the λ* cross-oracle run.
    pub lambda_nx: usize,
    /// Use this λ instead of calibrating λ* on the solver grid.
    pub lambda_override: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    pub exhaust_schedule: bool,
    /// Verification thresholds that have no natural zero.
    #[serde(rename = "H_drift_tol")]
    pub h_drift_tol: f64,
    pub monotone_tol: f64,
    /// Half-heights of the certified θ window and the central Euler window.
    pub theta_window: f64,
    pub central_window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            nx: s.nx,
            nz_per_unit: s.nz_per_unit,
            n_schedule: s.n_schedule,
            grad_tol: s.grad_tol,
            max_iter: s.max_iter,
            eps_tail: s.eps_tail,
            eps_h: s.eps_h,
            lambda_tol: 1e-3,
            lambda_nx: 512,
            lambda_override: None,
            output_dir: None,
            seed: 0,
            exhaust_schedule: s.exhaust_schedule,
            h_drift_tol: 2e-2,
            monotone_tol: 1e-10,
            theta_window: 4.0,
            central_window: 2.0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let c: Self = toml::from_str(text).context("malformed configuration")?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// The copy saved next to the results: without `output_dir`, so the
    /// directory can be moved and identical runs write identical bytes.
    pub fn to_saved_toml(&self) -> String {
        Self { output_dir: None, ..self.clone() }.to_toml()
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let tols = [
            ("grad_tol", self.grad_tol),
            ("eps_tail", self.eps_tail),
            ("eps_H", self.eps_h),
            ("lambda_tol", self.lambda_tol),
            ("H_drift_tol", self.h_drift_tol),
            ("monotone_tol", self.monotone_tol),
            ("theta_window", self.theta_window),
            ("central_window", self.central_window),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if self.n_schedule.is_empty() {
            bail!("n_schedule is empty");
        }
        if !self.n_schedule.windows(2).all(|w| w[0] < w[1]) {
            bail!("n_schedule must be strictly increasing");
        }
        if self.nx < 8 || self.nz_per_unit == 0 || self.lambda_nx < 8 || self.max_iter == 0 {
            bail!("grid sizes must be ≥ 8 and max_iter positive");
        }
        if let Some(l) = self.lambda_override {
            if !(l > 0.0 && l.is_finite()) {
                bail!("lambda_override must be positive");
            }
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            nx: self.nx,
            nz_per_unit: self.nz_per_unit,
            grad_tol: self.grad_tol,
            max_iter: self.max_iter,
            n_schedule: self.n_schedule.clone(),
            eps_tail: self.eps_tail,
            eps_h: self.eps_h,
            exhaust_schedule: self.exhaust_schedule,
            ..SolverConfig::default()
        }
    }

    /// Output directory: command line, then the environment, then the file.
    pub fn resolve_output_dir(&mut self, cli: Option<PathBuf>, env: Option<PathBuf>) {
        if let Some(d) = cli.or(env) {
            self.output_dir = Some(d);
        }
    }
}
