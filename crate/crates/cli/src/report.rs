//! Structured-text (TOML) reports. They hold no timestamps or timings, so
//! identical runs write identical bytes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStarReport {
    pub nx: usize,
    pub lambda_star: f64,
    pub lambda_timemap: f64,
    pub relative_difference: f64,
    pub lambda_tol: f64,
    pub agree: bool,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub phi_max: f64,
    pub phi_action: f64,
    pub candidates_ordered: bool,
    pub shooting_action: Option<f64>,
    pub shooting_vs_minimizer: Option<f64>,
    /// `[λ, m_λ]` rows in evaluation order.
    pub m_trace: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub n: f64,
    pub c_n: f64,
    #[serde(rename = "H_n")]
    pub h_n: f64,
    pub z_n: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub bottom_err: f64,
    pub top_err: f64,
    #[serde(rename = "H_level")]
    pub h_level: f64,
    #[serde(rename = "H_drift")]
    pub h_drift: f64,
    pub descent_converged: bool,
    pub criteria_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lambda: f64,
    /// `"calibrated"` (λ* on the solver grid) or `"override"`.
    pub lambda_source: String,
    pub nx: usize,
    pub nz: usize,
    pub half_length: f64,
    pub shift: f64,
    pub converged: bool,
    pub stages: Vec<StageReport>,
}

/// One measured quantity against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// One of `<=`, `<`, `>=`, `>`.
    pub relation: String,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, measured: f64, relation: &str, threshold: f64) -> Self {
        let pass = match relation {
            "<=" => measured <= threshold,
            "<" => measured < threshold,
            ">=" => measured >= threshold,
            ">" => measured > threshold,
            _ => unreachable!("unknown relation {relation}"),
        };
        Self { name: name.into(), measured, relation: relation.into(), threshold, pass, note: None }
    }

    pub fn le(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, "<=", threshold)
    }

    pub fn lt(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, "<", threshold)
    }

    pub fn ge(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, ">=", threshold)
    }

    pub fn gt(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, ">", threshold)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: {:.6e} {} {:.6e}{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.relation,
            self.threshold,
            self.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lambda: f64,
    pub nx: usize,
    pub nz: usize,
    pub half_length: f64,
    pub energy: f64,
    pub smallest_eig_zero: f64,
    pub smallest_eig_phi: f64,
    pub momentum_residuals: Vec<f64>,
    pub non_shear_certificate: f64,
    pub min_speed_central: f64,
    /// `min ρ` over the whole stored strip and the nodes where `θ` is
    /// unresolved (saturated tails).
    pub min_rho_full: f64,
    pub unresolved_full: usize,
    pub growth: Vec<[f64; 2]>,
    pub all_pass: bool,
    pub checks: Vec<Check>,
}

pub fn to_toml<T: Serialize>(r: &T) -> String {
    toml::to_string(r).expect("reports are always serializable")
}
