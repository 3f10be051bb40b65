use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("descent did not converge after {iterations} iterations (projected gradient {grad_norm:.3e})")]
    NotConverged {
        iterations: usize,
        grad_norm: f64,
        best: Vec<f64>,
        energy: f64,
    },
    #[error("family degenerate at this resolution: no λ bracket in [{lo:e}, {hi:e}]")]
    DegenerateFamily { lo: f64, hi: f64 },
    #[error("blow-up: |φ| exceeded {limit} at x = {at}")]
    BlowUp { limit: f64, at: f64 },
    #[error("no positive solution detected on slope scan [{lo:e}, {hi:e}]")]
    NoPositiveSolution { lo: f64, hi: f64 },
    #[error("quadrature did not converge; last bracket [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },
    #[error("H2 violated at λ = {lambda}: no positive zero-action profile")]
    H2Violated { lambda: f64 },
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("eigen-iteration did not converge after {0} iterations")]
    Eigen(usize),
}
