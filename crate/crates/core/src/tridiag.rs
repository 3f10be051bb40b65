//! Symmetric tridiagonal systems and smallest eigenpairs.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
    }

    /// Solves `(A - shift·I) x = b` by the Thomas algorithm (no pivoting).
    pub fn solve_shifted(&self, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - shift;
        if denom == 0.0 {
            return Err(Error::InvalidInput("singular tridiagonal system".into()));
        }
        c[0] = if n > 1 { self.off[0] / denom } else { 0.0 };
        d[0] = b[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
            if denom == 0.0 {
                return Err(Error::InvalidInput("singular tridiagonal system".into()));
            }
            c[i] = if i + 1 < n { self.off[i] / denom } else { 0.0 };
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Smallest eigenvalue by shifted inverse power iteration.
    ///
    /// `shift` must lie below the spectrum so that the iteration converges to
    /// the bottom eigenpair. Returns the Rayleigh quotient, the normalized
    /// eigenvector and the final residual `‖Av − θv‖∞`.
    pub fn smallest_eigenpair(&self, shift: f64, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, f64)> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n)
            .map(|i| libm::sin(core::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64))
            .collect();
        normalize(&mut v);
        let mut av = vec![0.0; n];
        let mut theta = f64::NAN;
        for _ in 0..max_iter {
            let mut w = self.solve_shifted(shift, &v)?;
            normalize(&mut w);
            v = w;
            self.apply(&v, &mut av);
            theta = v.iter().zip(&av).map(|(a, b)| a * b).sum();
            let res = v
                .iter()
                .zip(&av)
                .map(|(vi, ai)| (ai - theta * vi).abs())
                .fold(0.0, f64::max);
            if res <= tol * theta.abs().max(1.0) {
                return Ok((theta, v, res));
            }
        }
        let _ = theta;
        Err(Error::Eigen(max_iter))
    }
}

/// Factored `a·I + b·tridiag(−1, 2, −1)` of size `n`, solved repeatedly.
#[derive(Debug, Clone)]
pub struct ToeplitzSolver {
    b: f64,
    cprime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl ToeplitzSolver {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        let mut cprime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let diag = a + 2.0 * b;
        let mut prev = 0.0;
        for i in 0..n {
            let denom = diag + b * prev;
            inv_denom[i] = 1.0 / denom;
            prev = -b / denom;
            cprime[i] = prev;
        }
        Self { b, cprime, inv_denom }
    }

    pub fn len(&self) -> usize {
        self.cprime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cprime.is_empty()
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.len();
        let mut prev = 0.0;
        for i in 0..n {
            prev = (x[i] + self.b * prev) * self.inv_denom[i];
            x[i] = prev;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.cprime[i] * x[i + 1];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let s = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= s / norm);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_product() {
        let a = SymTridiagonal::new(vec![4.0, 5.0, 6.0, 7.0], vec![1.0, -2.0, 0.5]);
        let x = [1.0, -1.0, 2.0, 0.25];
        let mut b = [0.0; 4];
        a.apply(&x, &mut b);
        let y = a.solve_shifted(0.0, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn toeplitz_solver_inverts() {
        let (a, b) = (0.7, 3.0);
        let n = 9;
        let m = SymTridiagonal::new(vec![a + 2.0 * b; n], vec![-b; n - 1]);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut rhs = vec![0.0; n];
        m.apply(&x, &mut rhs);
        ToeplitzSolver::new(n, a, b).solve_in_place(&mut rhs);
        for (p, q) in x.iter().zip(&rhs) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_laplacian_bottom() {
        let n = 99;
        let h = 1.0 / (n + 1) as f64;
        let a = SymTridiagonal::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1]);
        let (ev, _, _) = a.smallest_eigenpair(-10.0, 1e-12, 500).unwrap();
        let exact = 4.0 / (h * h) * libm::sin(core::f64::consts::PI * h / 2.0).powi(2);
        assert!((ev - exact).abs() < 1e-8 * exact);
    }
}
