//! Two-class kernel SSL: `(I + beta L_s) u = f`.

use crate::error::{check_len, FgsError, Result};
use crate::graphop::AdjacencyOperator;
use crate::spectral::{cg_solve, EigenPairs, FnOperator};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SslResult {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
}

impl SslResult {
    /// `1` where `u > 0`, else `0`.
    pub fn labels(&self) -> Vec<usize> {
        self.u.iter().map(|&v| usize::from(v > 0.0)).collect()
    }
}

/// CG on `x -> x + beta (x - A x)` with the fast adjacency operator.
pub fn kernel_ssl_solve(op: &AdjacencyOperator, f: &[f64], beta: f64, tol: f64, max_iter: usize) -> Result<SslResult> {
    check_len(op.len(), f.len())?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(FgsError::Parameter(format!("beta must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(SslResult {
            u: f.to_vec(),
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        });
    }
    let system = FnOperator::new(op.len(), |x: &[f64]| {
        let ax = op.apply_normalized(x)?;
        Ok(x.iter().zip(ax).map(|(xi, ai)| xi + beta * (xi - ai)).collect())
    });
    let res = cg_solve(&system, f, tol, max_iter)?;
    Ok(SslResult {
        u: res.x,
        iterations: res.iterations,
        converged: res.converged,
        relative_residual: res.relative_residual,
    })
}

/// Closed-form solve with `A ~ V_k Lambda_k V_k^T`: spectral coordinates
/// scale by `1/(1 + beta(1 - lambda_j))`, the complement by `1/(1 + beta)`.
pub fn kernel_ssl_truncated(pairs: &EigenPairs, f: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_len(pairs.dim(), f.len())?;
    let base = 1.0 / (1.0 + beta);
    let mut u: Vec<f64> = f.iter().map(|v| v * base).collect();
    for (j, &lambda) in pairs.values().iter().enumerate() {
        let v = pairs.vector(j);
        let c: f64 = v.iter().zip(f).map(|(a, b)| a * b).sum();
        let w = c * (1.0 / (1.0 + beta * (1.0 - lambda)) - base);
        for (ui, vi) in u.iter_mut().zip(v) {
            *ui += w * vi;
        }
    }
    Ok(u)
}
