//! Matrix-free normalized adjacency `A = D^{-1/2} W D^{-1/2}` of the fully
//! connected kernel graph, where `W = W~ - K(0) I` has zero diagonal, and the
//! symmetric Laplacian `L_s = I - A`.

use crate::error::{check_len, FgsError, Result};
use crate::fastsum::{error_matrix_norm, FastsumParams, FastsumPlan};
use crate::kernels::KernelSpec;
use crate::spectral::SymmetricOperator;

#[derive(Debug, Clone)]
pub struct AdjacencyOperator {
    plan: FastsumPlan,
    degrees: Vec<f64>,
    inv_sqrt_degrees: Vec<f64>,
    k0: f64,
}

impl AdjacencyOperator {
    /// Computes degrees `W~ 1 - K(0)` with one product and checks positivity.
    pub fn new(plan: FastsumPlan) -> Result<Self> {
        let n = plan.len();
        if n < 2 {
            return Err(FgsError::Parameter(format!("graph needs at least 2 nodes, got {n}")));
        }
        let k0 = plan.k0();
        let degrees: Vec<f64> = plan.apply(&vec![1.0; n])?.into_iter().map(|s| s - k0).collect();
        if let Some((index, &value)) = degrees
            .iter()
            .enumerate()
            .find(|(_, d)| !(**d > 0.0 && d.is_finite()))
        {
            return Err(FgsError::DegreePositivity { index, value });
        }
        let inv_sqrt_degrees = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
        Ok(Self {
            plan,
            degrees,
            inv_sqrt_degrees,
            k0,
        })
    }

    /// NFFT-accelerated operator.
    pub fn build(nodes: &[f64], dim: usize, kernel: KernelSpec, params: FastsumParams) -> Result<Self> {
        Self::new(FastsumPlan::new(nodes, dim, kernel, params)?)
    }

    /// Exact `O(n^2)` operator.
    pub fn exact(nodes: &[f64], dim: usize, kernel: KernelSpec) -> Result<Self> {
        Self::new(FastsumPlan::direct(nodes, dim, kernel)?)
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn plan(&self) -> &FastsumPlan {
        &self.plan
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn inv_sqrt_degrees(&self) -> &[f64] {
        &self.inv_sqrt_degrees
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// `D^{1/2} 1`, the eigenvector of `A` for eigenvalue 1.
    pub fn perron_vector(&self) -> Vec<f64> {
        self.degrees.iter().map(|d| d.sqrt()).collect()
    }

    /// `A x = D^{-1/2} (W~ (D^{-1/2} x) - K(0) D^{-1/2} x)`.
    pub fn apply_normalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), x.len())?;
        let z: Vec<f64> = x.iter().zip(&self.inv_sqrt_degrees).map(|(a, s)| a * s).collect();
        let wz = self.plan.apply(&z)?;
        Ok(wz
            .iter()
            .zip(&z)
            .zip(&self.inv_sqrt_degrees)
            .map(|((w, zi), s)| s * (w - self.k0 * zi))
            .collect())
    }

    /// `L_s x = x - A x`.
    pub fn apply_sym_laplacian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = self.apply_normalized(x)?;
        Ok(x.iter().zip(ax).map(|(a, b)| a - b).collect())
    }

    /// View of `L_s` as an operator.
    pub fn laplacian(&self) -> SymLaplacian<'_> {
        SymLaplacian(self)
    }
}

impl SymmetricOperator for AdjacencyOperator {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_normalized(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SymLaplacian<'a>(&'a AdjacencyOperator);

impl SymmetricOperator for SymLaplacian<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.apply_sym_laplacian(x)
    }
}

/// `eps (1 + eta) / (eta (eta - eps))` if `eps < eta`, else `None`.
pub fn propagation_bound(eta: f64, epsilon: f64) -> Option<f64> {
    if !(eta > 0.0) || !(epsilon >= 0.0) || epsilon >= eta {
        return None;
    }
    Some(epsilon * (1.0 + eta) / (eta * (eta - epsilon)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    /// `eps ~ n ||K_ERR||_inf / ||W||_inf` from sampled kernel error and the
    /// approximate degrees.
    Sampled,
    /// Exact `||E||_inf` column by column; `O(n^2)` work.
    Exact,
}

/// Quantities of the error-propagation bound for `A`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PropagationEstimate {
    pub mode: EstimateMode,
    /// `d_min / ||W||_inf`
    pub eta: f64,
    /// `||E||_inf / ||W||_inf`
    pub epsilon: f64,
    /// Bound on `||A - A_E||_inf`; `None` when `epsilon >= eta`.
    pub bound: Option<f64>,
}

/// Sample count and seed used by [`EstimateMode::Sampled`].
pub const ESTIMATE_SAMPLES: usize = 2000;
const ESTIMATE_SEED: u64 = 0x5eed;

pub fn estimate_eta_epsilon(op: &AdjacencyOperator, mode: EstimateMode) -> Result<PropagationEstimate> {
    let plan = op.plan();
    let n = op.len();
    let (d_min, w_inf, e_inf) = match mode {
        EstimateMode::Sampled => {
            let d_min = op.degrees().iter().copied().fold(f64::INFINITY, f64::min);
            let w_inf = op.degrees().iter().copied().fold(0.0, f64::max);
            let kerr = plan.kernel_error_estimate(ESTIMATE_SAMPLES, ESTIMATE_SEED);
            (d_min, w_inf, n as f64 * kerr)
        }
        EstimateMode::Exact => {
            let exact = FastsumPlan::direct(plan.nodes(), plan.dim(), *plan.kernel())?;
            let k0 = plan.k0();
            let degrees: Vec<f64> = exact.apply(&vec![1.0; n])?.into_iter().map(|s| s - k0).collect();
            let d_min = degrees.iter().copied().fold(f64::INFINITY, f64::min);
            let w_inf = degrees.iter().copied().fold(0.0, f64::max);
            let e_inf = if plan.is_exact() {
                0.0
            } else {
                error_matrix_norm(plan, plan.nodes(), plan.kernel())?
            };
            (d_min, w_inf, e_inf)
        }
    };
    let eta = d_min / w_inf;
    let epsilon = e_inf / w_inf;
    Ok(PropagationEstimate {
        mode,
        eta,
        epsilon,
        bound: propagation_bound(eta, epsilon),
    })
}
