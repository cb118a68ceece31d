//! Approximate products with the dense kernel matrix `W~_{ji} = K(v_j - v_i)`
//! (diagonal `K(0)` included) in `O(n)` operations: adjoint NFFT, pointwise
//! multiplication by the kernel's Fourier coefficients, forward NFFT.
//!
//! Nodes are scaled by `rho = (1/4 - eps_b/2) / max |v_j|` when they do not
//! already fit, so all pairwise differences lie in the ball where the
//! trigonometric approximant is accurate. The kernel parameter is scaled
//! with them:
//!
//! | family                | adjusted parameter | output factor |
//! |-----------------------|--------------------|---------------|
//! | Gaussian, LaplacianRbf| `sigma * rho`      | 1             |
//! | Multiquadric          | `c * rho`          | `1 / rho`     |
//! | InverseMultiquadric   | `c * rho`          | `rho`         |

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_len, FgsError, Result};
use crate::kernels::{
    kernel_approx_error, kernel_fourier_coefficients, KernelCoefficients, KernelFamily, KernelSpec, RegularizedKernel,
    MAX_SMOOTHNESS,
};
use crate::nfft::{window_error_estimate, NfftPlan, MAX_DIM};

/// Accuracy controls for the fast summation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FastsumParams {
    /// Trigonometric bandwidth `N` (even).
    pub bandwidth: usize,
    /// NFFT window cut-off `m`.
    pub cutoff: usize,
    /// Regularization smoothness `p`.
    pub smoothness: usize,
    /// Boundary-region width `eps_b` in `[0, 1/2)`.
    pub eps_b: f64,
}

impl FastsumParams {
    /// `p = m` and `eps_b = p / N`.
    pub fn new(bandwidth: usize, cutoff: usize) -> Result<Self> {
        let params = Self {
            bandwidth,
            cutoff,
            smoothness: cutoff,
            eps_b: cutoff as f64 / bandwidth.max(1) as f64,
        };
        params.validate()?;
        Ok(params)
    }

    /// Presets used in the benchmarks: 1 = (16, 2), 2 = (32, 4), 3 = (64, 7),
    /// with `p = m` and `eps_b = 0`.
    pub fn setup(id: u8) -> Result<Self> {
        let (bandwidth, cutoff) = match id {
            1 => (16, 2),
            2 => (32, 4),
            3 => (64, 7),
            _ => return Err(FgsError::Parameter(format!("unknown setup #{id}, expected 1, 2 or 3"))),
        };
        Ok(Self {
            bandwidth,
            cutoff,
            smoothness: cutoff,
            eps_b: 0.0,
        })
    }

    pub fn with_eps_b(mut self, eps_b: f64) -> Result<Self> {
        self.eps_b = eps_b;
        self.validate()?;
        Ok(self)
    }

    pub fn with_smoothness(mut self, p: usize) -> Result<Self> {
        self.smoothness = p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth < 2 || !self.bandwidth.is_multiple_of(2) {
            return Err(FgsError::Parameter(format!(
                "bandwidth N must be even and >= 2, got {}",
                self.bandwidth
            )));
        }
        if self.cutoff == 0 {
            return Err(FgsError::Parameter("window cut-off m must be >= 1".into()));
        }
        if !(self.eps_b >= 0.0 && self.eps_b < 0.5) {
            return Err(FgsError::Parameter(format!("eps_b must lie in [0, 1/2), got {}", self.eps_b)));
        }
        if self.eps_b > 0.0 && (self.smoothness == 0 || self.smoothness > MAX_SMOOTHNESS) {
            return Err(FgsError::Parameter(format!(
                "smoothness p must be in 1..={MAX_SMOOTHNESS}, got {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    /// Radius bound for scaled nodes.
    pub fn node_radius(&self) -> f64 {
        0.25 - 0.5 * self.eps_b
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Nfft {
        plan: Box<NfftPlan>,
        coeffs: KernelCoefficients,
        /// `sum |b_l|` over frequencies with a `-N/2` component. These have no
        /// conjugate partner, so they bound the imaginary part of the output.
        nyquist_mass: f64,
    },
    /// Exact `O(n^2)` products on the original nodes.
    Direct,
}

/// Reusable fast-summation operator for one node set and kernel.
#[derive(Debug, Clone)]
pub struct FastsumPlan {
    kernel: KernelSpec,
    scaled_kernel: KernelSpec,
    params: Option<FastsumParams>,
    rho: f64,
    output_scale: f64,
    dim: usize,
    n: usize,
    nodes: Vec<f64>,
    backend: Backend,
}

fn validate_nodes(nodes: &[f64], dim: usize) -> Result<usize> {
    if dim == 0 || dim > MAX_DIM {
        return Err(FgsError::Parameter(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    if nodes.is_empty() {
        return Err(FgsError::Parameter("node set is empty".into()));
    }
    if !nodes.len().is_multiple_of(dim) {
        return Err(FgsError::Shape {
            expected: nodes.len().div_ceil(dim) * dim,
            got: nodes.len(),
        });
    }
    if let Some(i) = nodes.iter().position(|v| !v.is_finite()) {
        return Err(FgsError::Range {
            index: i / dim,
            detail: "non-finite coordinate".into(),
        });
    }
    Ok(nodes.len() / dim)
}

impl FastsumPlan {
    /// Builds the NFFT-based operator. `nodes` is row-major `n x dim`.
    pub fn new(nodes: &[f64], dim: usize, kernel: KernelSpec, params: FastsumParams) -> Result<Self> {
        params.validate()?;
        let n = validate_nodes(nodes, dim)?;
        let bound = params.node_radius();
        let max_norm = nodes
            .chunks_exact(dim)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max);

        let mut rho = if max_norm > bound { bound / max_norm } else { 1.0 };
        let mut scaled: Vec<f64> = nodes.iter().map(|x| x * rho).collect();
        // Rounding may leave a node a few ulps outside the bound.
        while rho < 1.0 && scaled.chunks_exact(dim).any(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt() > bound) {
            rho *= 1.0 - 4.0 * f64::EPSILON;
            scaled = nodes.iter().map(|x| x * rho).collect();
        }

        let scaled_kernel = kernel.with_param(kernel.param * rho);
        let output_scale = match kernel.family {
            KernelFamily::Gaussian | KernelFamily::LaplacianRbf => 1.0,
            KernelFamily::Multiquadric => 1.0 / rho,
            KernelFamily::InverseMultiquadric => rho,
        };
        let kr = RegularizedKernel::new(scaled_kernel, params.eps_b, params.smoothness.max(1))?;
        let coeffs = kernel_fourier_coefficients(&kr, params.bandwidth, dim)?;
        let plan = NfftPlan::new(dim, params.bandwidth, params.cutoff, &scaled)?;
        let half = (params.bandwidth / 2) as i64;
        let nyquist_mass = coeffs
            .index_set
            .iter()
            .zip(&coeffs.values)
            .filter(|(l, _)| l[..dim].contains(&-half))
            .map(|(_, b)| b.norm())
            .sum();
        Ok(Self {
            kernel,
            scaled_kernel,
            params: Some(params),
            rho,
            output_scale,
            dim,
            n,
            nodes: nodes.to_vec(),
            backend: Backend::Nfft {
                plan: Box::new(plan),
                coeffs,
                nyquist_mass,
            },
        })
    }

    /// Exact backend with the same interface, for oracles and small problems.
    pub fn direct(nodes: &[f64], dim: usize, kernel: KernelSpec) -> Result<Self> {
        let n = validate_nodes(nodes, dim)?;
        Ok(Self {
            kernel,
            scaled_kernel: kernel,
            params: None,
            rho: 1.0,
            output_scale: 1.0,
            dim,
            n,
            nodes: nodes.to_vec(),
            backend: Backend::Direct,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Original (unscaled) nodes, row-major.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Kernel with the parameter adjusted to the scaled nodes.
    pub fn scaled_kernel(&self) -> &KernelSpec {
        &self.scaled_kernel
    }

    /// `None` for the direct backend.
    pub fn params(&self) -> Option<&FastsumParams> {
        self.params.as_ref()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.backend, Backend::Direct)
    }

    /// Diagonal entry `K(0)` of `W~`.
    pub fn k0(&self) -> f64 {
        self.kernel.radial(0.0)
    }

    pub fn coefficients(&self) -> Option<&KernelCoefficients> {
        match &self.backend {
            Backend::Nfft { coeffs, .. } => Some(coeffs),
            Backend::Direct => None,
        }
    }

    /// `W~ x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        match &self.backend {
            Backend::Direct => direct_apply(&self.nodes, self.dim, &self.kernel, x),
            Backend::Nfft {
                plan,
                coeffs,
                nyquist_mass,
            } => {
                let input: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let mut fhat = plan.adjoint(&input)?;
                for (f, b) in fhat.iter_mut().zip(&coeffs.values) {
                    *f *= b;
                }
                let out = plan.forward(&fhat)?;
                if cfg!(debug_assertions) {
                    let scale = out.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
                    let imag = out.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
                    let l1: f64 = x.iter().map(|v| v.abs()).sum();
                    debug_assert!(
                        imag <= 1e-8 * scale + l1 * (nyquist_mass + 1e-10),
                        "imaginary residue {imag:e} vs scale {scale:e}"
                    );
                }
                Ok(out.iter().map(|v| v.re * self.output_scale).collect())
            }
        }
    }

    /// A-priori bound on `||W~_fast x - W~ x||_inf / ||x||_1`: the sampled
    /// kernel error plus the NFFT window error of the adjoint and forward
    /// transforms, with a safety factor of 10.
    pub fn error_estimate(&self, samples: usize, seed: u64) -> f64 {
        match &self.backend {
            Backend::Direct => 0.0,
            Backend::Nfft { coeffs, .. } => {
                let b1: f64 = coeffs.values.iter().map(|b| b.norm()).sum();
                let window = 2.0 * self.dim as f64 * window_error_estimate(self.params.map_or(1, |p| p.cutoff));
                10.0 * (self.kernel_error_estimate(samples, seed) + window * b1 * self.output_scale)
            }
        }
    }

    /// Sampled estimate of the kernel approximation error in original units.
    pub fn kernel_error_estimate(&self, samples: usize, seed: u64) -> f64 {
        match &self.backend {
            Backend::Direct => 0.0,
            Backend::Nfft { coeffs, .. } => {
                kernel_approx_error(&self.scaled_kernel, coeffs, samples, seed) * self.output_scale
            }
        }
    }
}

/// Exact `sum_i x_i K(v_j - v_i)` including the diagonal.
pub fn direct_apply(nodes: &[f64], dim: usize, kernel: &KernelSpec, x: &[f64]) -> Result<Vec<f64>> {
    let n = validate_nodes(nodes, dim)?;
    check_len(n, x.len())?;
    Ok(nodes
        .par_chunks_exact(dim)
        .with_min_len(16)
        .map(|vj| {
            nodes
                .chunks_exact(dim)
                .zip(x)
                .map(|(vi, &xi)| xi * kernel.between(vj, vi))
                .sum()
        })
        .collect())
}

/// `||E||_inf` for `E = W~_fast - W~`, accumulated column by column.
pub fn error_matrix_norm(plan: &FastsumPlan, nodes: &[f64], kernel: &KernelSpec) -> Result<f64> {
    let dim = plan.dim();
    let n = validate_nodes(nodes, dim)?;
    check_len(plan.len(), n)?;
    let rows = (0..n)
        .into_par_iter()
        .with_min_len(8)
        .try_fold(
            || vec![0.0; n],
            |mut acc, i| -> Result<Vec<f64>> {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let col = plan.apply(&e)?;
                let vi = &nodes[i * dim..(i + 1) * dim];
                for (j, (a, c)) in acc.iter_mut().zip(&col).enumerate() {
                    *a += (c - kernel.between(&nodes[j * dim..(j + 1) * dim], vi)).abs();
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0.0; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}
