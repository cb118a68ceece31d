//! Eigensolver pipelines shared by the commands and the benchmark.

use serde::Serialize;

use super::report::{definitions, timed, Report};
use crate::error::{FgsError, Result};
use crate::fastsum::FastsumParams;
use crate::graphop::AdjacencyOperator;
use crate::kernels::KernelSpec;
use crate::spectral::{
    dense_reference_apply, lanczos_largest, max_eigenvalue_error, nystrom_gaussian_nfft, nystrom_traditional,
    residual_norms, EigenPairs, HybridNystromOptions, LanczosOptions, NystromOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EigMethod {
    /// Lanczos on the fast-summation operator.
    NfftLanczos,
    /// Traditional Nyström from sampled kernel columns.
    Nystrom,
    /// Gaussian-sketch Nyström with fast-summation products.
    NystromGaussNfft,
    /// Lanczos on the exact dense operator.
    Direct,
}

impl EigMethod {
    pub fn name(self) -> &'static str {
        match self {
            EigMethod::NfftLanczos => "nfft-lanczos",
            EigMethod::Nystrom => "nystrom",
            EigMethod::NystromGaussNfft => "nystrom-gauss-nfft",
            EigMethod::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigConfig {
    pub method: EigMethod,
    pub kernel: KernelSpec,
    pub fastsum: FastsumParams,
    pub k: usize,
    /// Nyström sample size `L`; defaults per method when `None`.
    pub samples: Option<usize>,
    /// Inversion rank `M` of the hybrid method; defaults to `k`.
    pub rank: Option<usize>,
    pub seed: u64,
    pub lanczos: LanczosOptions,
}

impl EigConfig {
    pub fn new(method: EigMethod, kernel: KernelSpec, fastsum: FastsumParams, k: usize, seed: u64) -> Self {
        Self {
            method,
            kernel,
            fastsum,
            k,
            samples: None,
            rank: None,
            seed,
            lanczos: LanczosOptions {
                seed,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigOutcome {
    pub pairs: EigenPairs,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
}

/// Top-`k` eigenpairs of `A = D^{-1/2} W D^{-1/2}` by the chosen method.
pub fn compute_eigenpairs(nodes: &[f64], dim: usize, cfg: &EigConfig) -> Result<EigOutcome> {
    let n = nodes.len() / dim.max(1);
    match cfg.method {
        EigMethod::NfftLanczos | EigMethod::Direct => {
            let (op, setup_seconds) = timed(|| {
                if cfg.method == EigMethod::Direct {
                    AdjacencyOperator::exact(nodes, dim, cfg.kernel)
                } else {
                    AdjacencyOperator::build(nodes, dim, cfg.kernel, cfg.fastsum)
                }
            });
            let op = op?;
            let (res, solve_seconds) = timed(|| lanczos_largest(&op, cfg.k, &cfg.lanczos));
            let res = res?;
            Ok(EigOutcome {
                pairs: res.pairs,
                setup_seconds,
                solve_seconds,
                iterations: Some(res.iterations),
                converged: Some(res.converged),
            })
        }
        EigMethod::Nystrom => {
            let opts = NystromOptions {
                samples: cfg.samples.unwrap_or((n / 4).max(cfg.k)),
                k: cfg.k,
                seed: cfg.seed,
            };
            let (pairs, solve_seconds) = timed(|| nystrom_traditional(nodes, dim, &cfg.kernel, &opts));
            Ok(EigOutcome {
                pairs: pairs?,
                setup_seconds: 0.0,
                solve_seconds,
                iterations: None,
                converged: None,
            })
        }
        EigMethod::NystromGaussNfft => {
            let (op, setup_seconds) = timed(|| AdjacencyOperator::build(nodes, dim, cfg.kernel, cfg.fastsum));
            let op = op?;
            let rank = cfg.rank.unwrap_or(cfg.k);
            let opts = HybridNystromOptions {
                samples: cfg.samples.unwrap_or(5 * rank),
                rank,
                k: cfg.k,
                seed: cfg.seed,
            };
            let (pairs, solve_seconds) = timed(|| nystrom_gaussian_nfft(&op, &opts));
            Ok(EigOutcome {
                pairs: pairs?,
                setup_seconds,
                solve_seconds,
                iterations: None,
                converged: None,
            })
        }
    }
}

/// Accuracy of `pairs` against the exact operator.
#[derive(Debug, Clone)]
pub struct ReferenceComparison {
    pub reference_values: Vec<f64>,
    pub max_eigenvalue_error: f64,
    pub max_residual: f64,
    pub reference_seconds: f64,
}

pub fn compare_with_reference(nodes: &[f64], dim: usize, kernel: &KernelSpec, pairs: &EigenPairs) -> Result<ReferenceComparison> {
    let (out, reference_seconds) = timed(|| -> Result<_> {
        let dense = dense_reference_apply(nodes, dim, kernel)?;
        let opts = LanczosOptions {
            tol: 1e-14,
            max_iter: 1000,
            ..Default::default()
        };
        let reference = lanczos_largest(&dense, pairs.len().max(1), &opts)?.pairs;
        let (_, max_residual) = residual_norms(&dense, pairs)?;
        Ok((reference.values().to_vec(), max_residual))
    });
    let (reference_values, max_residual) = out?;
    Ok(ReferenceComparison {
        max_eigenvalue_error: max_eigenvalue_error(pairs.values(), &reference_values),
        reference_values,
        max_residual,
        reference_seconds,
    })
}

/// Eigenpairs plus timings and, optionally, reference metrics in `report`.
pub fn eigs_into_report(
    nodes: &[f64],
    dim: usize,
    cfg: &EigConfig,
    with_reference: bool,
    report: &mut Report,
) -> Result<EigOutcome> {
    report.method = Some(cfg.method.name().into());
    report.n = nodes.len() / dim;
    let out = compute_eigenpairs(nodes, dim, cfg)?;
    report.eigenvalues = Some(out.pairs.values().to_vec());
    report.time("setup", out.setup_seconds);
    report.time("eigensolve", out.solve_seconds);
    if let Some(it) = out.iterations {
        report.metric("lanczos_iterations", it as f64, definitions::ITERATIONS);
    }
    if with_reference {
        let cmp = compare_with_reference(nodes, dim, &cfg.kernel, &out.pairs)?;
        report.metric("max_eigenvalue_error", cmp.max_eigenvalue_error, definitions::MAX_EIGENVALUE_ERROR);
        report.metric("max_residual_norm", cmp.max_residual, definitions::MAX_RESIDUAL_NORM);
        report.time("reference", cmp.reference_seconds);
    }
    Ok(out)
}

pub(crate) fn usage(msg: impl Into<String>) -> FgsError {
    FgsError::Parameter(msg.into())
}
