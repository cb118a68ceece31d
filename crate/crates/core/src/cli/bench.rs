//! Accuracy/runtime sweep: methods x sizes x seeds on generated spirals.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use super::data::gen_spiral;
use super::pipeline::{compare_with_reference, compute_eigenpairs, usage, EigConfig, EigMethod};
use super::report::{definitions, BenchCell, Report, Stat};
use super::{matvec_seconds, FastArgs, KernelArgs};
use crate::error::Result;
use crate::spectral::LanczosOptions;

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Comma-separated node counts (multiples of the class count).
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "nfft-lanczos")]
    pub methods: Vec<EigMethod>,
    /// Repetitions per cell; run r uses seed + r.
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fast: FastArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long = "L")]
    pub samples: Option<usize>,
    #[arg(long = "M")]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    /// Compute eigenvalue errors and residuals against the dense operator.
    #[arg(long = "with-reference")]
    pub with_reference: bool,
    /// Largest n for which the dense reference is computed.
    #[arg(long = "reference-budget", default_value_t = 20_000)]
    pub reference_budget: usize,
    /// Only time fast matvecs, skip eigensolvers.
    #[arg(long = "matvec-only")]
    pub matvec_only: bool,
    #[arg(long = "matvec-reps", default_value_t = 5)]
    pub matvec_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_bench(a: &BenchArgs, report: &mut Report) -> Result<()> {
    if a.sizes.is_empty() || a.runs == 0 || a.classes == 0 {
        return Err(usage("bench needs sizes, runs >= 1 and classes >= 1"));
    }
    let kernel = a.kernel.spec(3.5)?;
    let params = a.fast.params(2)?;
    report.n = a.sizes.iter().copied().max().unwrap_or(0);
    for &n in &a.sizes {
        let per_class = n / a.classes;
        let mut clouds = Vec::with_capacity(a.runs);
        for r in 0..a.runs {
            clouds.push(gen_spiral(a.classes, per_class, 10.0, 2.0, a.seed + r as u64)?);
        }
        let n_actual = per_class * a.classes;

        let times: Vec<f64> = clouds
            .iter()
            .map(|c| matvec_seconds(&c.coords, 3, kernel, params, a.matvec_reps))
            .collect::<Result<_>>()?;
        report.cells.push(BenchCell {
            method: "fastsum-matvec".into(),
            n: n_actual,
            stats: vec![Stat::from_samples("matvec_seconds", definitions::MATVEC_SECONDS, &times)],
        });
        if a.matvec_only {
            continue;
        }

        for &method in &a.methods {
            let (mut errs, mut resids, mut solve) = (Vec::new(), Vec::new(), Vec::new());
            for (r, cloud) in clouds.iter().enumerate() {
                let seed = a.seed + r as u64;
                let mut cfg = EigConfig::new(method, kernel, params, a.k, seed);
                cfg.samples = a.samples;
                cfg.rank = a.rank;
                cfg.lanczos = LanczosOptions {
                    seed,
                    ..Default::default()
                };
                let out = compute_eigenpairs(&cloud.coords, 3, &cfg)?;
                solve.push(out.setup_seconds + out.solve_seconds);
                if a.with_reference && n_actual <= a.reference_budget {
                    let cmp = compare_with_reference(&cloud.coords, 3, &kernel, &out.pairs)?;
                    errs.push(cmp.max_eigenvalue_error);
                    resids.push(cmp.max_residual);
                }
            }
            let mut stats = vec![Stat::from_samples("eig_seconds", "setup plus eigensolver wall time in seconds", &solve)];
            if !errs.is_empty() {
                stats.push(Stat::from_samples("max_eigenvalue_error", definitions::MAX_EIGENVALUE_ERROR, &errs));
                stats.push(Stat::from_samples("max_residual_norm", definitions::MAX_RESIDUAL_NORM, &resids));
            }
            report.cells.push(BenchCell {
                method: method.name().into(),
                n: n_actual,
                stats,
            });
        }
    }
    Ok(())
}
