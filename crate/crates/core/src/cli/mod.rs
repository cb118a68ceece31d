//! Command-line drivers, data generation and IO, and the benchmark harness.

pub mod bench;
pub mod data;
pub mod imageio;
pub mod pipeline;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{FgsError, Result};
use crate::fastsum::{FastsumParams, FastsumPlan};
use crate::graphop::AdjacencyOperator;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::learn::{
    allen_cahn_ssl, classification_rate, kernel_ssl_solve, kernel_ssl_truncated, krr_fit, krr_predict,
    misclassification_rate, misclassification_rate_permuted, spectral_cluster, AllenCahnParams, KmeansOptions,
    TrainingSelection,
};
use crate::spectral::{EigenPairs, LanczosOptions};

use data::{load_points_csv, save_columns_csv, save_labels_csv, save_points_csv, PointCloud};
use pipeline::{eigs_into_report, usage, EigConfig, EigMethod};
use report::{definitions, timed, Report};

#[derive(Debug, Parser)]
#[command(name = "fgs", version, about = "Matrix-free kernel graph Laplacians via NFFT fast summation")]
pub struct Cli {
    /// Worker threads; 1 forces deterministic sequential execution.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic point cloud as CSV.
    Gen(GenArgs),
    /// Largest eigenpairs of the normalized adjacency matrix.
    Eigs(EigsArgs),
    /// Spectral clustering of a point cloud.
    Cluster(ClusterArgs),
    /// Spectral segmentation of an RGB image.
    Segment(SegmentArgs),
    /// Phase-field (Allen-Cahn) semi-supervised classification.
    SslPf(SslPfArgs),
    /// Two-class kernel semi-supervised classification.
    SslKernel(SslKernelArgs),
    /// Kernel ridge regression on labeled 2-class data.
    Krr(KrrArgs),
    /// Accuracy and runtime sweep over methods, sizes and seeds.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    /// gaussian | laplacian-rbf | multiquadric | inv-multiquadric
    #[arg(long, default_value = "gaussian")]
    pub kernel: KernelFamily,
    /// Scale for gaussian and laplacian-rbf.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Shape for the multiquadric kernels.
    #[arg(long = "c")]
    pub c: Option<f64>,
}

impl KernelArgs {
    pub fn spec(&self, default_param: f64) -> Result<KernelSpec> {
        let param = match self.kernel {
            KernelFamily::Gaussian | KernelFamily::LaplacianRbf => {
                if self.c.is_some() {
                    return Err(usage("--c applies to the multiquadric kernels; use --sigma"));
                }
                self.sigma.unwrap_or(default_param)
            }
            KernelFamily::Multiquadric | KernelFamily::InverseMultiquadric => {
                if self.sigma.is_some() {
                    return Err(usage("--sigma applies to gaussian and laplacian-rbf; use --c"));
                }
                self.c.unwrap_or(default_param)
            }
        };
        KernelSpec::new(self.kernel, param)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FastArgs {
    /// Predefined accuracy setup: 1 (N=16,m=2), 2 (N=32,m=4), 3 (N=64,m=7), all with eps_B=0.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "bandwidth")]
    pub setup: Option<u8>,
    /// Trigonometric bandwidth N.
    #[arg(long = "N", id = "bandwidth")]
    pub bandwidth: Option<usize>,
    /// NFFT window cut-off m.
    #[arg(long)]
    pub m: Option<usize>,
    /// Regularization smoothness p.
    #[arg(long)]
    pub p: Option<usize>,
    /// Boundary-region width eps_B.
    #[arg(long = "eps-b")]
    pub eps_b: Option<f64>,
}

impl FastArgs {
    pub fn given(&self) -> bool {
        self.setup.is_some() || self.bandwidth.is_some()
    }

    pub fn params(&self, default_setup: u8) -> Result<FastsumParams> {
        self.params_or(FastsumParams::setup(default_setup)?)
    }

    /// Like [`params`](Self::params) with explicit defaults when neither
    /// `--setup` nor `--N` is given.
    pub fn params_or(&self, default: FastsumParams) -> Result<FastsumParams> {
        let mut params = match (self.bandwidth, self.setup) {
            (Some(n), _) => FastsumParams::new(n, self.m.unwrap_or(4))?,
            (None, setup) => {
                let mut p = match setup {
                    Some(id) => FastsumParams::setup(id)?,
                    None => default,
                };
                if let Some(m) = self.m {
                    p.cutoff = m;
                }
                p
            }
        };
        if let Some(p) = self.p {
            params = params.with_smoothness(p)?;
        }
        if let Some(e) = self.eps_b {
            params = params.with_eps_b(e)?;
        }
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigArgs {
    #[arg(long, value_enum, default_value = "nfft-lanczos")]
    pub method: EigMethod,
    /// Number of eigenpairs.
    #[arg(long)]
    pub k: Option<usize>,
    /// Nyström sample size L.
    #[arg(long = "L")]
    pub samples: Option<usize>,
    /// Inversion rank M of nystrom-gauss-nfft.
    #[arg(long = "M")]
    pub rank: Option<usize>,
    /// Relative Ritz residual tolerance of Lanczos.
    #[arg(long = "lanczos-tol", default_value_t = 1e-12)]
    pub lanczos_tol: f64,
    #[arg(long = "lanczos-max-iter", default_value_t = 500)]
    pub lanczos_max_iter: usize,
}

impl EigArgs {
    fn config(&self, kernel: KernelSpec, fastsum: FastsumParams, default_k: usize, seed: u64) -> EigConfig {
        let mut cfg = EigConfig::new(self.method, kernel, fastsum, self.k.unwrap_or(default_k), seed);
        cfg.samples = self.samples;
        cfg.rank = self.rank;
        cfg.lanczos = LanczosOptions {
            tol: self.lanczos_tol,
            max_iter: self.lanczos_max_iter,
            seed,
            ..Default::default()
        };
        cfg
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("dataset").required(true).args(["spiral", "crescent", "moons"])))]
pub struct GenArgs {
    /// 3-D interleaved spirals.
    #[arg(long)]
    pub spiral: bool,
    /// 2-D crescent around a full moon.
    #[arg(long)]
    pub crescent: bool,
    /// 2-D two moons.
    #[arg(long)]
    pub moons: bool,
    #[arg(long, default_value_t = 5)]
    pub classes: usize,
    #[arg(long = "per-class", default_value_t = 400)]
    pub per_class: usize,
    #[arg(long, default_value_t = 10.0)]
    pub h: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Relabel spiral points by the nearest of one center per arm.
    #[arg(long = "relabel-centers")]
    pub relabel_centers: bool,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 5.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 5.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 8.0)]
    pub r3: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigsArgs {
    /// Input point CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fast: FastArgs,
    #[command(flatten)]
    pub eig: EigArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compare against the exact dense operator.
    #[arg(long = "with-reference")]
    pub with_reference: bool,
    /// Write eigenvectors as CSV columns v0..v{k-1}.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub eigs: EigsArgs,
    /// Number of clusters; defaults to k.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long = "kmeans-restarts", default_value_t = 10)]
    pub restarts: usize,
    /// Write the cluster labels as CSV.
    #[arg(long = "labels-out")]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SegmentArgs {
    /// Input PNG or binary PPM image.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fast: FastArgs,
    #[command(flatten)]
    pub eig: EigArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also segment with dense-reference eigenvectors and compare.
    #[arg(long = "with-reference")]
    pub with_reference: bool,
    /// Segmentation image (PNG or PPM).
    #[arg(long = "labels-out")]
    pub labels_out: Option<PathBuf>,
    /// Difference image against the reference segmentation.
    #[arg(long = "diff-out")]
    pub diff_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SslPfArgs {
    /// Labeled point CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fast: FastArgs,
    #[command(flatten)]
    pub eig: EigArgs,
    #[arg(long = "samples-per-class", default_value_t = 10)]
    pub samples_per_class: usize,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long = "eps-ac", default_value_t = 10.0)]
    pub eps_ac: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub omega0: f64,
    /// Convexity-splitting constant; defaults to 2/eps_ac + omega0.
    #[arg(long = "conv-c")]
    pub conv_c: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long = "max-steps", default_value_t = 500)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "labels-out")]
    pub labels_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SslKernelArgs {
    /// Labeled 2-class point CSV.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub fast: FastArgs,
    #[command(flatten)]
    pub eig: EigArgs,
    #[arg(long, default_value_t = 1e4)]
    pub beta: f64,
    #[arg(long = "samples-per-class", default_value_t = 25)]
    pub samples_per_class: usize,
    /// CG relative residual tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,
    /// Solve with a rank-k eigenapproximation instead of CG.
    #[arg(long)]
    pub truncated: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "labels-out")]
    pub labels_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KrrArgs {
    /// Labeled 2-class training CSV; labels map to -1 and +1.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Fast summation is used only when --setup or --N is given.
    #[command(flatten)]
    pub fast: FastArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 5000)]
    pub max_iter: usize,
    /// Query CSV to predict.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Predictions for --query as CSV.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Grid resolution per axis for contour output (2-D data only).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Contour grid CSV with columns x, y, prediction.
    #[arg(long = "grid-out")]
    pub grid_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for an error: 2 for usage and input problems, 1 for
/// numerical failures.
pub fn exit_code(e: &FgsError) -> u8 {
    match e {
        FgsError::Parameter(_) | FgsError::Parse { .. } | FgsError::Format(_) | FgsError::Shape { .. } => 2,
        _ => 1,
    }
}

fn labels_of(cloud: &PointCloud) -> Result<&[usize]> {
    cloud
        .labels
        .as_deref()
        .ok_or_else(|| usage(format!("{} has no label column", cloud.provenance)))
}

fn cmd_gen(a: &GenArgs, report: &mut Report) -> Result<()> {
    let cloud = if a.spiral {
        let mut c = data::gen_spiral(a.classes, a.per_class, a.h, a.r, a.seed)?;
        if a.relabel_centers {
            c.relabel_nearest(&data::spiral_centers(a.classes, a.h, a.r));
        }
        c
    } else if a.crescent {
        data::gen_crescent_fullmoon(a.n, a.r1, a.r2, a.r3, a.seed)?
    } else {
        data::gen_two_moons(a.n, a.noise, a.seed)?
    };
    report.method = Some(cloud.provenance.clone());
    report.n = cloud.len();
    save_points_csv(&cloud, &a.out)
}

fn run_eigs(a: &EigsArgs, default_sigma: f64, report: &mut Report) -> Result<(PointCloud, EigenPairs)> {
    let cloud = load_points_csv(&a.input)?;
    let kernel = a.kernel.spec(default_sigma)?;
    let cfg = a.eig.config(kernel, a.fast.params(2)?, 10, a.seed);
    let out = eigs_into_report(&cloud.coords, cloud.dim, &cfg, a.with_reference, report)?;
    if let Some(path) = &a.vectors {
        let names: Vec<String> = (0..out.pairs.len()).map(|j| format!("v{j}")).collect();
        let cols: Vec<&[f64]> = (0..out.pairs.len()).map(|j| out.pairs.vector(j)).collect();
        save_columns_csv(&names.iter().map(String::as_str).collect::<Vec<_>>(), &cols, path)?;
    }
    Ok((cloud, out.pairs))
}

fn cmd_eigs(a: &EigsArgs, report: &mut Report) -> Result<()> {
    run_eigs(a, 3.5, report).map(|_| ())
}

fn cmd_cluster(a: &ClusterArgs, report: &mut Report) -> Result<()> {
    let (cloud, pairs) = run_eigs(&a.eigs, 3.5, report)?;
    let clusters = a.clusters.unwrap_or(pairs.len());
    let opts = KmeansOptions {
        restarts: a.restarts,
        seed: a.eigs.seed,
        ..Default::default()
    };
    let (labels, secs) = timed(|| spectral_cluster(&pairs, clusters, &opts));
    let labels = labels?;
    report.time("kmeans", secs);
    if let Some(truth) = &cloud.labels {
        report.metric(
            "misclassification_rate",
            misclassification_rate_permuted(&labels, truth)?,
            definitions::PERMUTED_MISCLASSIFICATION_RATE,
        );
    }
    if let Some(p) = &a.labels_out {
        save_labels_csv(&labels, p)?;
    }
    Ok(())
}

/// Spectral segmentation labels from eigenpairs with `k` clusters.
pub fn segment_labels(pairs: &EigenPairs, clusters: usize, seed: u64) -> Result<Vec<usize>> {
    spectral_cluster(
        pairs,
        clusters,
        &KmeansOptions {
            seed,
            ..Default::default()
        },
    )
}

fn cmd_segment(a: &SegmentArgs, report: &mut Report) -> Result<()> {
    let (cloud, w, h) = imageio::image_to_nodes(&a.input)?;
    let kernel = a.kernel.spec(90.0)?;
    let cfg = a.eig.config(kernel, a.fast.params(3)?, 4, a.seed);
    let out = eigs_into_report(&cloud.coords, 3, &cfg, false, report)?;
    let k = out.pairs.len();
    let labels = segment_labels(&out.pairs, k, a.seed)?;
    if let Some(p) = &a.labels_out {
        imageio::labels_to_image(&labels, w, h, &imageio::PALETTE, p)?;
    }
    if a.with_reference {
        let ref_cfg = EigConfig {
            method: EigMethod::Direct,
            ..cfg
        };
        let (reference, secs) = timed(|| pipeline::compute_eigenpairs(&cloud.coords, 3, &ref_cfg));
        let reference = reference?;
        report.time("reference", secs);
        let ref_labels = segment_labels(&reference.pairs, k, a.seed)?;
        let aligned = imageio::align_labels(&ref_labels, &labels)?;
        report.metric(
            "label_difference_rate",
            misclassification_rate(&aligned, &ref_labels)?,
            definitions::LABEL_DIFFERENCE_RATE,
        );
        if let Some(p) = &a.diff_out {
            imageio::difference_image(&aligned, &ref_labels, w, h, p)?;
        }
    }
    Ok(())
}

fn cmd_ssl_pf(a: &SslPfArgs, report: &mut Report) -> Result<()> {
    let cloud = load_points_csv(&a.input)?;
    let truth = labels_of(&cloud)?;
    let classes = cloud.n_classes();
    let kernel = a.kernel.spec(3.5)?;
    let cfg = a.eig.config(kernel, a.fast.params(2)?, 5, a.seed);
    let out = eigs_into_report(&cloud.coords, cloud.dim, &cfg, false, report)?;
    let params = AllenCahnParams {
        tau: a.tau,
        eps_ac: a.eps_ac,
        omega0: a.omega0,
        c: a.conv_c.unwrap_or(2.0 / a.eps_ac + a.omega0),
        tol: a.tol,
        max_steps: a.max_steps,
    };
    let selection = TrainingSelection::sample(truth, classes, a.samples_per_class, a.seed)?;
    let (res, secs) = timed(|| allen_cahn_ssl(&out.pairs.to_laplacian(), &selection, &params, classes));
    let res = res?;
    report.time("allen-cahn", secs);
    report.metric("classification_rate", classification_rate(&res.labels, truth)?, definitions::CLASSIFICATION_RATE);
    report.metric(
        "time_steps",
        res.steps.iter().copied().max().unwrap_or(0) as f64,
        definitions::TIME_STEPS,
    );
    if let Some(p) = &a.labels_out {
        save_labels_csv(&res.labels, p)?;
    }
    if !res.converged {
        return Err(FgsError::Divergence {
            steps: params.max_steps,
        });
    }
    Ok(())
}

fn cmd_ssl_kernel(a: &SslKernelArgs, report: &mut Report) -> Result<()> {
    let cloud = load_points_csv(&a.input)?;
    let truth = labels_of(&cloud)?;
    if cloud.n_classes() != 2 {
        return Err(usage("kernel SSL needs exactly 2 classes"));
    }
    report.n = cloud.len();
    let kernel = a.kernel.spec(0.1)?;
    let selection = TrainingSelection::sample(truth, 2, a.samples_per_class, a.seed)?;
    let f = selection.fidelity(1);
    // Narrow kernels on large domains need the fine grid.
    let params = a.fast.params_or(FastsumParams::new(512, 3)?)?;
    let u = if a.truncated {
        let cfg = a.eig.config(kernel, params, 10, a.seed);
        let out = eigs_into_report(&cloud.coords, cloud.dim, &cfg, false, report)?;
        let (u, secs) = timed(|| kernel_ssl_truncated(&out.pairs, &f, a.beta));
        report.time("solve", secs);
        u?
    } else {
        report.method = Some(if a.eig.method == EigMethod::Direct { "direct-cg" } else { "nfft-cg" }.into());
        let (op, secs) = timed(|| {
            if a.eig.method == EigMethod::Direct {
                AdjacencyOperator::exact(&cloud.coords, cloud.dim, kernel)
            } else {
                AdjacencyOperator::build(&cloud.coords, cloud.dim, kernel, params)
            }
        });
        let op = op?;
        report.time("setup", secs);
        let (res, secs) = timed(|| kernel_ssl_solve(&op, &f, a.beta, a.tol, a.max_iter));
        let res = res?;
        report.time("solve", secs);
        report.metric("cg_iterations", res.iterations as f64, definitions::ITERATIONS);
        report.metric("cg_relative_residual", res.relative_residual, definitions::RELATIVE_RESIDUAL);
        if !res.converged {
            report.fail(format!("CG did not converge within {} iterations", a.max_iter));
        }
        res.u
    };
    let labels: Vec<usize> = u.iter().map(|&v| usize::from(v > 0.0)).collect();
    report.metric("misclassification_rate", misclassification_rate(&labels, truth)?, definitions::MISCLASSIFICATION_RATE);
    if let Some(p) = &a.labels_out {
        save_labels_csv(&labels, p)?;
    }
    Ok(())
}

fn cmd_krr(a: &KrrArgs, report: &mut Report) -> Result<()> {
    let cloud = load_points_csv(&a.input)?;
    let truth = labels_of(&cloud)?;
    if cloud.n_classes() > 2 {
        return Err(usage("KRR classification needs at most 2 classes"));
    }
    report.n = cloud.len();
    let kernel = a.kernel.spec(1.0)?;
    let params = if a.fast.given() { Some(a.fast.params(2)?) } else { None };
    report.method = Some(if params.is_some() { "fastsum-cg" } else { "direct-cg" }.into());
    let f: Vec<f64> = truth.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let (model, secs) = timed(|| krr_fit(&cloud.coords, cloud.dim, kernel, a.beta, &f, params, a.tol, a.max_iter));
    let model = model?;
    report.time("fit", secs);
    report.metric("cg_iterations", model.iterations as f64, definitions::ITERATIONS);
    let fitted = krr_predict(&model, &cloud.coords)?;
    let hits = fitted.iter().zip(&f).filter(|(p, t)| p.signum() == t.signum()).count();
    report.metric("training_accuracy", hits as f64 / f.len() as f64, definitions::TRAINING_ACCURACY);
    if let Some(q) = &a.query {
        let queries = load_points_csv(q)?;
        let pred = krr_predict(&model, &queries.coords)?;
        if let Some(p) = &a.predictions {
            save_columns_csv(&["prediction"], &[&pred], p)?;
        }
    }
    if let Some(res) = a.grid {
        if cloud.dim != 2 {
            return Err(usage("--grid needs 2-D data"));
        }
        let (grid, xs, ys) = contour_grid(&cloud, res)?;
        let (pred, secs) = timed(|| krr_predict(&model, &grid));
        report.time("grid", secs);
        if let Some(p) = &a.grid_out {
            save_columns_csv(&["x", "y", "prediction"], &[&xs, &ys, &pred?], p)?;
        }
    }
    Ok(())
}

/// Regular `res x res` grid over the bounding box padded by 10 %.
pub fn contour_grid(cloud: &PointCloud, res: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if res < 2 || cloud.dim != 2 {
        return Err(usage("contour grid needs 2-D data and resolution >= 2"));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in cloud.coords.chunks_exact(2) {
        for t in 0..2 {
            lo[t] = lo[t].min(p[t]);
            hi[t] = hi[t].max(p[t]);
        }
    }
    for t in 0..2 {
        let pad = 0.1 * (hi[t] - lo[t]).max(1e-12);
        lo[t] -= pad;
        hi[t] += pad;
    }
    let mut grid = Vec::with_capacity(2 * res * res);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..res {
        for j in 0..res {
            let x = lo[0] + (hi[0] - lo[0]) * j as f64 / (res - 1) as f64;
            let y = lo[1] + (hi[1] - lo[1]) * i as f64 / (res - 1) as f64;
            grid.extend([x, y]);
            xs.push(x);
            ys.push(y);
        }
    }
    Ok((grid, xs, ys))
}

/// Fast-summation matvec wall time (mean over `reps`) on `nodes`.
pub fn matvec_seconds(nodes: &[f64], dim: usize, kernel: KernelSpec, params: FastsumParams, reps: usize) -> Result<f64> {
    let plan = FastsumPlan::new(nodes, dim, kernel, params)?;
    let x: Vec<f64> = (0..plan.len()).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
    plan.apply(&x)?;
    let reps = reps.max(1);
    let (res, secs) = timed(|| -> Result<()> {
        for _ in 0..reps {
            std::hint::black_box(plan.apply(&x)?);
        }
        Ok(())
    });
    res?;
    Ok(secs / reps as f64)
}

/// Runs a parsed command, writes its report and returns the exit status.
pub fn run(cli: Cli) -> u8 {
    let (name, seed, out): (&str, u64, Option<&Path>) = match &cli.command {
        Command::Gen(a) => ("gen", a.seed, a.report.as_deref()),
        Command::Eigs(a) => ("eigs", a.seed, a.out.as_deref()),
        Command::Cluster(a) => ("cluster", a.eigs.seed, a.eigs.out.as_deref()),
        Command::Segment(a) => ("segment", a.seed, a.out.as_deref()),
        Command::SslPf(a) => ("ssl-pf", a.seed, a.out.as_deref()),
        Command::SslKernel(a) => ("ssl-kernel", a.seed, a.out.as_deref()),
        Command::Krr(a) => ("krr", a.seed, a.out.as_deref()),
        Command::Bench(a) => ("bench", a.seed, a.out.as_deref()),
    };
    let mut report = match &cli.command {
        Command::Gen(a) => Report::new(name, a, seed),
        Command::Eigs(a) => Report::new(name, a, seed),
        Command::Cluster(a) => Report::new(name, a, seed),
        Command::Segment(a) => Report::new(name, a, seed),
        Command::SslPf(a) => Report::new(name, a, seed),
        Command::SslKernel(a) => Report::new(name, a, seed),
        Command::Krr(a) => Report::new(name, a, seed),
        Command::Bench(a) => Report::new(name, a, seed),
    };
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(a, &mut report),
        Command::Eigs(a) => cmd_eigs(a, &mut report),
        Command::Cluster(a) => cmd_cluster(a, &mut report),
        Command::Segment(a) => cmd_segment(a, &mut report),
        Command::SslPf(a) => cmd_ssl_pf(a, &mut report),
        Command::SslKernel(a) => cmd_ssl_kernel(a, &mut report),
        Command::Krr(a) => cmd_krr(a, &mut report),
        Command::Bench(a) => bench::cmd_bench(a, &mut report),
    };
    let mut code = match &result {
        Ok(()) if report.status == report::Status::Ok => 0,
        Ok(()) => 1,
        Err(e) => {
            report.fail(e.to_string());
            exit_code(e)
        }
    };
    if let Some(path) = out {
        if let Err(e) = report.write(path) {
            eprintln!("fgs: cannot write report {}: {e}", path.display());
            code = code.max(1);
        }
    }
    print!("{}", report.summary());
    if let Err(e) = result {
        eprintln!("fgs: {e}");
    }
    code
}
