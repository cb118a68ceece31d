//! End-to-end acceptance checks. Runs every criterion, prints one PASS/FAIL
//! line each and exits non-zero if any fails.
//!
//! `cargo test --test acceptance -- <ids>` runs a subset, e.g. `-- 2 7`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use fgs_core::cli::data::{gen_crescent_fullmoon, gen_spiral, gen_two_moons, spiral_centers, PointCloud};
use fgs_core::cli::imageio::{align_labels, image_to_nodes};
use fgs_core::cli::pipeline::{compute_eigenpairs, EigConfig, EigMethod};
use fgs_core::cli::segment_labels;
use fgs_core::fastsum::{FastsumParams, FastsumPlan};
use fgs_core::graphop::{propagation_bound, AdjacencyOperator};
use fgs_core::kernels::KernelSpec;
use fgs_core::learn::{
    allen_cahn_ssl, classification_rate, kernel_ssl_solve, kernel_ssl_truncated, krr_fit, krr_predict,
    misclassification_rate, AllenCahnParams, TrainingSelection,
};
use fgs_core::nfft::NfftPlan;
use fgs_core::spectral::{
    lanczos_largest, nystrom_gaussian_nfft, nystrom_traditional, EigenPairs, HybridNystromOptions, LanczosOptions,
    NystromOptions,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn spiral(n: usize, seed: u64) -> PointCloud {
    gen_spiral(5, n / 5, 10.0, 2.0, seed).unwrap()
}

// ---------------------------------------------------------------- oracles

/// Dense `A = D^{-1/2} W D^{-1/2}` with zero-diagonal `W`, built entry by entry.
fn dense_adjacency(nodes: &[f64], dim: usize, kernel: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = nodes.len() / dim;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let r2: f64 = (0..dim).map(|t| (nodes[i * dim + t] - nodes[j * dim + t]).powi(2)).sum();
            let k = kernel(r2.sqrt());
            w[(i, j)] = k;
            w[(j, i)] = k;
        }
    }
    let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    w
}

fn gaussian(sigma: f64) -> impl Fn(f64) -> f64 {
    move |r| (-(r * r) / (sigma * sigma)).exp()
}

/// Descending eigenvalues of a dense symmetric matrix.
fn dense_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_value_error(approx: &[f64], exact: &[f64]) -> f64 {
    approx.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn max_residual(a: &DMatrix<f64>, pairs: &EigenPairs) -> f64 {
    (0..pairs.len())
        .map(|j| {
            let v = nalgebra::DVector::from_column_slice(pairs.vector(j));
            (a * &v - &v * pairs.values()[j]).norm()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------- criteria

fn nfft_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_fwd, mut worst_adj, mut worst_pair) = (0.0f64, 0.0f64, 0.0f64);
    let mut instances = 0;
    for dim in 1..=3usize {
        for bandwidth in [2usize, 4, 8, 16] {
            for n in [1usize, 17, 256] {
                let nodes: Vec<f64> = (0..n * dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let size = bandwidth.pow(dim as u32);
                let fhat: Vec<Complex64> = (0..size)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let x: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let plan = NfftPlan::new(dim, bandwidth, 8, &nodes).map_err(|e| e.to_string())?;
                let f = plan.forward(&fhat).map_err(|e| e.to_string())?;
                let g = plan.adjoint(&x).map_err(|e| e.to_string())?;

                // Direct exponential sums over the row-major frequency lattice.
                let half = (bandwidth / 2) as i64;
                let freq = |flat: usize| -> Vec<f64> {
                    let mut l = vec![0.0; dim];
                    let mut rem = flat;
                    for t in (0..dim).rev() {
                        l[t] = ((rem % bandwidth) as i64 - half) as f64;
                        rem /= bandwidth;
                    }
                    l
                };
                let phase = |j: usize, l: &[f64]| -> f64 {
                    2.0 * std::f64::consts::PI * (0..dim).map(|t| l[t] * nodes[j * dim + t]).sum::<f64>()
                };
                let l1_fhat: f64 = fhat.iter().map(|z| z.norm()).sum();
                let l1_x: f64 = x.iter().map(|z| z.norm()).sum();
                for (j, fj) in f.iter().enumerate() {
                    let mut s = Complex64::new(0.0, 0.0);
                    for (k, c) in fhat.iter().enumerate() {
                        s += c * Complex64::from_polar(1.0, phase(j, &freq(k)));
                    }
                    worst_fwd = worst_fwd.max((fj - s).norm() / l1_fhat);
                }
                for (k, gk) in g.iter().enumerate() {
                    let l = freq(k);
                    let mut s = Complex64::new(0.0, 0.0);
                    for (j, xj) in x.iter().enumerate() {
                        s += xj * Complex64::from_polar(1.0, -phase(j, &l));
                    }
                    worst_adj = worst_adj.max((gk - s).norm() / l1_x);
                }
                // <F fhat, x> = <fhat, F^H x>
                let lhs: Complex64 = f.iter().zip(&x).map(|(a, b)| a * b.conj()).sum();
                let rhs: Complex64 = fhat.iter().zip(&g).map(|(a, b)| a * b.conj()).sum();
                worst_pair = worst_pair.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE));
                instances += 1;
            }
        }
    }
    ensure(
        worst_fwd <= 1e-12 && worst_adj <= 1e-12 && worst_pair <= 1e-10,
        format!("{instances} instances, forward {worst_fwd:.2e}, adjoint {worst_adj:.2e}, pairing {worst_pair:.2e}"),
    )
}

fn fastsum_ladder() -> Outcome {
    let cloud = spiral(2000, 11);
    let n = cloud.len();
    let k = gaussian(3.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let x1: f64 = x.iter().map(|v| v.abs()).sum();
    let direct: Vec<f64> = (0..n)
        .map(|j| {
            let p = cloud.point(j);
            (0..n)
                .map(|i| {
                    let q = cloud.point(i);
                    let r2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    x[i] * k(r2.sqrt())
                })
                .sum()
        })
        .collect();
    let mut errs = Vec::new();
    for setup in 1..=3u8 {
        let plan = FastsumPlan::new(
            &cloud.coords,
            3,
            KernelSpec::gaussian(3.5).unwrap(),
            FastsumParams::setup(setup).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let y = plan.apply(&x).map_err(|e| e.to_string())?;
        errs.push(y.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / x1);
    }
    ensure(
        errs[0] > errs[1] && errs[1] > errs[2] && errs[2] <= 1e-10,
        format!("errors setup 1/2/3: {:.2e} {:.2e} {:.2e}", errs[0], errs[1], errs[2]),
    )
}

/// Shared n = 2000 spiral with its dense operator and spectrum.
struct SpiralReference {
    cloud: PointCloud,
    dense: DMatrix<f64>,
    values: Vec<f64>,
}

fn spiral_reference() -> SpiralReference {
    let cloud = spiral(2000, 11);
    let dense = dense_adjacency(&cloud.coords, 3, gaussian(3.5));
    let values = dense_values(&dense);
    SpiralReference { cloud, dense, values }
}

fn lanczos_pairs(cloud: &PointCloud, setup: u8, k: usize) -> Result<EigenPairs, String> {
    let cfg = EigConfig::new(
        EigMethod::NfftLanczos,
        KernelSpec::gaussian(3.5).unwrap(),
        FastsumParams::setup(setup).unwrap(),
        k,
        0,
    );
    compute_eigenpairs(&cloud.coords, 3, &cfg).map(|o| o.pairs).map_err(|e| e.to_string())
}

fn residual_plateaus(r: &SpiralReference) -> Outcome {
    let mut res = Vec::new();
    for setup in 1..=3u8 {
        res.push(max_residual(&r.dense, &lanczos_pairs(&r.cloud, setup, 10)?));
    }
    ensure(
        (1e-5..=1e-2).contains(&res[0]) && (1e-9..=1e-7).contains(&res[1]) && res[2] <= 1e-11,
        format!("max residual setup 1/2/3: {:.2e} {:.2e} {:.2e}", res[0], res[1], res[2]),
    )
}

fn hybrid_errors(r: &SpiralReference, samples: usize) -> Result<Vec<f64>, String> {
    let op = AdjacencyOperator::build(
        &r.cloud.coords,
        3,
        KernelSpec::gaussian(3.5).unwrap(),
        FastsumParams::setup(2).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    (0..10u64)
        .map(|seed| {
            let opts = HybridNystromOptions {
                samples,
                rank: 10,
                k: 10,
                seed,
            };
            let pairs = nystrom_gaussian_nfft(&op, &opts).map_err(|e| e.to_string())?;
            Ok(max_value_error(pairs.values(), &r.values))
        })
        .collect()
}

fn hybrid_bands(r: &SpiralReference) -> Outcome {
    let m20 = median(hybrid_errors(r, 20)?);
    let m50 = median(hybrid_errors(r, 50)?);
    ensure(
        (1e-3..=1e-1).contains(&m20) && (1e-6..=1e-3).contains(&m50) && m50 < m20,
        format!("median max eigenvalue error L=20 {m20:.2e}, L=50 {m50:.2e}"),
    )
}

fn nystrom_inferiority(r: &SpiralReference) -> Outcome {
    let kernel = KernelSpec::gaussian(3.5).unwrap();
    let mut trad = Vec::new();
    for seed in 0..10u64 {
        let opts = NystromOptions {
            samples: 500,
            k: 10,
            seed,
        };
        let pairs = nystrom_traditional(&r.cloud.coords, 3, &kernel, &opts).map_err(|e| e.to_string())?;
        trad.push(max_value_error(pairs.values(), &r.values));
    }
    let hybrid = mean(&hybrid_errors(r, 50)?);
    let t = mean(&trad);
    ensure(
        t >= hybrid,
        format!("average max eigenvalue error traditional L=500 {t:.2e}, hybrid L=50 {hybrid:.2e}"),
    )
}

fn propagation_bound_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_margin = f64::INFINITY;
    for inst in 0..100 {
        let n = rng.random_range(2..=200usize);
        let mut w = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>());
        if inst % 2 == 0 {
            // Sparse-ish rows stress small degrees.
            w.apply(|v| *v = if *v < 0.7 { 0.0 } else { *v });
            for i in 0..n {
                w[(i, (i + 1) % n)] += 0.01;
            }
        }
        let norm_inf = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).abs().sum()).fold(0.0, f64::max);
        let w_inf = norm_inf(&w);
        let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
        let eta = d.iter().copied().fold(f64::INFINITY, f64::min) / w_inf;
        let target = rng.random_range(0.01..0.95) * eta;
        let mut e = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let scale = target * w_inf / norm_inf(&e);
        e *= scale;
        let eps = norm_inf(&e) / w_inf;
        let we = &w + &e;
        let de: Vec<f64> = (0..n).map(|i| we.row(i).sum()).collect();
        let a = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (d[i] * d[j]).sqrt());
        let ae = DMatrix::from_fn(n, n, |i, j| we[(i, j)] / (de[i] * de[j]).sqrt());
        let err = norm_inf(&(a - ae));
        let bound = eps * (1.0 + eta) / (eta * (eta - eps));
        let lib = propagation_bound(eta, eps).ok_or("library bound undefined for eps < eta")?;
        if (lib - bound).abs() > 1e-12 * bound {
            return Err(format!("library bound {lib} differs from {bound}"));
        }
        if err > bound {
            return Err(format!("instance {inst}: error {err:e} exceeds bound {bound:e}"));
        }
        min_margin = min_margin.min((bound - err) / bound);
    }
    Ok(format!("100 instances, smallest relative margin {min_margin:.3e}"))
}

fn perron_identity() -> Outcome {
    let cloud = spiral(2000, 11);
    let op = AdjacencyOperator::build(
        &cloud.coords,
        3,
        KernelSpec::gaussian(3.5).unwrap(),
        FastsumParams::setup(3).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let pairs = lanczos_largest(&op, 1, &LanczosOptions::default()).map_err(|e| e.to_string())?.pairs;
    let lambda = pairs.values()[0];
    let v = op.perron_vector();
    let av = op.apply_normalized(&v).map_err(|e| e.to_string())?;
    let res = av.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    ensure(
        (lambda - 1.0).abs() <= 1e-8 && res <= 1e-8,
        format!("lambda_1 - 1 = {:.2e}, ||A v - v|| = {res:.2e} for v ~ D^(1/2) 1", lambda - 1.0),
    )
}

fn matvec_scaling() -> Outcome {
    let kernel = KernelSpec::gaussian(3.5).unwrap();
    let params = FastsumParams::setup(2).unwrap();
    let time = |n: usize| -> Result<f64, String> {
        let cloud = spiral(n, 8);
        let plan = FastsumPlan::new(&cloud.coords, 3, kernel, params).map_err(|e| e.to_string())?;
        let x = vec![1.0; n];
        plan.apply(&x).map_err(|e| e.to_string())?;
        let mut t = Vec::new();
        for _ in 0..7 {
            let start = Instant::now();
            std::hint::black_box(plan.apply(&x).map_err(|e| e.to_string())?);
            t.push(start.elapsed().as_secs_f64());
        }
        Ok(median(t))
    };
    let (small, large) = (time(8000)?, time(64000)?);
    let ratio = large / small;
    ensure(
        ratio <= 12.0,
        format!("t(64000) = {large:.4}s, t(8000) = {small:.4}s, ratio {ratio:.2}"),
    )
}

/// 96x64 synthetic landscape: sky gradient, sun, red house, grass, with noise.
fn thumbnail(path: &std::path::Path) {
    let (w, h) = (96u32, 64u32);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let img = image::RgbImage::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let base: [f64; 3] = if (xf - 75.0).powi(2) + (yf - 12.0).powi(2) < 64.0 {
            [250.0, 215.0, 40.0]
        } else if (18.0..46.0).contains(&xf) && (26.0..50.0).contains(&yf) {
            [180.0, 40.0, 35.0]
        } else if yf >= 44.0 {
            [60.0, 150.0 - (yf - 44.0), 50.0]
        } else {
            [90.0 + yf, 150.0 + yf, 235.0]
        };
        let px = base.map(|c| (c + 6.0 * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 255.0) as u8);
        image::Rgb(px)
    });
    img.save(path).unwrap();
}

fn segmentation_agreement() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("thumb.png");
    thumbnail(&path);
    let (cloud, w, h) = image_to_nodes(&path).map_err(|e| e.to_string())?;
    let cfg = EigConfig::new(
        EigMethod::NfftLanczos,
        KernelSpec::gaussian(90.0).unwrap(),
        FastsumParams::setup(3).unwrap(),
        4,
        0,
    );
    let fast = compute_eigenpairs(&cloud.coords, 3, &cfg).map_err(|e| e.to_string())?;
    let exact = compute_eigenpairs(
        &cloud.coords,
        3,
        &EigConfig {
            method: EigMethod::Direct,
            ..cfg
        },
    )
    .map_err(|e| e.to_string())?;
    let a = segment_labels(&fast.pairs, 4, 0).map_err(|e| e.to_string())?;
    let b = segment_labels(&exact.pairs, 4, 0).map_err(|e| e.to_string())?;
    let aligned = align_labels(&b, &a).map_err(|e| e.to_string())?;
    let diff = misclassification_rate(&aligned, &b).map_err(|e| e.to_string())?;
    ensure(
        diff <= 0.01,
        format!("{w}x{h} pixels, label difference {:.3}%", 100.0 * diff),
    )
}

fn allen_cahn_rates() -> Outcome {
    let (mut rates, mut fast_runs) = (Vec::new(), 0);
    let mut steps = Vec::new();
    for seed in 0..10u64 {
        let mut cloud = spiral(10_000, 100 + seed);
        cloud.relabel_nearest(&spiral_centers(5, 10.0, 2.0));
        let truth = cloud.labels.clone().unwrap();
        let cfg = EigConfig::new(
            EigMethod::NfftLanczos,
            KernelSpec::gaussian(3.5).unwrap(),
            FastsumParams::setup(2).unwrap(),
            5,
            seed,
        );
        let pairs = compute_eigenpairs(&cloud.coords, 3, &cfg).map_err(|e| e.to_string())?.pairs;
        let sel = TrainingSelection::sample(&truth, 5, 10, seed).map_err(|e| e.to_string())?;
        let res = allen_cahn_ssl(&pairs.to_laplacian(), &sel, &AllenCahnParams::default(), 5)
            .map_err(|e| e.to_string())?;
        let worst = res.steps.iter().copied().max().unwrap_or(0);
        if res.converged && worst <= 20 {
            fast_runs += 1;
        }
        steps.push(worst);
        rates.push(classification_rate(&res.labels, &truth).map_err(|e| e.to_string())?);
    }
    let avg = mean(&rates);
    ensure(
        avg >= 0.93 && fast_runs >= 9,
        format!("average classification rate {avg:.4}, runs converged within 20 steps {fast_runs}/10, steps {steps:?}"),
    )
}

fn kernel_ssl() -> Outcome {
    let params = FastsumParams::new(512, 3).unwrap();
    let gauss = KernelSpec::gaussian(0.1).unwrap();
    let (mut cg_rates, mut trunc_rates, mut failures) = (Vec::new(), Vec::new(), Vec::new());
    let mut max_iter_used = 0;
    let mut all_converged = true;
    for seed in 0..10u64 {
        let cloud = gen_crescent_fullmoon(10_000, 5.0, 5.0, 8.0, 200 + seed).unwrap();
        let truth = cloud.labels.clone().unwrap();
        let sel = TrainingSelection::sample(&truth, 2, 25, seed).map_err(|e| e.to_string())?;
        let f = sel.fidelity(1);
        let run = || -> Result<(f64, f64, usize, bool), String> {
            let op = AdjacencyOperator::build(&cloud.coords, 2, gauss, params).map_err(|e| e.to_string())?;
            let res = kernel_ssl_solve(&op, &f, 1e4, 1e-4, 1000).map_err(|e| e.to_string())?;
            let cg = misclassification_rate(&res.labels(), &truth).map_err(|e| e.to_string())?;
            let pairs = lanczos_largest(&op, 10, &LanczosOptions { seed, ..Default::default() })
                .map_err(|e| e.to_string())?
                .pairs;
            let u = kernel_ssl_truncated(&pairs, &f, 1e4).map_err(|e| e.to_string())?;
            let labels: Vec<usize> = u.iter().map(|&v| usize::from(v > 0.0)).collect();
            let tr = misclassification_rate(&labels, &truth).map_err(|e| e.to_string())?;
            Ok((cg, tr, res.iterations, res.converged))
        };
        match run() {
            Ok((cg, tr, it, conv)) => {
                cg_rates.push(cg);
                trunc_rates.push(tr);
                max_iter_used = max_iter_used.max(it);
                all_converged &= conv;
            }
            Err(e) => {
                all_converged = false;
                failures.push(format!("run {seed}: {e}"));
            }
        }
    }
    if cg_rates.is_empty() {
        return Err(format!("no run completed; {}", failures.join("; ")));
    }
    let (cg, tr) = (mean(&cg_rates), mean(&trunc_rates));

    let laplace = (|| -> Result<f64, String> {
        let cloud = gen_crescent_fullmoon(10_000, 5.0, 5.0, 8.0, 200).unwrap();
        let truth = cloud.labels.clone().unwrap();
        let sel = TrainingSelection::sample(&truth, 2, 25, 0).map_err(|e| e.to_string())?;
        let op = AdjacencyOperator::build(&cloud.coords, 2, KernelSpec::laplacian_rbf(0.05).unwrap(), params)
            .map_err(|e| e.to_string())?;
        let res = kernel_ssl_solve(&op, &sel.fidelity(1), 1e4, 1e-4, 1000).map_err(|e| e.to_string())?;
        misclassification_rate(&res.labels(), &truth).map_err(|e| e.to_string())
    })();
    let laplace_msg = match &laplace {
        Ok(r) => format!("{r:.4}"),
        Err(e) => format!("error: {e}"),
    };
    ensure(
        cg <= 0.02 && all_converged && (tr - cg).abs() <= 0.01 && laplace.as_ref().is_ok_and(|r| *r <= 0.05),
        format!(
            "CG average misclassification {cg:.4} over {} runs (max {max_iter_used} iterations, all converged: \
             {all_converged}), truncated k=10 {tr:.4}, Laplacian-RBF {laplace_msg}; failed runs: [{}]",
            cg_rates.len(),
            failures.join("; ")
        ),
    )
}

fn krr_sanity() -> Outcome {
    let cloud = gen_two_moons(400, 0.1, 12).unwrap();
    let f: Vec<f64> = cloud.labels.as_ref().unwrap().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let params = Some(FastsumParams::setup(2).unwrap());
    let mut parts = Vec::new();
    for kernel in [KernelSpec::gaussian(0.5).unwrap(), KernelSpec::inverse_multiquadric(0.5).unwrap()] {
        let model = krr_fit(&cloud.coords, 2, kernel, 1e-3, &f, params, 1e-8, 2000).map_err(|e| e.to_string())?;
        let fitted = krr_predict(&model, &cloud.coords).map_err(|e| e.to_string())?;
        let acc = fitted.iter().zip(&f).filter(|(p, t)| p.signum() == t.signum()).count() as f64 / f.len() as f64;
        // Training residual must not grow as beta shrinks.
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for beta in [1.0, 1e-2, 1e-4] {
            let m = krr_fit(&cloud.coords, 2, kernel, beta, &f, params, 1e-10, 5000).map_err(|e| e.to_string())?;
            let p = krr_predict(&m, &cloud.coords).map_err(|e| e.to_string())?;
            let err = p.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            monotone &= err <= prev * (1.0 + 1e-6);
            prev = err;
        }
        if !(acc >= 0.98 && monotone && model.converged) {
            return Err(format!("{:?}: training accuracy {acc:.4}, monotone {monotone}", kernel.family));
        }
        parts.push(format!("{:?} accuracy {acc:.4}", kernel.family));
    }
    Ok(parts.join(", "))
}

fn main() {
    // Timings are single-threaded.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: usize| only.is_empty() || only.contains(&id);

    let reference = if [3, 4, 5].iter().any(|&i| wanted(i)) {
        Some(spiral_reference())
    } else {
        None
    };
    let r = reference.as_ref();
    type Criterion<'a> = (usize, &'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        (1, "NFFT correctness", Box::new(nfft_correctness)),
        (2, "fastsum accuracy ladder", Box::new(fastsum_ladder)),
        (3, "eigen-residual plateaus", Box::new(move || residual_plateaus(r.unwrap()))),
        (4, "hybrid Nystrom error bands", Box::new(move || hybrid_bands(r.unwrap()))),
        (5, "traditional Nystrom inferiority", Box::new(move || nystrom_inferiority(r.unwrap()))),
        (6, "normalization error bound", Box::new(propagation_bound_check)),
        (7, "Perron identity", Box::new(perron_identity)),
        (8, "linear matvec scaling", Box::new(matvec_scaling)),
        (9, "segmentation agreement", Box::new(segmentation_agreement)),
        (10, "Allen-Cahn SSL", Box::new(allen_cahn_rates)),
        (11, "kernel SSL", Box::new(kernel_ssl)),
        (12, "KRR sanity", Box::new(krr_sanity)),
    ];
    let mut failed = 0;
    for (id, name, run) in &criteria {
        if !wanted(*id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {id:>2} {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
