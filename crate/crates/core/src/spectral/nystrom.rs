//! Low-rank eigendecompositions of `A` from sampled columns (traditional
//! Nyström) or from Gaussian sketches applied through a fast operator.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{sym_eig_desc, EigenPairs, SymmetricOperator};
use crate::error::{FgsError, Result};
use crate::kernels::KernelSpec;

/// Largest accepted condition number of the sampled block `W_XX`.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NystromOptions {
    /// Sample size `L`.
    pub samples: usize,
    /// Requested pairs `k`.
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HybridNystromOptions {
    /// Number of Gaussian columns `L`.
    pub samples: usize,
    /// Inversion rank `M`.
    pub rank: usize,
    /// Requested pairs `k`.
    pub k: usize,
    pub seed: u64,
}

/// Nyström extension from `L` uniformly sampled nodes, using the QR route
/// `Q R = D_E^{-1/2} [W_XX W_XY]^T`, `eig(R W_XX^{-1} R^T)`.
pub fn nystrom_traditional(nodes: &[f64], dim: usize, kernel: &KernelSpec, opts: &NystromOptions) -> Result<EigenPairs> {
    if dim == 0 || !nodes.len().is_multiple_of(dim) {
        return Err(FgsError::Parameter("node array length is not a multiple of dim".into()));
    }
    let n = nodes.len() / dim;
    let l = opts.samples;
    if l == 0 || l > n || opts.k == 0 || opts.k > l {
        return Err(FgsError::Parameter(format!(
            "need 1 <= k <= L <= n, got k={}, L={l}, n={n}",
            opts.k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let picked: Vec<usize> = sample(&mut rng, n, l).into_vec();

    // C = [W_XX; W_YX] in original row order, n x L.
    let mut c = DMatrix::<f64>::zeros(n, l);
    let cols: Vec<Vec<f64>> = picked
        .par_iter()
        .map(|&s| {
            let vs = &nodes[s * dim..(s + 1) * dim];
            nodes
                .chunks_exact(dim)
                .enumerate()
                .map(|(i, vi)| if i == s { 0.0 } else { kernel.between(vi, vs) })
                .collect()
        })
        .collect();
    for (a, col) in cols.iter().enumerate() {
        c.column_mut(a).copy_from_slice(col);
    }
    let wxx = DMatrix::from_fn(l, l, |a, b| c[(picked[a], b)]);

    let sv = wxx.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(FgsError::Conditioning(format!(
            "sampled block W_XX is ill-conditioned (condition {:e})",
            if smin > 0.0 { smax / smin } else { f64::INFINITY }
        )));
    }
    let lu = wxx.clone().lu();

    // D_E = C W_XX^{-1} C^T 1.
    let t = c.tr_mul(&nalgebra::DVector::from_element(n, 1.0));
    let s = lu
        .solve(&t)
        .ok_or_else(|| FgsError::Conditioning("W_XX is singular".into()))?;
    let degrees = &c * s;
    if let Some((index, &value)) = degrees.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(FgsError::DegreePositivity { index, value });
    }

    let mut m = c;
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= 1.0 / degrees[i].sqrt();
    }
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let x = lu
        .solve(&r.transpose())
        .ok_or_else(|| FgsError::Conditioning("W_XX is singular".into()))?;
    let core = &r * x;
    let core = (&core + core.transpose()) * 0.5;
    let (values, u) = sym_eig_desc(core);
    let v = q * u.columns(0, opts.k);
    EigenPairs::from_matrix(values[..opts.k].to_vec(), &v)
}

fn apply_columns(op: &dyn SymmetricOperator, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let cols: Vec<Vec<f64>> = (0..m.ncols())
        .into_par_iter()
        .map(|j| op.apply(m.column(j).as_slice()))
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, col) in cols.iter().enumerate() {
        out.column_mut(j).copy_from_slice(col);
    }
    Ok(out)
}

/// Nyström-Gaussian method with operator products supplied by `op`
/// (typically the fast-summation adjacency operator).
pub fn nystrom_gaussian_nfft(op: &dyn SymmetricOperator, opts: &HybridNystromOptions) -> Result<EigenPairs> {
    let n = op.dim();
    let (l, m, k) = (opts.samples, opts.rank, opts.k);
    if k == 0 || k > m || m > l || l > n {
        return Err(FgsError::Parameter(format!("need 1 <= k <= M <= L <= n, got k={k}, M={m}, L={l}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let g = DMatrix::from_fn(n, l, |_, _| 0.0);
    let mut g = g;
    for j in 0..l {
        for i in 0..n {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let y = apply_columns(op, &g)?;
    let q = y.qr().q();
    let b1 = apply_columns(op, &q)?;
    let b2 = q.tr_mul(&b1);
    let b2 = (&b2 + b2.transpose()) * 0.5;
    let (sigma, u) = sym_eig_desc(b2);
    let positive = sigma.iter().take_while(|s| **s > 0.0).count();
    if positive < m {
        return Err(FgsError::RankDeficient(format!(
            "only {positive} positive eigenvalues in Q^T A Q, need M = {m}; increase L"
        )));
    }
    let um = u.columns(0, m).into_owned();
    let qr = (&b1 * &um).qr();
    let qh = qr.q();
    let rh = qr.r();
    let inv_sigma = DMatrix::from_fn(m, m, |a, b| if a == b { 1.0 / sigma[a] } else { 0.0 });
    let core = &rh * inv_sigma * rh.transpose();
    let core = (&core + core.transpose()) * 0.5;
    let (values, uh) = sym_eig_desc(core);
    let v = qh * uh.columns(0, k);
    EigenPairs::from_matrix(values[..k].to_vec(), &v)
}
