use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, sym_eig_desc, EigenPairs, SymmetricOperator};
use crate::error::{FgsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Relative Ritz residual tolerance: `|beta_{j+1} s_j| <= tol |lambda|`.
    pub tol: f64,
    pub seed: u64,
    /// Ritz values are recomputed every `check_every` steps.
    pub check_every: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-12,
            seed: 0,
            check_every: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub pairs: EigenPairs,
    pub iterations: usize,
    pub converged: bool,
    /// Ritz residual estimates `|beta_{j+1} s_{j,i}|` for the returned pairs.
    pub ritz_residuals: Vec<f64>,
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    estimates: Vec<f64>,
}

fn ritz(alpha: &[f64], beta: &[f64], k: usize) -> Ritz {
    let j = alpha.len();
    let t = DMatrix::from_fn(j, j, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let (values, vectors) = sym_eig_desc(t);
    let tail = beta.get(j - 1).copied().unwrap_or(0.0);
    let estimates = (0..k.min(j)).map(|i| (tail * vectors[(j - 1, i)]).abs()).collect();
    Ritz {
        values,
        vectors,
        estimates,
    }
}

/// Orthogonalizes `w` against all columns of `basis`, twice.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        reorthogonalize(&mut v, basis);
        let nv = norm2(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// `k` algebraically largest eigenpairs by Lanczos with full
/// reorthogonalization.
pub fn lanczos_largest(op: &dyn SymmetricOperator, k: usize, opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(FgsError::Parameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if opts.tol.is_nan() || opts.tol < 0.0 || opts.check_every == 0 {
        return Err(FgsError::Parameter("invalid Lanczos tolerance or check interval".into()));
    }
    let max_iter = opts.max_iter.clamp(k, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_iter);
    let mut beta: Vec<f64> = Vec::with_capacity(max_iter);

    let mut q = random_unit(&mut rng, n, &basis).expect("random start vector");
    let mut converged = false;
    let mut exhausted = false;
    let mut last: Option<Ritz> = None;

    while alpha.len() < max_iter {
        let mut w = op.apply(&q)?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(FgsError::Divergence { steps: alpha.len() });
        }
        let a = dot(&q, &w);
        for (wi, qi) in w.iter_mut().zip(&q) {
            *wi -= a * qi;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        basis.push(q);
        alpha.push(a);
        reorthogonalize(&mut w, &basis);
        let b = norm2(&w);
        let j = alpha.len();
        let scale = alpha.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
        let breakdown = b <= 1e-14 * scale;
        beta.push(if breakdown { 0.0 } else { b });

        if j == n {
            exhausted = true;
            break;
        }
        // A breakdown means the Krylov space is invariant, so every Ritz
        // residual vanishes even if a multiple eigenvalue was missed: only
        // trust the estimate after continuing past a restart.
        let check = !breakdown && j >= k && ((j - k).is_multiple_of(opts.check_every) || j == max_iter);
        if check {
            let r = ritz(&alpha, &beta, k);
            let top = r.values[0].abs().max(1e-300);
            converged = r
                .estimates
                .iter()
                .zip(&r.values)
                .all(|(e, l)| *e <= opts.tol * l.abs().max(top * f64::EPSILON));
            last = Some(r);
            if converged {
                break;
            }
        }
        if breakdown {
            // Invariant subspace found; continue in its orthogonal complement.
            match random_unit(&mut rng, n, &basis) {
                Some(v) => q = v,
                None => {
                    exhausted = true;
                    break;
                }
            }
        } else {
            w.iter_mut().for_each(|x| *x /= b);
            q = w;
        }
    }

    let iterations = alpha.len();
    if exhausted || last.as_ref().is_none_or(|r| r.values.len() != iterations) {
        if exhausted {
            // The Krylov space is the whole space: Ritz pairs are exact.
            if let Some(b) = beta.last_mut() {
                *b = 0.0;
            }
            converged = true;
        }
        last = Some(ritz(&alpha, &beta, k));
        if !exhausted {
            let r = last.as_ref().unwrap();
            let top = r.values[0].abs().max(1e-300);
            converged = r
                .estimates
                .iter()
                .zip(&r.values)
                .all(|(e, l)| *e <= opts.tol * l.abs().max(top * f64::EPSILON));
        }
    }
    let r = last.unwrap();
    let kk = k.min(iterations);
    let mut vectors = vec![0.0; n * kk];
    for i in 0..kk {
        let out = &mut vectors[i * n..(i + 1) * n];
        for (j, qj) in basis.iter().enumerate() {
            let s = r.vectors[(j, i)];
            for (o, qv) in out.iter_mut().zip(qj) {
                *o += s * qv;
            }
        }
    }
    let ritz_residuals = r.estimates[..kk].to_vec();
    let pairs = EigenPairs::new(r.values[..kk].to_vec(), vectors, n)?;
    Ok(LanczosResult {
        pairs,
        iterations,
        converged,
        ritz_residuals,
    })
}
