//! Kernel ridge regression with a matrix-free Gram operator.

use crate::error::{check_len, FgsError, Result};
use crate::fastsum::{FastsumParams, FastsumPlan};
use crate::kernels::KernelSpec;
use crate::spectral::{cg_solve, FnOperator};

#[derive(Debug, Clone, serde::Serialize)]
pub struct RidgeModel {
    pub kernel: KernelSpec,
    pub dim: usize,
    pub nodes: Vec<f64>,
    /// Dual coefficients solving `(K + beta I) alpha = f`.
    pub alpha: Vec<f64>,
    pub beta: f64,
    /// `None` means exact summation.
    pub params: Option<FastsumParams>,
    pub iterations: usize,
    pub converged: bool,
}

fn plan(nodes: &[f64], dim: usize, kernel: KernelSpec, params: Option<FastsumParams>) -> Result<FastsumPlan> {
    match params {
        Some(p) => FastsumPlan::new(nodes, dim, kernel, p),
        None => FastsumPlan::direct(nodes, dim, kernel),
    }
}

/// Fits `alpha` by CG on `x -> K x + beta x`, `K` with its full diagonal.
#[allow(clippy::too_many_arguments)]
pub fn krr_fit(
    nodes: &[f64],
    dim: usize,
    kernel: KernelSpec,
    beta: f64,
    f: &[f64],
    params: Option<FastsumParams>,
    tol: f64,
    max_iter: usize,
) -> Result<RidgeModel> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(FgsError::Parameter(format!("beta must be > 0, got {beta}")));
    }
    let gram = plan(nodes, dim, kernel, params)?;
    check_len(gram.len(), f.len())?;
    let system = FnOperator::new(gram.len(), |x: &[f64]| {
        Ok(gram.apply(x)?.into_iter().zip(x).map(|(k, xi)| k + beta * xi).collect())
    });
    let res = cg_solve(&system, f, tol, max_iter).map_err(|e| match e {
        FgsError::Indefinite { iteration, curvature } => FgsError::Conditioning(format!(
            "K + beta I is not positive definite (curvature {curvature:e} at CG step {iteration}); \
             the kernel may not be positive definite, try a larger beta or solve the normal equations \
             (K^2 + beta K) alpha = K f"
        )),
        other => other,
    })?;
    Ok(RidgeModel {
        kernel,
        dim,
        nodes: nodes.to_vec(),
        alpha: res.x,
        beta,
        params,
        iterations: res.iterations,
        converged: res.converged,
    })
}

/// `F(x) = sum_i alpha_i K(x_i, x)` at every query node, by one summation
/// over training and query nodes with the input supported on the training
/// part.
pub fn krr_predict(model: &RidgeModel, queries: &[f64]) -> Result<Vec<f64>> {
    if !queries.len().is_multiple_of(model.dim) {
        return Err(FgsError::Parameter("query array length is not a multiple of dim".into()));
    }
    let n_train = model.alpha.len();
    let n_query = queries.len() / model.dim;
    if n_query == 0 {
        return Ok(Vec::new());
    }
    let mut all = model.nodes.clone();
    all.extend_from_slice(queries);
    let union = plan(&all, model.dim, model.kernel, model.params)?;
    let mut x = model.alpha.clone();
    x.resize(n_train + n_query, 0.0);
    let out = union.apply(&x)?;
    Ok(out[n_train..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let beta = 0.25;
        let m = krr_fit(&[0.3, -0.1], 2, k, beta, &[2.0], None, 1e-14, 10).unwrap();
        assert!((m.alpha[0] - 2.0 / 1.25).abs() < 1e-14);
        let p = krr_predict(&m, &[0.3, -0.1]).unwrap();
        assert!((p[0] - 2.0 / 1.25).abs() < 1e-14);
    }

    #[test]
    fn small_beta_interpolates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let nodes: Vec<f64> = (0..n).flat_map(|i| [i as f64 * 3.0, rng.random::<f64>()]).collect();
        let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let k = KernelSpec::gaussian(1.0).unwrap();
        let m = krr_fit(&nodes, 2, k, 1e-6, &f, None, 1e-14, 1000).unwrap();

        let gram = DMatrix::from_fn(n, n, |i, j| k.between(&nodes[2 * i..2 * i + 2], &nodes[2 * j..2 * j + 2]));
        let dense = (&gram + DMatrix::identity(n, n) * 1e-6).lu().solve(&DVector::from_vec(f.clone())).unwrap();
        for (a, b) in m.alpha.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        let p = krr_predict(&m, &nodes).unwrap();
        for (a, b) in p.iter().zip(&f) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn interpolation_error_monotone_in_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 60;
        let nodes: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>() * 4.0).collect();
        let f: Vec<f64> = (0..n).map(|i| if nodes[2 * i] > 2.0 { 1.0 } else { -1.0 }).collect();
        let k = KernelSpec::gaussian(0.7).unwrap();
        let mut last = f64::INFINITY;
        for beta in [1.0, 1e-2, 1e-4] {
            let m = krr_fit(&nodes, 2, k, beta, &f, None, 1e-12, 5000).unwrap();
            let p = krr_predict(&m, &nodes).unwrap();
            let err = p.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= last);
            last = err;
        }
    }

    #[test]
    fn rejects_bad_beta() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        assert!(krr_fit(&[0.0], 1, k, 0.0, &[1.0], None, 1e-8, 10).is_err());
    }
}
