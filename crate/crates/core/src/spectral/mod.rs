//! Eigensolvers and linear solvers over abstract symmetric operators.

pub mod cg;
pub mod dense;
pub mod lanczos;
pub mod nystrom;

use nalgebra::DMatrix;

use crate::error::{check_len, Result};

pub use cg::{cg_solve, CgResult};
pub use dense::{dense_reference_apply, dense_reference_eig, DenseOperator, DenseReference};
pub use lanczos::{lanczos_largest, LanczosOptions, LanczosResult};
pub use nystrom::{nystrom_gaussian_nfft, nystrom_traditional, HybridNystromOptions, NystromOptions};

/// A linear map on `R^n` that is symmetric up to its error budget.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).apply(x)
    }
}

/// `x -> alpha x + beta B x`.
#[derive(Debug, Clone, Copy)]
pub struct Affine<O> {
    pub inner: O,
    pub alpha: f64,
    pub beta: f64,
}

impl<O: SymmetricOperator> SymmetricOperator for Affine<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let bx = self.inner.apply(x)?;
        Ok(x.iter().zip(bx).map(|(a, b)| self.alpha * a + self.beta * b).collect())
    }
}

/// Operator defined by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> SymmetricOperator for FnOperator<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x.len())?;
        (self.f)(x)
    }
}

/// Eigenvalues with orthonormal eigenvectors stored column-major (`n x k`).
///
/// Solvers return values in descending order. Each column is signed so its
/// largest-magnitude entry is positive.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EigenPairs {
    values: Vec<f64>,
    vectors: Vec<f64>,
    n: usize,
}

impl EigenPairs {
    /// Sorts descending and normalizes column signs.
    pub fn new(values: Vec<f64>, vectors: Vec<f64>, n: usize) -> Result<Self> {
        check_len(values.len() * n, vectors.len())?;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        let mut sorted_values = Vec::with_capacity(values.len());
        let mut sorted_vectors = Vec::with_capacity(vectors.len());
        for &j in &order {
            sorted_values.push(values[j]);
            let col = &vectors[j * n..(j + 1) * n];
            let sign = sign_of_largest(col);
            sorted_vectors.extend(col.iter().map(|v| v * sign));
        }
        Ok(Self {
            values: sorted_values,
            vectors: sorted_vectors,
            n,
        })
    }

    pub fn from_matrix(values: Vec<f64>, vectors: &DMatrix<f64>) -> Result<Self> {
        Self::new(values, vectors.as_slice().to_vec(), vectors.nrows())
    }

    pub fn empty(n: usize) -> Self {
        Self {
            values: Vec::new(),
            vectors: Vec::new(),
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dimension of the eigenvectors.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    /// Column-major `n x k` eigenvector storage.
    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.len(), &self.vectors)
    }

    pub fn truncate(&mut self, k: usize) {
        self.values.truncate(k);
        self.vectors.truncate(k * self.n);
    }

    /// Pairs of `L_s = I - A` from pairs of `A`: values `1 - lambda`, now in
    /// ascending order, same vectors.
    pub fn to_laplacian(&self) -> EigenPairs {
        Self {
            values: self.values.iter().map(|l| 1.0 - l).collect(),
            vectors: self.vectors.clone(),
            n: self.n,
        }
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.len() {
            for b in a..self.len() {
                let dot: f64 = self.vector(a).iter().zip(self.vector(b)).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

fn sign_of_largest(col: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &v in col {
        if v.abs() > best {
            best = v.abs();
            sign = if v < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// `||A v_j - lambda_j v_j||_2` per pair, and their maximum (0 when empty).
pub fn residual_norms(reference: &dyn SymmetricOperator, pairs: &EigenPairs) -> Result<(Vec<f64>, f64)> {
    check_len(reference.dim(), pairs.dim())?;
    let mut norms = Vec::with_capacity(pairs.len());
    for j in 0..pairs.len() {
        let v = pairs.vector(j);
        let av = reference.apply(v)?;
        let lambda = pairs.values()[j];
        norms.push(av.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt());
    }
    let max = norms.iter().copied().fold(0.0, f64::max);
    Ok((norms, max))
}

/// `max_j |lambda_j - lambda_j^ref|` over the common prefix.
pub fn max_eigenvalue_error(values: &[f64], reference: &[f64]) -> f64 {
    values.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
pub(crate) fn sym_eig_desc(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
