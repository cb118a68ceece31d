//! Exact references: the normalized adjacency matrix stored or recomputed
//! row by row.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{lanczos_largest, EigenPairs, LanczosOptions, SymmetricOperator};
use crate::error::{check_len, FgsError, Result};
use crate::kernels::KernelSpec;

/// Above this size the reference recomputes kernel rows on every product.
pub const STORED_LIMIT: usize = 4096;
/// Hard cap for the `O(n^2)`-per-product recompute mode.
pub const RECOMPUTE_LIMIT: usize = 200_000;

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n: usize,
    data: Vec<f64>,
}

impl DenseOperator {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n * n, data.len())?;
        Ok(Self { n, data })
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(FgsError::Shape {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        Ok(Self {
            n,
            data: m.transpose().as_slice().to_vec(),
        })
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok(self
            .data
            .par_chunks_exact(self.n)
            .with_min_len(32)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Exact `A = D^{-1/2} W D^{-1/2}` for a kernel graph.
#[derive(Debug, Clone)]
pub enum DenseReference {
    Stored(DenseOperator),
    Recompute {
        nodes: Vec<f64>,
        dim: usize,
        kernel: KernelSpec,
        inv_sqrt_degrees: Vec<f64>,
    },
}

fn kernel_row(nodes: &[f64], dim: usize, kernel: &KernelSpec, j: usize, out: &mut [f64]) {
    let vj = &nodes[j * dim..(j + 1) * dim];
    for (i, (o, vi)) in out.iter_mut().zip(nodes.chunks_exact(dim)).enumerate() {
        *o = if i == j { 0.0 } else { kernel.between(vj, vi) };
    }
}

pub fn dense_reference_apply(nodes: &[f64], dim: usize, kernel: &KernelSpec) -> Result<DenseReference> {
    if dim == 0 || !nodes.len().is_multiple_of(dim) {
        return Err(FgsError::Parameter(format!("node array length {} is not a multiple of {dim}", nodes.len())));
    }
    let n = nodes.len() / dim;
    if n < 2 {
        return Err(FgsError::Parameter("graph needs at least 2 nodes".into()));
    }
    if n > RECOMPUTE_LIMIT {
        return Err(FgsError::Resource(format!(
            "dense reference limited to n <= {RECOMPUTE_LIMIT}, got {n}"
        )));
    }
    let degrees: Vec<f64> = (0..n)
        .into_par_iter()
        .with_min_len(16)
        .map(|j| {
            let vj = &nodes[j * dim..(j + 1) * dim];
            nodes
                .chunks_exact(dim)
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, vi)| kernel.between(vj, vi))
                .sum()
        })
        .collect();
    if let Some((index, &value)) = degrees.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(FgsError::DegreePositivity { index, value });
    }
    let inv_sqrt_degrees: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    if n <= STORED_LIMIT {
        let mut data = vec![0.0; n * n];
        data.par_chunks_exact_mut(n).enumerate().for_each(|(j, row)| {
            kernel_row(nodes, dim, kernel, j, row);
            for (i, v) in row.iter_mut().enumerate() {
                *v *= inv_sqrt_degrees[j] * inv_sqrt_degrees[i];
            }
        });
        Ok(DenseReference::Stored(DenseOperator { n, data }))
    } else {
        Ok(DenseReference::Recompute {
            nodes: nodes.to_vec(),
            dim,
            kernel: *kernel,
            inv_sqrt_degrees,
        })
    }
}

impl SymmetricOperator for DenseReference {
    fn dim(&self) -> usize {
        match self {
            DenseReference::Stored(op) => op.n,
            DenseReference::Recompute { inv_sqrt_degrees, .. } => inv_sqrt_degrees.len(),
        }
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            DenseReference::Stored(op) => op.apply(x),
            DenseReference::Recompute {
                nodes,
                dim,
                kernel,
                inv_sqrt_degrees,
            } => {
                let n = inv_sqrt_degrees.len();
                check_len(n, x.len())?;
                let z: Vec<f64> = x.iter().zip(inv_sqrt_degrees).map(|(a, s)| a * s).collect();
                Ok((0..n)
                    .into_par_iter()
                    .with_min_len(8)
                    .map(|j| {
                        let vj = &nodes[j * dim..(j + 1) * dim];
                        let s: f64 = nodes
                            .chunks_exact(*dim)
                            .zip(&z)
                            .enumerate()
                            .filter(|(i, _)| *i != j)
                            .map(|(_, (vi, zi))| zi * kernel.between(vj, vi))
                            .sum();
                        s * inv_sqrt_degrees[j]
                    })
                    .collect())
            }
        }
    }
}

/// Ground-truth top-`k` eigenpairs of `A` via Lanczos on the exact operator.
pub fn dense_reference_eig(nodes: &[f64], dim: usize, kernel: &KernelSpec, k: usize) -> Result<EigenPairs> {
    let op = dense_reference_apply(nodes, dim, kernel)?;
    let opts = LanczosOptions {
        tol: 1e-14,
        max_iter: 1000,
        ..Default::default()
    };
    Ok(lanczos_largest(&op, k, &opts)?.pairs)
}
