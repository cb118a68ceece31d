use super::kmeans::{kmeans, KmeansOptions};
use crate::error::{FgsError, Result};
use crate::spectral::EigenPairs;

/// Normalized spectral clustering on the rows of the eigenvector matrix.
///
/// All columns of `pairs` are used. Zero rows stay zero and go to the
/// nearest centroid.
pub fn spectral_cluster(pairs: &EigenPairs, k_clusters: usize, opts: &KmeansOptions) -> Result<Vec<usize>> {
    let k = pairs.len();
    if k_clusters == 0 || k < k_clusters {
        return Err(FgsError::Parameter(format!(
            "need at least {k_clusters} eigenvectors for {k_clusters} clusters, got {k}"
        )));
    }
    let n = pairs.dim();
    let mut rows = vec![0.0; n * k];
    for j in 0..k {
        for (i, v) in pairs.vector(j).iter().enumerate() {
            rows[i * k + j] = *v;
        }
    }
    for row in rows.chunks_exact_mut(k) {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(kmeans(&rows, k, k_clusters, opts)?.labels)
}
