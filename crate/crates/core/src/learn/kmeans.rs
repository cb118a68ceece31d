use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FgsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KmeansOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    /// Within-cluster sum of squares.
    pub wcss: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(points: &[f64], dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len() / dim;
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&points[first * dim..(first + 1) * dim]);
    let mut d2: Vec<f64> = points.chunks_exact(dim).map(|p| dist2(p, &centroids[..dim])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = points[pick * dim..(pick + 1) * dim].to_vec();
        for (d, p) in d2.iter_mut().zip(points.chunks_exact(dim)) {
            *d = d.min(dist2(p, &c));
        }
        centroids.extend(c);
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.chunks_exact(dim).enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn lloyd(points: &[f64], dim: usize, k: usize, mut centroids: Vec<f64>, max_iter: usize) -> KmeansResult {
    let n = points.len() / dim;
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.chunks_exact(dim).enumerate() {
            let (j, _) = nearest(p, &centroids, dim);
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.chunks_exact(dim).zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for t in 0..dim {
                    centroids[j * dim + t] = sums[j * dim + t] / counts[j] as f64;
                }
            }
        }
        // Empty clusters restart at the point farthest from its centroid.
        for j in 0..k {
            if counts[j] == 0 {
                let far = points
                    .chunks_exact(dim)
                    .zip(&labels)
                    .map(|(p, &l)| dist2(p, &centroids[l * dim..(l + 1) * dim]))
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                centroids[j * dim..(j + 1) * dim].copy_from_slice(&points[far * dim..(far + 1) * dim]);
                labels[far] = j;
            }
        }
    }
    let wcss = points
        .chunks_exact(dim)
        .zip(&labels)
        .map(|(p, &l)| dist2(p, &centroids[l * dim..(l + 1) * dim]))
        .sum();
    KmeansResult {
        labels,
        centroids,
        wcss,
    }
}

/// Lloyd's algorithm from k-means++ seeds; best of `restarts` by WCSS.
pub fn kmeans(points: &[f64], dim: usize, k: usize, opts: &KmeansOptions) -> Result<KmeansResult> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(FgsError::Parameter("point array length is not a multiple of dim".into()));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(FgsError::Parameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<KmeansResult> = None;
    for _ in 0..opts.restarts.max(1) {
        let init = plus_plus(points, dim, k, &mut rng);
        let res = lloyd(points, dim, k, init, opts.max_iter);
        if best.as_ref().is_none_or(|b| res.wcss < b.wcss) {
            best = Some(res);
        }
    }
    Ok(best.unwrap())
}
