//! Graph learning on top of the spectral and fast-summation layers.

pub mod allen_cahn;
pub mod cluster;
pub mod kernel_ssl;
pub mod kmeans;
pub mod krr;
pub mod metrics;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FgsError, Result};

pub use allen_cahn::{allen_cahn_ssl, AllenCahnParams, AllenCahnResult};
pub use cluster::spectral_cluster;
pub use kernel_ssl::{kernel_ssl_solve, kernel_ssl_truncated, SslResult};
pub use kmeans::{kmeans, KmeansOptions, KmeansResult};
pub use krr::{krr_fit, krr_predict, RidgeModel};
pub use metrics::{classification_rate, misclassification_rate, misclassification_rate_permuted};

/// Labeled training nodes, `s` per class.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TrainingSelection {
    /// `per_class[c]` holds the training indices of class `c`.
    pub per_class: Vec<Vec<usize>>,
    pub n: usize,
}

impl TrainingSelection {
    /// Draws `s` nodes of every class uniformly without replacement.
    pub fn sample(labels: &[usize], n_classes: usize, s: usize, seed: u64) -> Result<Self> {
        let mut members = vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= n_classes {
                return Err(FgsError::Range {
                    index: i,
                    detail: format!("label {l} outside 0..{n_classes}"),
                });
            }
            members[l].push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut per_class = Vec::with_capacity(n_classes);
        for (c, m) in members.iter().enumerate() {
            if m.len() < s {
                return Err(FgsError::Parameter(format!(
                    "class {c} has {} nodes, fewer than {s} training samples",
                    m.len()
                )));
            }
            let mut picked: Vec<usize> = sample(&mut rng, m.len(), s).into_iter().map(|j| m[j]).collect();
            picked.sort_unstable();
            per_class.push(picked);
        }
        Ok(Self { per_class, n: labels.len() })
    }

    pub fn from_indices(per_class: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for idx in per_class.iter().flatten() {
            match seen.get_mut(*idx) {
                None => {
                    return Err(FgsError::Range {
                        index: *idx,
                        detail: format!("training index outside 0..{n}"),
                    })
                }
                Some(true) => {
                    return Err(FgsError::Parameter(format!("training index {idx} used twice")));
                }
                Some(s) => *s = true,
            }
        }
        Ok(Self { per_class, n })
    }

    pub fn n_classes(&self) -> usize {
        self.per_class.len()
    }

    /// `+1` on training nodes of `class`, `-1` on the other training nodes.
    pub fn fidelity(&self, class: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.n];
        for (c, idx) in self.per_class.iter().enumerate() {
            let v = if c == class { 1.0 } else { -1.0 };
            for &i in idx {
                f[i] = v;
            }
        }
        f
    }

    /// Diagonal of the fidelity mask: `omega0` on training nodes.
    pub fn mask(&self, omega0: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for &i in self.per_class.iter().flatten() {
            m[i] = omega0;
        }
        m
    }

    pub fn is_training(&self) -> Vec<bool> {
        let mut t = vec![false; self.n];
        for &i in self.per_class.iter().flatten() {
            t[i] = true;
        }
        t
    }
}
