//! Phase-field semi-supervised learning: convexity-splitting time steps of
//! the graph Allen–Cahn equation in a truncated eigenbasis of `L_s`.

use rayon::prelude::*;

use super::TrainingSelection;
use crate::error::{check_len, FgsError, Result};
use crate::spectral::EigenPairs;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AllenCahnParams {
    pub tau: f64,
    pub eps_ac: f64,
    pub omega0: f64,
    /// Convexity-splitting constant.
    pub c: f64,
    /// Threshold on the squared relative change of `u`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for AllenCahnParams {
    fn default() -> Self {
        let eps_ac = 10.0;
        let omega0 = 10_000.0;
        Self {
            tau: 0.1,
            eps_ac,
            omega0,
            c: 2.0 / eps_ac + omega0,
            tol: 1e-10,
            max_steps: 500,
        }
    }
}

impl AllenCahnParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tau, self.eps_ac, self.c, self.tol];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || !(self.omega0 >= 0.0) || self.max_steps == 0 {
            return Err(FgsError::Parameter(format!("invalid Allen-Cahn parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AllenCahnResult {
    pub labels: Vec<usize>,
    /// Time steps taken per channel.
    pub steps: Vec<usize>,
    /// Whether every channel met the tolerance before `max_steps`.
    pub converged: bool,
    /// Final phase fields, one per channel.
    #[serde(skip)]
    pub fields: Vec<Vec<f64>>,
}

struct Channel {
    field: Vec<f64>,
    steps: usize,
    converged: bool,
}

fn reconstruct(pairs: &EigenPairs, coeffs: &[f64]) -> Vec<f64> {
    let mut u = vec![0.0; pairs.dim()];
    for (j, a) in coeffs.iter().enumerate() {
        for (ui, vi) in u.iter_mut().zip(pairs.vector(j)) {
            *ui += a * vi;
        }
    }
    u
}

fn project(pairs: &EigenPairs, u: &[f64]) -> Vec<f64> {
    (0..pairs.len()).map(|j| pairs.vector(j).iter().zip(u).map(|(a, b)| a * b).sum()).collect()
}

/// One convexity-splitting step on the spectral coefficients.
fn step(pairs: &EigenPairs, coeffs: &[f64], f: &[f64], mask: &[f64], p: &AllenCahnParams, double_well: bool) -> Vec<f64> {
    let u = reconstruct(pairs, coeffs);
    let forcing: Vec<f64> = u
        .iter()
        .zip(f)
        .zip(mask)
        .map(|((&ui, &fi), &wi)| {
            let psi = if double_well { 4.0 * ui * (ui * ui - 1.0) } else { 0.0 };
            -psi / p.eps_ac + wi * (fi - ui)
        })
        .collect();
    let proj = project(pairs, &forcing);
    coeffs
        .iter()
        .zip(pairs.values())
        .zip(proj)
        .map(|((&a, &lambda), g)| (a / p.tau + p.c * a + g) / (1.0 / p.tau + p.eps_ac * lambda + p.c))
        .collect()
}

fn run_channel(pairs: &EigenPairs, f: &[f64], mask: &[f64], p: &AllenCahnParams, double_well: bool) -> Result<Channel> {
    let mut coeffs = project(pairs, f);
    for s in 1..=p.max_steps {
        let next = step(pairs, &coeffs, f, mask, p, double_well);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(FgsError::Divergence { steps: s });
        }
        // Orthonormal basis: coefficient norms equal node-space norms.
        let change: f64 = next.iter().zip(&coeffs).map(|(a, b)| (a - b) * (a - b)).sum();
        let size: f64 = next.iter().map(|a| a * a).sum();
        coeffs = next;
        if change <= p.tol * size {
            return Ok(Channel {
                field: reconstruct(pairs, &coeffs),
                steps: s,
                converged: true,
            });
        }
    }
    Ok(Channel {
        field: reconstruct(pairs, &coeffs),
        steps: p.max_steps,
        converged: false,
    })
}

/// Classifies all nodes from eigenpairs of `L_s` (ascending, `lambda_1 ~ 0`).
///
/// Two classes use one channel with fidelity `+1` on class 1 and `-1` on
/// class 0, decided by sign. More classes run one-vs-rest channels and take
/// the argmax.
pub fn allen_cahn_ssl(
    pairs: &EigenPairs,
    selection: &TrainingSelection,
    params: &AllenCahnParams,
    n_classes: usize,
) -> Result<AllenCahnResult> {
    params.validate()?;
    check_len(pairs.dim(), selection.n)?;
    if n_classes < 2 || selection.n_classes() != n_classes {
        return Err(FgsError::Parameter(format!(
            "need >= 2 classes matching the selection, got {n_classes} and {}",
            selection.n_classes()
        )));
    }
    let mask = selection.mask(params.omega0);
    let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let channels: Vec<Channel> = targets
        .par_iter()
        .map(|&c| run_channel(pairs, &selection.fidelity(c), &mask, params, true))
        .collect::<Result<_>>()?;
    let n = pairs.dim();
    let labels = if n_classes == 2 {
        channels[0].field.iter().map(|&u| usize::from(u > 0.0)).collect()
    } else {
        (0..n)
            .map(|i| {
                (0..n_classes)
                    .max_by(|&a, &b| channels[a].field[i].total_cmp(&channels[b].field[i]))
                    .unwrap()
            })
            .collect()
    };
    Ok(AllenCahnResult {
        labels,
        steps: channels.iter().map(|c| c.steps).collect(),
        converged: channels.iter().all(|c| c.converged),
        fields: channels.into_iter().map(|c| c.field).collect(),
    })
}
