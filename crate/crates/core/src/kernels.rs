//! Radial kernels, their periodic regularization, and trigonometric
//! approximation.
//!
//! A radial kernel `K(y) = k(|y|)` is made 1-periodic and smooth by keeping
//! it unchanged for `|y| <= 1/2 - eps_b`, blending it into a constant with a
//! polynomial `T_B` on `1/2 - eps_b < |y| <= 1/2`, and holding `T_B(1/2)`
//! beyond. The blend polynomial has degree `2p - 1` and satisfies
//!
//! ```text
//! T_B^(j)(1/2 - eps_b) = k^(j)(1/2 - eps_b),  j = 0..p-1
//! T_B^(j)(1/2)         = 0,                   j = 1..p
//! ```
//!
//! so the regularized kernel is `p - 1` times continuously differentiable
//! across both the inner radius and the sphere `|y| = 1/2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{FgsError, Result};
use crate::nfft::{fft_nd, FrequencyIndexSet};

/// Largest supported regularization order.
pub const MAX_SMOOTHNESS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `exp(-r^2 / sigma^2)`
    Gaussian,
    /// `exp(-r / sigma)`
    LaplacianRbf,
    /// `sqrt(r^2 + c^2)`
    Multiquadric,
    /// `1 / sqrt(r^2 + c^2)`
    InverseMultiquadric,
}

impl std::str::FromStr for KernelFamily {
    type Err = FgsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "laplacian-rbf" => Ok(Self::LaplacianRbf),
            "multiquadric" => Ok(Self::Multiquadric),
            "inv-multiquadric" | "inverse-multiquadric" => Ok(Self::InverseMultiquadric),
            other => Err(FgsError::Parameter(format!("unknown kernel '{other}'"))),
        }
    }
}

/// A rotation-invariant kernel with its shape parameter (`sigma` or `c`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub param: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, param: f64) -> Result<Self> {
        if !(param > 0.0 && param.is_finite()) {
            return Err(FgsError::Parameter(format!(
                "kernel parameter must be positive and finite, got {param}"
            )));
        }
        Ok(Self { family, param })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, sigma)
    }

    pub fn laplacian_rbf(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::LaplacianRbf, sigma)
    }

    pub fn multiquadric(c: f64) -> Result<Self> {
        Self::new(KernelFamily::Multiquadric, c)
    }

    pub fn inverse_multiquadric(c: f64) -> Result<Self> {
        Self::new(KernelFamily::InverseMultiquadric, c)
    }

    /// Same family, different shape parameter.
    pub fn with_param(&self, param: f64) -> Self {
        Self {
            family: self.family,
            param,
        }
    }

    /// Checked radial evaluation.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(FgsError::Parameter(format!("radius must be >= 0, got {r}")));
        }
        Ok(self.radial(r))
    }

    #[inline]
    pub fn radial(&self, r: f64) -> f64 {
        let s = self.param;
        match self.family {
            KernelFamily::Gaussian => (-(r * r) / (s * s)).exp(),
            KernelFamily::LaplacianRbf => (-r / s).exp(),
            KernelFamily::Multiquadric => (r * r + s * s).sqrt(),
            KernelFamily::InverseMultiquadric => 1.0 / (r * r + s * s).sqrt(),
        }
    }

    /// Kernel value at a difference vector `y`.
    #[inline]
    pub fn at(&self, y: &[f64]) -> f64 {
        self.radial(y.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `K(a - b)` for two points.
    #[inline]
    pub fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.radial(r2.sqrt())
    }

    /// Taylor coefficients `k^(j)(r0) / j!` for `j = 0..=order`.
    pub fn radial_taylor(&self, r0: f64, order: usize) -> Vec<f64> {
        let s = self.param;
        let len = order + 1;
        match self.family {
            KernelFamily::Gaussian => {
                let u = Jet::from_poly(&[-(r0 * r0) / (s * s), -2.0 * r0 / (s * s), -1.0 / (s * s)], len);
                u.exp().0
            }
            KernelFamily::LaplacianRbf => Jet::from_poly(&[-r0 / s, -1.0 / s], len).exp().0,
            KernelFamily::Multiquadric => {
                Jet::from_poly(&[r0 * r0 + s * s, 2.0 * r0, 1.0], len).powf(0.5).0
            }
            KernelFamily::InverseMultiquadric => {
                Jet::from_poly(&[r0 * r0 + s * s, 2.0 * r0, 1.0], len).powf(-0.5).0
            }
        }
    }
}

/// Truncated power series in `h`, used for exact radial derivatives.
#[derive(Debug, Clone)]
struct Jet(Vec<f64>);

impl Jet {
    fn from_poly(coeffs: &[f64], len: usize) -> Self {
        let mut v = vec![0.0; len];
        for (dst, &c) in v.iter_mut().zip(coeffs) {
            *dst = c;
        }
        Jet(v)
    }

    fn exp(&self) -> Self {
        let f = &self.0;
        let mut g = vec![0.0; f.len()];
        g[0] = f[0].exp();
        for k in 1..f.len() {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * f[j] * g[k - j];
            }
            g[k] = acc / k as f64;
        }
        Jet(g)
    }

    /// `f^alpha` for a series with nonzero constant term.
    fn powf(&self, alpha: f64) -> Self {
        let f = &self.0;
        let mut g = vec![0.0; f.len()];
        g[0] = f[0].powf(alpha);
        for k in 1..f.len() {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((alpha + 1.0) * j as f64 - k as f64) * f[j] * g[k - j];
            }
            g[k] = acc / (k as f64 * f[0]);
        }
        Jet(g)
    }
}

/// Polynomial in the normalized variable `u = (r - center) / half_width`,
/// which maps the blend interval onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BlendPolynomial {
    pub center: f64,
    pub half_width: f64,
    /// Coefficient of `u^k` at index `k`.
    pub coeffs: Vec<f64>,
}

impl BlendPolynomial {
    pub fn eval(&self, r: f64) -> f64 {
        let u = (r - self.center) / self.half_width;
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// `order`-th derivative with respect to `r`.
    pub fn derivative(&self, r: f64, order: usize) -> f64 {
        let u = (r - self.center) / self.half_width;
        let mut acc = 0.0;
        for k in (order..self.coeffs.len()).rev() {
            acc = acc * u + self.coeffs[k] * falling(k, order);
        }
        acc / self.half_width.powi(order as i32)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// `k! / (k - j)!`
fn falling(k: usize, j: usize) -> f64 {
    ((k - j + 1)..=k).map(|v| v as f64).product()
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|v| v as f64).product()
}

/// Blend polynomial of degree `2p - 1` joining the kernel at `1/2 - eps_b`
/// to a flat tail at `1/2`.
pub fn two_point_taylor(spec: &KernelSpec, eps_b: f64, p: usize) -> Result<BlendPolynomial> {
    if !(eps_b > 0.0 && eps_b < 0.5) {
        return Err(FgsError::Parameter(format!(
            "eps_b must lie in (0, 1/2), got {eps_b}"
        )));
    }
    if p == 0 || p > MAX_SMOOTHNESS {
        return Err(FgsError::Parameter(format!(
            "smoothness p must be in 1..={MAX_SMOOTHNESS}, got {p}"
        )));
    }
    let inner = 0.5 - eps_b;
    let center = 0.5 - 0.5 * eps_b;
    let h = 0.5 * eps_b;
    let size = 2 * p;
    let taylor = spec.radial_taylor(inner, p - 1);

    // Derivative conditions in u: d^j/du^j T = h^j d^j/dr^j T, at u = -1 and u = 1.
    let mut mat = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    let mut fill = |row: usize, u: f64, j: usize| {
        for k in j..size {
            mat[(row, k)] = falling(k, j) * u.powi((k - j) as i32);
        }
    };
    for j in 0..p {
        fill(j, -1.0, j);
        rhs[j] = taylor[j] * factorial(j) * h.powi(j as i32);
    }
    for j in 1..=p {
        fill(p + j - 1, 1.0, j);
    }

    let coeffs = mat.clone().lu().solve(&rhs).ok_or_else(|| {
        FgsError::Conditioning(format!("two-point Taylor system singular (eps_b={eps_b}, p={p})"))
    })?;
    let residual = (&mat * &coeffs - &rhs).amax();
    let scale = mat.amax() * coeffs.amax() + rhs.amax();
    if !residual.is_finite() || residual > 1e-10 * scale {
        return Err(FgsError::Conditioning(format!(
            "two-point Taylor system ill-conditioned (residual {residual:e})"
        )));
    }
    Ok(BlendPolynomial {
        center,
        half_width: h,
        coeffs: coeffs.iter().copied().collect(),
    })
}

/// The kernel made smooth and constant near the periodization boundary.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegularizedKernel {
    pub base: KernelSpec,
    pub eps_b: f64,
    pub p: usize,
    /// `None` when `eps_b == 0`: the kernel is cut at `1/2` without blending.
    pub blend: Option<BlendPolynomial>,
}

impl RegularizedKernel {
    pub fn new(base: KernelSpec, eps_b: f64, p: usize) -> Result<Self> {
        if eps_b == 0.0 {
            return Ok(Self {
                base,
                eps_b,
                p,
                blend: None,
            });
        }
        let blend = two_point_taylor(&base, eps_b, p)?;
        Ok(Self {
            base,
            eps_b,
            p,
            blend: Some(blend),
        })
    }

    /// Radius up to which the regularized kernel equals the original.
    pub fn inner_radius(&self) -> f64 {
        0.5 - self.eps_b
    }

    /// Constant value taken outside the ball of radius `1/2`.
    pub fn tail(&self) -> f64 {
        match &self.blend {
            Some(t) => t.eval(0.5),
            None => self.base.radial(0.5),
        }
    }

    pub fn radial(&self, r: f64) -> f64 {
        if r <= self.inner_radius() {
            self.base.radial(r)
        } else if r <= 0.5 {
            match &self.blend {
                Some(t) => t.eval(r),
                None => self.base.radial(r),
            }
        } else {
            self.tail()
        }
    }

    pub fn at(&self, y: &[f64]) -> f64 {
        self.radial(y.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

/// Fourier coefficients of the trigonometric approximant to a regularized
/// kernel, in row-major frequency order.
#[derive(Debug, Clone)]
pub struct KernelCoefficients {
    pub index_set: FrequencyIndexSet,
    pub values: Vec<Complex64>,
    pub eps_b: f64,
    pub p: usize,
}

impl KernelCoefficients {
    pub fn bandwidth(&self) -> usize {
        self.index_set.bandwidth()
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    /// Direct evaluation of `sum_l b_l exp(2 pi i l . y)`.
    pub fn evaluate(&self, y: &[f64]) -> Complex64 {
        let d = self.dim();
        let n = self.bandwidth();
        let half = (n / 2) as i64;
        let phases: Vec<Vec<Complex64>> = y[..d]
            .iter()
            .map(|&yt| {
                (-half..half)
                    .map(|l| Complex64::from_polar(1.0, 2.0 * PI * l as f64 * yt))
                    .collect()
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        match d {
            1 => {
                for (c, ph) in self.values.iter().zip(&phases[0]) {
                    acc += c * ph;
                }
            }
            2 => {
                for (a, row) in self.values.chunks_exact(n).enumerate() {
                    let inner: Complex64 = row.iter().zip(&phases[1]).map(|(c, p)| c * p).sum();
                    acc += inner * phases[0][a];
                }
            }
            _ => {
                for (a, plane) in self.values.chunks_exact(n * n).enumerate() {
                    let mut mid = Complex64::new(0.0, 0.0);
                    for (b, row) in plane.chunks_exact(n).enumerate() {
                        let inner: Complex64 = row.iter().zip(&phases[2]).map(|(c, p)| c * p).sum();
                        mid += inner * phases[1][b];
                    }
                    acc += mid * phases[0][a];
                }
            }
        }
        acc
    }
}

/// `b_l = N^{-d} sum_{j in I_N} K_R(j/N) exp(-2 pi i j . l / N)` via one FFT.
pub fn kernel_fourier_coefficients(kr: &RegularizedKernel, bandwidth: usize, dim: usize) -> Result<KernelCoefficients> {
    let index_set = FrequencyIndexSet::new(dim, bandwidth)?;
    let n = bandwidth;
    let total = index_set.len();
    // Samples placed at the wrapped position of j, so a plain FFT applies.
    let mut grid = vec![Complex64::new(0.0, 0.0); total];
    let mut y = [0.0; 3];
    for j in index_set.iter() {
        let mut slot = 0usize;
        for t in 0..dim {
            y[t] = j[t] as f64 / n as f64;
            slot = slot * n + j[t].rem_euclid(n as i64) as usize;
        }
        grid[slot] = Complex64::new(kr.at(&y[..dim]), 0.0);
    }
    fft_nd(&mut grid, n, dim, false);
    let scale = 1.0 / total as f64;
    let values = index_set
        .iter()
        .map(|l| {
            let mut slot = 0usize;
            for &lt in &l[..dim] {
                slot = slot * n + lt.rem_euclid(n as i64) as usize;
            }
            grid[slot] * scale
        })
        .collect();
    Ok(KernelCoefficients {
        index_set,
        values,
        eps_b: kr.eps_b,
        p: kr.p,
    })
}

/// Sampled estimate of `max_{|y| <= 1/2 - eps_b} |K(y) - K_RF(y)|`.
///
/// Sample points are drawn sequentially from `seed`, so a smaller
/// `sample_count` evaluates a prefix of the larger sample.
pub fn kernel_approx_error(spec: &KernelSpec, coeffs: &KernelCoefficients, sample_count: usize, seed: u64) -> f64 {
    let d = coeffs.dim();
    let radius = 0.5 - coeffs.eps_b;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<[f64; 3]> = (0..sample_count)
        .map(|_| {
            let mut dir = [0.0; 3];
            let mut norm = 0.0;
            while norm < 1e-12 {
                norm = 0.0;
                for v in dir.iter_mut().take(d) {
                    *v = rng.sample::<f64, _>(StandardNormal);
                    norm += *v * *v;
                }
                norm = norm.sqrt();
            }
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            for v in dir.iter_mut().take(d) {
                *v *= r / norm;
            }
            dir
        })
        .collect();
    samples
        .par_iter()
        .map(|y| (spec.at(&y[..d]) - coeffs.evaluate(&y[..d]).re).abs())
        .reduce(|| 0.0, f64::max)
}
