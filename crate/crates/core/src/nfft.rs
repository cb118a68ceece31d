//! Nonequispaced discrete Fourier transforms in one to three dimensions.
//!
//! For nodes `v_j` in the half-open cube `[-1/2, 1/2)^d` and frequencies
//! `l` in `I_N = {-N/2, ..., N/2 - 1}^d` the plan evaluates
//!
//! ```text
//! forward:  f_j    = sum_l fhat_l * exp(+2 pi i l . v_j)
//! adjoint:  fhat_l = sum_j x_j    * exp(-2 pi i l . v_j)
//! ```
//!
//! Both transforms use the gridding construction: the data is convolved with
//! a compactly truncated Kaiser-Bessel window onto an oversampled grid of
//! `n = 2N` points per dimension, transformed with an ordinary FFT, and
//! deconvolved with the window's Fourier transform.
//!
//! With `b = pi (2 - 1/sigma)` and `sigma = n / N` the window pair is
//!
//! ```text
//! phi(x)     = sinh(b sqrt(m^2 - (n x)^2)) / (pi sqrt(m^2 - (n x)^2)),  |n x| <= m
//! phi_hat(k) = I0(m sqrt(b^2 - (2 pi k / n)^2)) / n
//! ```
//!
//! `phi_hat` vanishes for `|2 pi k / n| > b`, so the aliased copies of the
//! frequency band drop out exactly and the only error source is the spatial
//! truncation at `|n x| = m`, which decays like `exp(-b m)`.
//!
//! Frequency arrays are laid out row-major over the dimensions, each
//! coordinate running from `-N/2` to `N/2 - 1`.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, FgsError, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Oversampling factor of the gridding grid.
pub const OVERSAMPLING: usize = 2;
/// FFT lines handled together by one task.
const LINE_BATCH: usize = 16;

/// The frequency lattice `{-N/2, ..., N/2 - 1}^d` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyIndexSet {
    dim: usize,
    bandwidth: usize,
}

impl FrequencyIndexSet {
    pub fn new(dim: usize, bandwidth: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(FgsError::Parameter(format!(
                "dimension must be in 1..={MAX_DIM}, got {dim}"
            )));
        }
        if bandwidth < 2 || !bandwidth.is_multiple_of(2) {
            return Err(FgsError::Parameter(format!(
                "bandwidth must be even and >= 2, got {bandwidth}"
            )));
        }
        Ok(Self { dim, bandwidth })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.bandwidth.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency vector of the `flat`-th entry; unused trailing slots are zero.
    pub fn multi_index(&self, flat: usize) -> [i64; MAX_DIM] {
        let n = self.bandwidth;
        let half = (n / 2) as i64;
        let mut out = [0i64; MAX_DIM];
        let mut rem = flat;
        for t in (0..self.dim).rev() {
            out[t] = (rem % n) as i64 - half;
            rem /= n;
        }
        out
    }

    /// Position of frequency `l` in the row-major layout.
    pub fn flat_index(&self, l: &[i64]) -> Option<usize> {
        if l.len() != self.dim {
            return None;
        }
        let half = (self.bandwidth / 2) as i64;
        let mut flat = 0usize;
        for &lt in l {
            if lt < -half || lt >= half {
                return None;
            }
            flat = flat * self.bandwidth + (lt + half) as usize;
        }
        Some(flat)
    }

    pub fn iter(&self) -> impl Iterator<Item = [i64; MAX_DIM]> + '_ {
        (0..self.len()).map(move |f| self.multi_index(f))
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// The power series has only positive terms, so it keeps full relative
/// accuracy for the arguments the window needs (`m b` stays below ~80).
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Kaiser-Bessel window for a grid of `grid` points and cut-off `cutoff`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KaiserBessel {
    cutoff: f64,
    grid: f64,
    shape: f64,
}

impl KaiserBessel {
    pub(crate) fn new(cutoff: usize, bandwidth: usize, grid: usize) -> Self {
        let sigma = grid as f64 / bandwidth as f64;
        Self {
            cutoff: cutoff as f64,
            grid: grid as f64,
            shape: PI * (2.0 - 1.0 / sigma),
        }
    }

    /// Window value at offset `t` measured in grid cells.
    pub(crate) fn phi_cells(&self, t: f64) -> f64 {
        let s2 = self.cutoff * self.cutoff - t * t;
        if s2 < 0.0 {
            0.0
        } else if s2 == 0.0 {
            self.shape / PI
        } else {
            let s = s2.sqrt();
            (self.shape * s).sinh() / (PI * s)
        }
    }

    /// Continuous Fourier transform of the untruncated window, scaled by the
    /// grid size: `n * phi_hat(k)`.
    pub(crate) fn phi_hat_scaled(&self, k: f64) -> f64 {
        let w = 2.0 * PI * k / self.grid;
        let arg = self.shape * self.shape - w * w;
        if arg <= 0.0 {
            return 0.0;
        }
        bessel_i0(self.cutoff * arg.sqrt())
    }
}

/// Reusable transform plan for a fixed node set.
#[derive(Clone)]
pub struct NfftPlan {
    index_set: FrequencyIndexSet,
    cutoff: usize,
    grid: usize,
    nodes: Vec<f64>,
    /// Wrapped grid index per (node, dim, tap).
    taps_index: Vec<u32>,
    /// Window weight per (node, dim, tap).
    taps_weight: Vec<f64>,
    /// Deconvolution factor per frequency, row-major.
    deconv: Vec<f64>,
    /// Grid position of each frequency, row-major.
    freq_slot: Vec<usize>,
    /// Which grid coordinates carry frequencies (|l| < N/2).
    active: Vec<bool>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    workspace: Workspace,
}

/// Oversampled grid kept between calls; large grids otherwise pay for fresh
/// pages on every transform. Concurrent callers fall back to allocating.
#[derive(Default)]
struct Workspace(Mutex<Vec<Complex64>>);

impl Clone for Workspace {
    fn clone(&self) -> Self {
        Self::default()
    }
}

impl Workspace {
    fn take(&self, len: usize) -> Vec<Complex64> {
        let mut buf = self.0.try_lock().map(|mut g| std::mem::take(&mut *g)).unwrap_or_default();
        buf.clear();
        buf.resize(len, Complex64::new(0.0, 0.0));
        buf
    }

    fn give(&self, buf: Vec<Complex64>) {
        if let Ok(mut g) = self.0.try_lock() {
            *g = buf;
        }
    }
}

impl std::fmt::Debug for NfftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NfftPlan")
            .field("dim", &self.index_set.dim)
            .field("bandwidth", &self.index_set.bandwidth)
            .field("cutoff", &self.cutoff)
            .field("grid", &self.grid)
            .field("nodes", &self.node_count())
            .finish()
    }
}

impl NfftPlan {
    /// Builds a plan for `nodes`, stored row-major as `n x dim`.
    pub fn new(dim: usize, bandwidth: usize, cutoff: usize, nodes: &[f64]) -> Result<Self> {
        let index_set = FrequencyIndexSet::new(dim, bandwidth)?;
        if cutoff == 0 {
            return Err(FgsError::Parameter("window cut-off m must be >= 1".into()));
        }
        if !nodes.len().is_multiple_of(dim) {
            return Err(FgsError::Parameter(format!(
                "node buffer length {} is not a multiple of the dimension {dim}",
                nodes.len()
            )));
        }
        for (i, &x) in nodes.iter().enumerate() {
            if !(-0.5..0.5).contains(&x) {
                return Err(FgsError::Range {
                    index: i / dim,
                    detail: format!("coordinate {x} not in [-1/2, 1/2)"),
                });
            }
        }
        let grid = OVERSAMPLING * bandwidth;
        let window = KaiserBessel::new(cutoff, bandwidth, grid);
        let width = 2 * cutoff + 1;
        let n = nodes.len() / dim;

        let mut taps_index = Vec::with_capacity(n * dim * width);
        let mut taps_weight = Vec::with_capacity(n * dim * width);
        let gridf = grid as f64;
        for &x in nodes {
            let scaled = x * gridf;
            let start = scaled.floor() as i64 - cutoff as i64;
            for tap in 0..width as i64 {
                let u = start + tap;
                taps_index.push(u.rem_euclid(grid as i64) as u32);
                taps_weight.push(window.phi_cells(scaled - u as f64));
            }
        }

        let half = (bandwidth / 2) as i64;
        let per_axis: Vec<f64> = (-half..half)
            .map(|l| window.phi_hat_scaled(l as f64))
            .collect();
        let mut deconv = Vec::with_capacity(index_set.len());
        let mut freq_slot = Vec::with_capacity(index_set.len());
        for l in index_set.iter() {
            let mut c = 1.0;
            let mut slot = 0usize;
            for &lt in &l[..dim] {
                c *= per_axis[(lt + half) as usize];
                slot = slot * grid + lt.rem_euclid(grid as i64) as usize;
            }
            deconv.push(c);
            freq_slot.push(slot);
        }
        let mut active = vec![false; grid];
        for l in -half..half {
            active[l.rem_euclid(grid as i64) as usize] = true;
        }

        let mut planner = FftPlanner::new();
        Ok(Self {
            index_set,
            cutoff,
            grid,
            nodes: nodes.to_vec(),
            taps_index,
            taps_weight,
            deconv,
            freq_slot,
            active,
            fft_forward: planner.plan_fft_forward(grid),
            fft_inverse: planner.plan_fft_inverse(grid),
            workspace: Workspace::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.index_set.bandwidth
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn index_set(&self) -> FrequencyIndexSet {
        self.index_set
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() / self.index_set.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Taps per dimension; indices wrap, so windows wider than the grid
    /// accumulate their periodic images.
    fn width(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// `f_j = sum_l fhat_l exp(2 pi i l . v_j)` for every node.
    pub fn forward(&self, fhat: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.index_set.len(), fhat.len())?;
        let mut grid = self.workspace.take(self.grid.pow(self.dim() as u32));
        for ((&value, &c), &slot) in fhat.iter().zip(&self.deconv).zip(&self.freq_slot) {
            grid[slot] = value / c;
        }
        self.transform_grid(&mut grid, true);

        let mut out = vec![Complex64::new(0.0, 0.0); self.node_count()];
        out.par_iter_mut()
            .with_min_len(256)
            .enumerate()
            .for_each(|(j, o)| *o = self.gather(&grid, j));
        self.workspace.give(grid);
        Ok(out)
    }

    /// `fhat_l = sum_j x_j exp(-2 pi i l . v_j)` for every frequency.
    pub fn adjoint(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.node_count(), x.len())?;
        let mut grid = self.workspace.take(self.grid.pow(self.dim() as u32));
        for (j, &xj) in x.iter().enumerate() {
            self.scatter(&mut grid, j, xj);
        }
        self.transform_grid(&mut grid, false);
        let fhat = self
            .freq_slot
            .iter()
            .zip(&self.deconv)
            .map(|(&slot, &c)| grid[slot] / c)
            .collect();
        self.workspace.give(grid);
        Ok(fhat)
    }

    /// Forward transform of real coefficients, returning real parts.
    pub fn forward_real(&self, fhat: &[f64]) -> Result<Vec<f64>> {
        let c: Vec<Complex64> = fhat.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.forward(&c)?.into_iter().map(|z| z.re).collect())
    }

    fn gather(&self, grid: &[Complex64], j: usize) -> Complex64 {
        let d = self.dim();
        let w = self.width();
        let base = j * d * w;
        let idx = &self.taps_index[base..base + d * w];
        let wt = &self.taps_weight[base..base + d * w];
        let g = self.grid;
        let mut acc = Complex64::new(0.0, 0.0);
        match d {
            1 => {
                for a in 0..w {
                    acc += grid[idx[a] as usize] * wt[a];
                }
            }
            2 => {
                for a in 0..w {
                    let row = idx[a] as usize * g;
                    let mut inner = Complex64::new(0.0, 0.0);
                    for b in 0..w {
                        inner += grid[row + idx[w + b] as usize] * wt[w + b];
                    }
                    acc += inner * wt[a];
                }
            }
            _ => {
                for a in 0..w {
                    let plane = idx[a] as usize * g * g;
                    let mut mid = Complex64::new(0.0, 0.0);
                    for b in 0..w {
                        let row = plane + idx[w + b] as usize * g;
                        let mut inner = Complex64::new(0.0, 0.0);
                        for c in 0..w {
                            inner += grid[row + idx[2 * w + c] as usize] * wt[2 * w + c];
                        }
                        mid += inner * wt[w + b];
                    }
                    acc += mid * wt[a];
                }
            }
        }
        acc
    }

    fn scatter(&self, grid: &mut [Complex64], j: usize, value: Complex64) {
        let d = self.dim();
        let w = self.width();
        let base = j * d * w;
        let idx = &self.taps_index[base..base + d * w];
        let wt = &self.taps_weight[base..base + d * w];
        let g = self.grid;
        match d {
            1 => {
                for a in 0..w {
                    grid[idx[a] as usize] += value * wt[a];
                }
            }
            2 => {
                for a in 0..w {
                    let row = idx[a] as usize * g;
                    let va = value * wt[a];
                    for b in 0..w {
                        grid[row + idx[w + b] as usize] += va * wt[w + b];
                    }
                }
            }
            _ => {
                for a in 0..w {
                    let plane = idx[a] as usize * g * g;
                    let va = value * wt[a];
                    for b in 0..w {
                        let row = plane + idx[w + b] as usize * g;
                        let vb = va * wt[w + b];
                        for c in 0..w {
                            grid[row + idx[2 * w + c] as usize] += vb * wt[2 * w + c];
                        }
                    }
                }
            }
        }
    }

    /// Multi-dimensional FFT on the oversampled grid, skipping lines that
    /// only touch grid coordinates outside the frequency band.
    ///
    /// `inverse == true` runs the exp(+) transform (forward NFFT, whose input
    /// lives in the band, axes first to last); otherwise the exp(-) transform
    /// (adjoint NFFT, whose output is read in the band, axes last to first).
    /// In both orders a line along axis `t` is needed only when all its
    /// coordinates on axes `> t` are in the band, so the strided axes are the
    /// ones that get pruned.
    fn transform_grid(&self, grid: &mut [Complex64], inverse: bool) {
        let d = self.dim();
        let axes: Vec<usize> = if inverse {
            (0..d).collect()
        } else {
            (0..d).rev().collect()
        };
        for t in axes {
            self.transform_axis(grid, t, inverse);
        }
    }

    fn transform_axis(&self, grid: &mut [Complex64], axis: usize, inverse: bool) {
        let d = self.dim();
        let g = self.grid;
        let fft = if inverse {
            &self.fft_inverse
        } else {
            &self.fft_forward
        };
        let zero = Complex64::new(0.0, 0.0);
        let inner = g.pow((d - 1 - axis) as u32);
        if inner == 1 {
            grid.par_chunks_mut(g * LINE_BATCH).for_each_init(
                || vec![zero; fft.get_inplace_scratch_len()],
                |scratch, rows| fft.process_with_scratch(rows, scratch),
            );
            return;
        }
        let active = &self.active;
        let needed = |mut i: usize| {
            for _ in axis + 1..d {
                if !active[i % g] {
                    return false;
                }
                i /= g;
            }
            true
        };
        let tile = LINE_BATCH.min(inner);
        let tiles: Vec<usize> = (0..inner.div_ceil(tile))
            .filter(|&t| (t * tile..inner.min((t + 1) * tile)).any(needed))
            .collect();
        grid.par_chunks_mut(g * inner).for_each(|chunk| {
            // Copy tiles of adjacent columns into contiguous rows, transform
            // them together, and copy back.
            let src: &[Complex64] = chunk;
            let done: Vec<Vec<Complex64>> = tiles
                .par_iter()
                .map_init(
                    || vec![zero; fft.get_inplace_scratch_len()],
                    |scratch, &t| {
                        let c0 = t * tile;
                        let w = tile.min(inner - c0);
                        let mut buf = vec![zero; g * w];
                        for k in 0..g {
                            let row = &src[k * inner + c0..k * inner + c0 + w];
                            for (i, &v) in row.iter().enumerate() {
                                buf[i * g + k] = v;
                            }
                        }
                        fft.process_with_scratch(&mut buf, scratch);
                        buf
                    },
                )
                .collect();
            for (&t, buf) in tiles.iter().zip(&done) {
                let c0 = t * tile;
                let w = buf.len() / g;
                for k in 0..g {
                    let row = &mut chunk[k * inner + c0..k * inner + c0 + w];
                    for (i, v) in row.iter_mut().enumerate() {
                        *v = buf[i * g + k];
                    }
                }
            }
        });
    }
}

/// A-priori bound on `max_j |forward(f)_j - direct(f)_j| / ||f||_1` for the
/// Kaiser-Bessel window at oversampling 2:
/// `4 pi (sqrt(m) + m) (1 - 1/s^2)^{1/4} exp(-2 pi m sqrt(1 - 1/s))`.
pub fn window_error_estimate(cutoff: usize) -> f64 {
    let m = cutoff as f64;
    let s = OVERSAMPLING as f64;
    4.0 * PI * (m.sqrt() + m) * (1.0 - 1.0 / (s * s)).powf(0.25) * (-2.0 * PI * m * (1.0 - 1.0 / s).sqrt()).exp()
}

/// Unnormalized full `d`-dimensional FFT of an `n^d` row-major array.
/// `inverse` selects the exp(+) sign.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim {
        let inner = n.pow((dim - 1 - axis) as u32);
        for chunk in data.chunks_exact_mut(n * inner) {
            for i in 0..inner {
                for k in 0..n {
                    line[k] = chunk[k * inner + i];
                }
                fft.process(&mut line);
                for k in 0..n {
                    chunk[k * inner + i] = line[k];
                }
            }
        }
    }
}

/// Exact `O(n N^d)` evaluation of the forward sum.
pub fn direct_ndft(dim: usize, bandwidth: usize, nodes: &[f64], fhat: &[Complex64]) -> Result<Vec<Complex64>> {
    let set = FrequencyIndexSet::new(dim, bandwidth)?;
    check_len(set.len(), fhat.len())?;
    Ok(nodes
        .chunks_exact(dim)
        .map(|v| {
            set.iter()
                .zip(fhat)
                .map(|(l, &c)| c * phase(&l[..dim], v, 1.0))
                .sum()
        })
        .collect())
}

/// Exact `O(n N^d)` evaluation of the adjoint sum.
pub fn direct_adjoint_ndft(dim: usize, bandwidth: usize, nodes: &[f64], x: &[Complex64]) -> Result<Vec<Complex64>> {
    let set = FrequencyIndexSet::new(dim, bandwidth)?;
    check_len(nodes.len() / dim, x.len())?;
    Ok(set
        .iter()
        .map(|l| {
            nodes
                .chunks_exact(dim)
                .zip(x)
                .map(|(v, &c)| c * phase(&l[..dim], v, -1.0))
                .sum()
        })
        .collect())
}

fn phase(l: &[i64], v: &[f64], sign: f64) -> Complex64 {
    let dot: f64 = l.iter().zip(v).map(|(&a, &b)| a as f64 * b).sum();
    Complex64::from_polar(1.0, sign * 2.0 * PI * dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_nodes(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f64> {
        (0..n * d).map(|_| rng.random_range(-0.5..0.5)).collect()
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn l1(a: &[Complex64]) -> f64 {
        a.iter().map(|z| z.norm()).sum()
    }

    #[test]
    fn bessel_i0_reference_values() {
        // Abramowitz & Stegun table 9.8.
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-16);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i0(5.0) / 27.239_871_823_604_44 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn window_transform_matches_quadrature() {
        // Trapezoidal quadrature of the truncated window against the closed form.
        let kb = KaiserBessel::new(8, 16, 32);
        let steps = 40_000;
        let h = 16.0 / steps as f64; // t in [-8, 8] grid cells
        for k in [0.0, 3.0, 7.0] {
            let mut acc = 0.0;
            for i in 0..=steps {
                let t = -8.0 + i as f64 * h;
                let wgt = if i == 0 || i == steps { 0.5 } else { 1.0 };
                acc += wgt * kb.phi_cells(t) * (2.0 * PI * k * t / 32.0).cos();
            }
            let quad = acc * h; // = n * phi_hat(k) since dx = dt / n
            let closed = kb.phi_hat_scaled(k);
            assert!((quad / closed - 1.0).abs() < 1e-9, "k={k}: {quad} vs {closed}");
        }
    }

    #[test]
    fn index_set_layout() {
        let set = FrequencyIndexSet::new(2, 4).unwrap();
        assert_eq!(set.len(), 16);
        assert_eq!(set.multi_index(0), [-2, -2, 0]);
        assert_eq!(set.multi_index(1), [-2, -1, 0]);
        assert_eq!(set.multi_index(15), [1, 1, 0]);
        assert_eq!(set.flat_index(&[0, 0]), Some(10));
        assert_eq!(set.flat_index(&[2, 0]), None);
        assert!(FrequencyIndexSet::new(1, 3).is_err());
        assert!(FrequencyIndexSet::new(4, 4).is_err());
    }

    #[test]
    fn smallest_plan() {
        let plan = NfftPlan::new(1, 2, 2, &[0.0]).unwrap();
        let set = plan.index_set();
        assert_eq!(set.iter().map(|l| l[0]).collect::<Vec<_>>(), vec![-1, 0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            NfftPlan::new(1, 8, 2, &[0.5]),
            Err(FgsError::Range { index: 0, .. })
        ));
        assert!(matches!(NfftPlan::new(1, 7, 2, &[0.0]), Err(FgsError::Parameter(_))));
        let plan = NfftPlan::new(1, 8, 2, &[0.0, 0.1]).unwrap();
        assert!(matches!(plan.forward(&[Complex64::new(1.0, 0.0); 7]), Err(FgsError::Shape { .. })));
        assert!(matches!(plan.adjoint(&[Complex64::new(1.0, 0.0); 3]), Err(FgsError::Shape { .. })));
    }

    #[test]
    fn setup1_geometry_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nodes = random_nodes(&mut rng, 100, 2);
        assert!(NfftPlan::new(2, 16, 2, &nodes).is_ok());
    }

    #[test]
    fn constant_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nodes = random_nodes(&mut rng, 40, 2);
        let plan = NfftPlan::new(2, 8, 8, &nodes).unwrap();
        let mut fhat = vec![Complex64::new(0.0, 0.0); 64];
        let c = Complex64::new(0.7, -0.2);
        fhat[plan.index_set().flat_index(&[0, 0]).unwrap()] = c;
        for v in plan.forward(&fhat).unwrap() {
            assert!((v - c).norm() < 1e-13);
        }
    }

    #[test]
    fn single_node_at_origin() {
        let plan = NfftPlan::new(1, 8, 8, &[0.0]).unwrap();
        for c in plan.adjoint(&[Complex64::new(1.0, 0.0)]).unwrap() {
            assert!((c - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn forward_and_adjoint_match_direct_sums_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let nodes = random_nodes(&mut rng, 16, 1);
        let plan = NfftPlan::new(1, 8, 8, &nodes).unwrap();
        let fhat = random_complex(&mut rng, 8);
        let fast = plan.forward(&fhat).unwrap();
        let exact = direct_ndft(1, 8, &nodes, &fhat).unwrap();
        assert!(max_dev(&fast, &exact) <= 1e-12 * l1(&fhat));

        let x = random_complex(&mut rng, 16);
        let fast = plan.adjoint(&x).unwrap();
        let exact = direct_adjoint_ndft(1, 8, &nodes, &x).unwrap();
        assert!(max_dev(&fast, &exact) <= 1e-12 * l1(&x));
    }

    #[test]
    fn equispaced_nodes_reduce_to_inverse_dft() {
        // Nodes j/N map the forward sum to an ordinary inverse DFT of length N.
        let n = 16usize;
        let nodes: Vec<f64> = (0..n).map(|j| j as f64 / n as f64 - 0.5).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fhat = random_complex(&mut rng, n);
        let plan = NfftPlan::new(1, n, 8, &nodes).unwrap();
        let fast = plan.forward(&fhat).unwrap();

        // f(j/N - 1/2) = sum_l fhat_l e^{2 pi i l j / N} (-1)^l, with l = k - N/2.
        let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
        for (k, &c) in fhat.iter().enumerate() {
            let l = k as i64 - (n / 2) as i64;
            let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[l.rem_euclid(n as i64) as usize] = c * sign;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        assert!(max_dev(&fast, &buf) <= 1e-12 * l1(&fhat));
    }

    #[test]
    fn accuracy_improves_with_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let nodes = random_nodes(&mut rng, 64, 2);
        let fhat = random_complex(&mut rng, 256);
        let exact = direct_ndft(2, 16, &nodes, &fhat).unwrap();
        let errs: Vec<f64> = [2, 4, 8]
            .iter()
            .map(|&m| {
                let plan = NfftPlan::new(2, 16, m, &nodes).unwrap();
                max_dev(&plan.forward(&fhat).unwrap(), &exact)
            })
            .collect();
        assert!(errs[1] <= errs[0] && errs[2] <= errs[1], "{errs:?}");
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let nodes = random_nodes(&mut rng, 30, 3);
        let plan = NfftPlan::new(3, 8, 4, &nodes).unwrap();
        let f = random_complex(&mut rng, 512);
        let g = random_complex(&mut rng, 512);
        let (a, b) = (Complex64::new(0.3, 1.1), Complex64::new(-2.0, 0.5));
        let combo: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = plan.forward(&combo).unwrap();
        let ff = plan.forward(&f).unwrap();
        let fg = plan.forward(&g).unwrap();
        for ((l, x), y) in lhs.iter().zip(&ff).zip(&fg) {
            assert!((l - (a * x + b * y)).norm() < 1e-11);
        }
    }

    #[test]
    fn deterministic_repeat() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let nodes = random_nodes(&mut rng, 500, 3);
        let plan = NfftPlan::new(3, 16, 3, &nodes).unwrap();
        let x = random_complex(&mut rng, 500);
        assert_eq!(plan.adjoint(&x).unwrap(), plan.adjoint(&x).unwrap());
        let f = random_complex(&mut rng, 4096);
        assert_eq!(plan.forward(&f).unwrap(), plan.forward(&f).unwrap());
    }
}
