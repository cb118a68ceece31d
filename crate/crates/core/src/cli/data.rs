//! Point clouds: synthetic generators and CSV IO.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{FgsError, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PointCloud {
    pub dim: usize,
    /// Row-major `n x dim`.
    pub coords: Vec<f64>,
    pub labels: Option<Vec<usize>>,
    /// Generator name with its seed, or the source path.
    pub provenance: String,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, labels: Option<Vec<usize>>, provenance: impl Into<String>) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(FgsError::Parameter(format!("{} coordinates do not form rows of {dim}", coords.len())));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(FgsError::Range {
                index: i / dim,
                detail: "non-finite coordinate".into(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != coords.len() / dim {
                return Err(FgsError::Shape {
                    expected: coords.len() / dim,
                    got: l.len(),
                });
            }
        }
        Ok(Self {
            dim,
            coords,
            labels,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_classes(&self) -> usize {
        self.labels.as_ref().and_then(|l| l.iter().max()).map_or(0, |m| m + 1)
    }

    /// Relabels every point by its nearest center (row-major `centers`).
    pub fn relabel_nearest(&mut self, centers: &[f64]) {
        let dim = self.dim;
        let labels = self
            .coords
            .chunks_exact(dim)
            .map(|p| {
                centers
                    .chunks_exact(dim)
                    .map(|c| p.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(j, _)| j)
                    .unwrap_or(0)
            })
            .collect();
        self.labels = Some(labels);
    }
}

fn spiral_point(c: usize, classes: usize, t: f64, h: f64, r: f64) -> [f64; 3] {
    let theta = 2.0 * PI * (t + c as f64 / classes as f64);
    [t * r * theta.cos(), t * r * theta.sin(), h * t]
}

/// Interleaved 3-D spirals: class `c` at `(t r cos θ, t r sin θ, h t)` with
/// `θ = 2π(t + c/C)`, `t ~ U(0, 1]`, plus Gaussian jitter of std `0.1 r`.
pub fn gen_spiral(classes: usize, per_class: usize, h: f64, r: f64, seed: u64) -> Result<PointCloud> {
    if classes == 0 || per_class == 0 {
        return Err(FgsError::Parameter("spiral needs classes >= 1 and per_class >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.1 * r.abs()).map_err(|e| FgsError::Parameter(e.to_string()))?;
    let mut coords = Vec::with_capacity(classes * per_class * 3);
    let mut labels = Vec::with_capacity(classes * per_class);
    for c in 0..classes {
        for _ in 0..per_class {
            let t = 1.0 - rng.random::<f64>();
            for v in spiral_point(c, classes, t, h, r) {
                coords.push(v + jitter.sample(&mut rng));
            }
            labels.push(c);
        }
    }
    PointCloud::new(3, coords, Some(labels), format!("spiral(classes={classes}, per_class={per_class}, h={h}, r={r}, seed={seed})"))
}

/// One point per class on its spiral arm, at evenly spaced heights
/// `t = (2c + 1) / (2C)`.
pub fn spiral_centers(classes: usize, h: f64, r: f64) -> Vec<f64> {
    (0..classes)
        .flat_map(|c| spiral_point(c, classes, (2 * c + 1) as f64 / (2 * classes) as f64, h, r))
        .collect()
}

/// Full moon (class 0, disk of radius `r1` at the origin) inside the lower
/// half annulus `r2 <= |x| <= r3` (class 1), in a 1:3 ratio.
pub fn gen_crescent_fullmoon(n: usize, r1: f64, r2: f64, r3: f64, seed: u64) -> Result<PointCloud> {
    if n < 4 || !(r1 > 0.0 && r2 >= 0.0 && r3 > r2) {
        return Err(FgsError::Parameter(format!("crescent-fullmoon needs n >= 4 and 0 <= r2 < r3, r1 > 0 (n={n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_moon = n / 4;
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (radius, phi, label) = if i < n_moon {
            (r1 * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>(), 0)
        } else {
            let u = rng.random::<f64>();
            ((r2 * r2 + u * (r3 * r3 - r2 * r2)).sqrt(), PI + PI * rng.random::<f64>(), 1)
        };
        coords.push(radius * phi.cos());
        coords.push(radius * phi.sin());
        labels.push(label);
    }
    PointCloud::new(2, coords, Some(labels), format!("crescent-fullmoon(n={n}, r1={r1}, r2={r2}, r3={r3}, seed={seed})"))
}

/// Two interleaving half circles with Gaussian noise, classes 0 and 1.
pub fn gen_two_moons(n: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    if n < 2 || !(noise >= 0.0) {
        return Err(FgsError::Parameter("two-moons needs n >= 2 and noise >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, noise).map_err(|e| FgsError::Parameter(e.to_string()))?;
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let a = PI * rng.random::<f64>();
        let (x, y, l) = if i % 2 == 0 {
            (a.cos(), a.sin(), 0)
        } else {
            (1.0 - a.cos(), 0.5 - a.sin(), 1)
        };
        coords.push(x + jitter.sample(&mut rng));
        coords.push(y + jitter.sample(&mut rng));
        labels.push(l);
    }
    PointCloud::new(2, coords, Some(labels), format!("two-moons(n={n}, noise={noise}, seed={seed})"))
}

/// Isotropic Gaussian blobs, `per_blob` points around each center.
pub fn gen_blobs(centers: &[f64], dim: usize, per_blob: usize, std: f64, seed: u64) -> Result<PointCloud> {
    if dim == 0 || !centers.len().is_multiple_of(dim) || !(std >= 0.0) {
        return Err(FgsError::Parameter("blobs need whole center rows and std >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, std).map_err(|e| FgsError::Parameter(e.to_string()))?;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.chunks_exact(dim).enumerate() {
        for _ in 0..per_blob {
            coords.extend(center.iter().map(|v| v + jitter.sample(&mut rng)));
            labels.push(c);
        }
    }
    PointCloud::new(dim, coords, Some(labels), format!("blobs(k={}, std={std}, seed={seed})", centers.len() / dim))
}

/// Reads `x0,...,x{d-1}[,label]` with a mandatory header row.
pub fn load_points_csv(path: &Path) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_error)?;
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(FgsError::Parse {
            line: 1,
            detail: "missing header row".into(),
        });
    }
    let has_labels = header.iter().next_back() == Some("label");
    let dim = header.len() - usize::from(has_labels);
    if dim == 0 {
        return Err(FgsError::Parse {
            line: 1,
            detail: "no coordinate columns".into(),
        });
    }
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| FgsError::Parse {
            line,
            detail: e.to_string(),
        })?;
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if has_labels && j == dim {
                labels.push(cell.parse::<usize>().map_err(|_| FgsError::Parse {
                    line,
                    detail: format!("label {cell:?} is not a nonnegative integer"),
                })?);
            } else {
                coords.push(cell.parse::<f64>().map_err(|_| FgsError::Parse {
                    line,
                    detail: format!("cell {cell:?} in column {j} is not a number"),
                })?);
            }
        }
    }
    if coords.is_empty() {
        return Err(FgsError::Parse {
            line: 2,
            detail: "no data rows".into(),
        });
    }
    PointCloud::new(dim, coords, has_labels.then_some(labels), path.display().to_string())
}

fn csv_error(e: csv::Error) -> FgsError {
    let line = e.position().map_or(1, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FgsError::Io(io),
        other => FgsError::Parse {
            line,
            detail: format!("{other:?}"),
        },
    }
}

/// Writes coordinates (shortest round-trip representation) and labels.
pub fn save_points_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header: Vec<String> = (0..cloud.dim).map(|j| format!("x{j}")).collect();
    if cloud.labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..cloud.len() {
        let mut row: Vec<String> = cloud.point(i).iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = &cloud.labels {
            row.push(l[i].to_string());
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_labels_csv(labels: &[usize], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["label"]).map_err(csv_error)?;
    for l in labels {
        w.write_record([l.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes named real columns of equal length.
pub fn save_columns_csv(names: &[&str], columns: &[&[f64]], path: &Path) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if names.len() != columns.len() || columns.iter().any(|c| c.len() != n) {
        return Err(FgsError::Parameter("columns must be named and of equal length".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(names).map_err(csv_error)?;
    for i in 0..n {
        w.write_record(columns.iter().map(|c| format!("{:?}", c[i]))).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_shape_and_balance() {
        let c = gen_spiral(5, 400, 10.0, 2.0, 1).unwrap();
        assert_eq!(c.len(), 2000);
        assert_eq!(c.dim, 3);
        let l = c.labels.as_ref().unwrap();
        for k in 0..5 {
            assert_eq!(l.iter().filter(|&&x| x == k).count(), 400);
        }
        assert_eq!(c, gen_spiral(5, 400, 10.0, 2.0, 1).unwrap());
        assert_ne!(c.coords, gen_spiral(5, 400, 10.0, 2.0, 2).unwrap().coords);
    }

    #[test]
    fn crescent_counts_and_geometry() {
        let c = gen_crescent_fullmoon(1000, 5.0, 5.0, 8.0, 3).unwrap();
        let l = c.labels.as_ref().unwrap();
        assert_eq!(l.iter().filter(|&&x| x == 0).count(), 250);
        for i in 0..c.len() {
            let p = c.point(i);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if l[i] == 0 {
                assert!(r <= 5.0 + 1e-12);
            } else {
                assert!((5.0 - 1e-12..=8.0 + 1e-12).contains(&r) && p[1] <= 1e-12);
            }
        }
        assert_eq!(c, gen_crescent_fullmoon(1000, 5.0, 5.0, 8.0, 3).unwrap());
        assert!(gen_crescent_fullmoon(3, 5.0, 5.0, 8.0, 3).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pts.csv");
        let cloud = PointCloud::new(2, vec![0.1, 1.0 / 3.0, -2.5e-300, 7.0, 1e10, std::f64::consts::PI], Some(vec![0, 1, 1]), "t").unwrap();
        save_points_csv(&cloud, &p).unwrap();
        let back = load_points_csv(&p).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.dim, 2);
        assert_eq!(back.coords, cloud.coords);
        assert_eq!(back.labels, cloud.labels);

        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_points_csv(&p), Err(FgsError::Parse { .. })));
        std::fs::write(&p, "x0,x1\n1,2\n3\n").unwrap();
        assert!(matches!(load_points_csv(&p), Err(FgsError::Parse { line: 3, .. })));
        std::fs::write(&p, "x0,x1\n1,2\n3,abc\n").unwrap();
        assert!(matches!(load_points_csv(&p), Err(FgsError::Parse { line: 3, .. })));
    }

    #[test]
    fn relabel() {
        let mut c = PointCloud::new(1, vec![0.0, 0.9, 2.2, 5.0], None, "t").unwrap();
        c.relabel_nearest(&[0.0, 3.0]);
        assert_eq!(c.labels.unwrap(), vec![0, 0, 1, 1]);
        assert_eq!(spiral_centers(5, 10.0, 2.0).len(), 15);
    }
}
