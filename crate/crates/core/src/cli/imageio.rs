//! RGB images as 3-D point clouds and segmentation output.

use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use super::data::PointCloud;
use crate::error::{check_len, FgsError, Result};

/// Distinct colors for up to 8 segments; larger labels wrap around.
pub const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [128, 128, 128],
];

fn format_for(path: &Path) -> Result<ImageFormat> {
    match ImageFormat::from_path(path) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Pnm)) => Ok(f),
        _ => Err(FgsError::Format(format!(
            "{}: only PNG and binary PPM images are supported",
            path.display()
        ))),
    }
}

/// Pixels in row-major order with coordinates `(R, G, B)` in `0..=255`.
pub fn image_to_nodes(path: &Path) -> Result<(PointCloud, u32, u32)> {
    let format = format_for(path)?;
    let reader = image::ImageReader::open(path)?.with_guessed_format()?;
    if reader.format() != Some(format) {
        return Err(FgsError::Format(format!("{}: content does not match extension", path.display())));
    }
    let img = reader.decode().map_err(|e| FgsError::Format(e.to_string()))?.to_rgb8();
    let (w, h) = img.dimensions();
    let coords = img.pixels().flat_map(|p| p.0.map(f64::from)).collect();
    Ok((PointCloud::new(3, coords, None, path.display().to_string())?, w, h))
}

pub fn rgb_image_from_nodes(cloud: &PointCloud, width: u32, height: u32) -> Result<RgbImage> {
    check_len((width * height) as usize, cloud.len())?;
    let bytes = cloud.coords.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    RgbImage::from_raw(width, height, bytes).ok_or_else(|| FgsError::Parameter("image buffer size mismatch".into()))
}

fn save(img: &RgbImage, path: &Path) -> Result<()> {
    let format = format_for(path)?;
    img.save_with_format(path, format).map_err(|e| match e {
        image::ImageError::IoError(io) => FgsError::Io(io),
        other => FgsError::Format(other.to_string()),
    })
}

/// Paints each pixel with the palette color of its label.
pub fn labels_to_image(labels: &[usize], width: u32, height: u32, palette: &[[u8; 3]], path: &Path) -> Result<()> {
    check_len((width * height) as usize, labels.len())?;
    if palette.is_empty() {
        return Err(FgsError::Parameter("empty palette".into()));
    }
    let img = RgbImage::from_fn(width, height, |x, y| Rgb(palette[labels[(y * width + x) as usize] % palette.len()]));
    save(&img, path)
}

/// White where the labelings differ, black elsewhere.
pub fn difference_image(a: &[usize], b: &[usize], width: u32, height: u32, path: &Path) -> Result<()> {
    check_len((width * height) as usize, a.len())?;
    check_len(a.len(), b.len())?;
    let img = RgbImage::from_fn(width, height, |x, y| {
        let i = (y * width + x) as usize;
        if a[i] == b[i] {
            Rgb([0, 0, 0])
        } else {
            Rgb([255, 255, 255])
        }
    });
    save(&img, path)
}

/// Relabels `b` by the permutation that best matches `a` (at most 8 labels).
pub fn align_labels(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    check_len(a.len(), b.len())?;
    let classes = a.iter().chain(b).max().map_or(0, |m| m + 1);
    if classes > 8 {
        return Err(FgsError::Parameter("label alignment supports at most 8 labels".into()));
    }
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&x, &y) in a.iter().zip(b) {
        confusion[y][x] += 1;
    }
    let mut perm: Vec<usize> = (0..classes).collect();
    let mut best = (0, perm.clone());
    heap_permutations(&mut perm, classes, &mut |p| {
        let hits: usize = (0..classes).map(|y| confusion[y][p[y]]).sum();
        if hits > best.0 {
            best = (hits, p.to_vec());
        }
    });
    Ok(b.iter().map(|&y| best.1[y]).collect())
}

fn heap_permutations(p: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(p);
        return;
    }
    for i in 0..k {
        heap_permutations(p, k - 1, visit);
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("img.png");
        let img = RgbImage::from_raw(2, 2, vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]).unwrap();
        img.save(&p).unwrap();
        let (cloud, w, h) = image_to_nodes(&p).unwrap();
        assert_eq!((w, h, cloud.len()), (2, 2, 4));
        assert_eq!(cloud.point(1), &[4.0, 5.0, 6.0]);
        assert_eq!(rgb_image_from_nodes(&cloud, 2, 2).unwrap(), img);
    }

    #[test]
    fn gray_ppm_has_equal_channels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gray.ppm");
        let img = RgbImage::from_fn(3, 2, |x, y| {
            let g = (40 * x + 90 * y) as u8;
            Rgb([g, g, g])
        });
        img.save_with_format(&p, ImageFormat::Pnm).unwrap();
        let (cloud, _, _) = image_to_nodes(&p).unwrap();
        for i in 0..cloud.len() {
            let q = cloud.point(i);
            assert!(q[0] == q[1] && q[1] == q[2]);
        }
    }

    #[test]
    fn difference_of_identical_is_black() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("diff.png");
        let l = vec![0, 1, 2, 1, 0, 3];
        difference_image(&l, &l, 3, 2, &p).unwrap();
        let img = image::open(&p).unwrap().to_rgb8();
        assert!(img.pixels().all(|px| px.0 == [0, 0, 0]));
        labels_to_image(&l, 3, 2, &PALETTE, &dir.path().join("seg.ppm")).unwrap();
    }

    #[test]
    fn unsupported_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bmp");
        std::fs::write(&p, b"BM").unwrap();
        assert!(matches!(image_to_nodes(&p), Err(FgsError::Format(_))));
    }

    #[test]
    fn alignment() {
        assert_eq!(align_labels(&[0, 0, 1, 2], &[2, 2, 0, 1]).unwrap(), vec![0, 0, 1, 2]);
    }
}
