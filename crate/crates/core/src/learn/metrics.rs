use crate::error::{check_len, FgsError, Result};

/// Largest class count for the exhaustive permutation search.
pub const MAX_PERMUTED_CLASSES: usize = 8;

pub fn misclassification_rate(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_len(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

pub fn classification_rate(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    Ok(1.0 - misclassification_rate(predicted, truth)?)
}

/// Misclassification minimized over relabelings of `predicted`.
pub fn misclassification_rate_permuted(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_len(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let classes = predicted.iter().chain(truth).max().unwrap() + 1;
    if classes > MAX_PERMUTED_CLASSES {
        return Err(FgsError::Parameter(format!(
            "permutation matching supports at most {MAX_PERMUTED_CLASSES} classes, got {classes}"
        )));
    }
    let mut confusion = vec![vec![0usize; classes]; classes];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[p][t] += 1;
    }
    let mut perm: Vec<usize> = (0..classes).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits = (0..classes).map(|a| confusion[a][p[a]]).sum::<usize>();
        best = best.max(hits);
    });
    Ok(1.0 - best as f64 / truth.len() as f64)
}

fn permute(p: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        visit(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, visit);
        p.swap(start, i);
    }
}
