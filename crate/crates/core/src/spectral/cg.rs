use super::{dot, norm2, SymmetricOperator};
use crate::error::{check_len, FgsError, Result};

#[derive(Debug, Clone)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final `||b - A x||_2 / ||b||_2` from the recurrence.
    pub relative_residual: f64,
}

/// Conjugate gradients from `x0 = 0` until `||r|| <= tol ||b||`.
///
/// Fails with [`FgsError::Indefinite`] as soon as `p^T A p <= 0`.
pub fn cg_solve(op: &dyn SymmetricOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<CgResult> {
    let n = op.dim();
    check_len(n, b.len())?;
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgResult {
            x,
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        let ap = op.apply(&p)?;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(FgsError::Indefinite {
                iteration: iterations + 1,
                curvature,
            });
        }
        let alpha = rr / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        let rr_new = dot(&r, &r);
        rel = rr_new.sqrt() / bnorm;
        if rel <= tol {
            return Ok(CgResult {
                x,
                iterations,
                converged: true,
                relative_residual: rel,
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Ok(CgResult {
        x,
        iterations,
        converged: false,
        relative_residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{DenseOperator, FnOperator};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn identity_in_one_step() {
        let op = FnOperator::new(4, |x: &[f64]| Ok(x.to_vec()));
        let b = [1.0, -2.0, 3.0, 0.5];
        let res = cg_solve(&op, &b, 1e-12, 10).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.x, b);
    }

    #[test]
    fn diagonal_exact_termination() {
        let d: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let op = DenseOperator::from_matrix(&DMatrix::from_diagonal(&DVector::from_vec(d.clone()))).unwrap();
        let b: Vec<f64> = (0..10).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let res = cg_solve(&op, &b, 1e-12, 10).unwrap();
        assert!(res.converged && res.iterations <= 10);
        for i in 0..10 {
            assert!((res.x[i] - b[i] / d[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_is_detected() {
        let op = FnOperator::new(2, |x: &[f64]| Ok(vec![x[0], -x[1]]));
        let err = cg_solve(&op, &[0.0, 1.0], 1e-8, 10).unwrap_err();
        assert!(matches!(err, FgsError::Indefinite { iteration: 1, .. }));
    }

    #[test]
    fn zero_rhs() {
        let op = FnOperator::new(3, |x: &[f64]| Ok(x.to_vec()));
        let res = cg_solve(&op, &[0.0; 3], 1e-8, 10).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.x, vec![0.0; 3]);
    }
}
