//! C ABI over the matrix-free graph operator.
//!
//! Every function returns an [`FgsStatus`]; on failure a human-readable message
//! is kept per thread and can be copied out with [`fgs_last_error_message`].
//! Handles are opaque and must be released with their matching `_free`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fgs_core::fastsum::FastsumParams;
use fgs_core::graphop::AdjacencyOperator;
use fgs_core::kernels::{KernelFamily, KernelSpec};
use fgs_core::learn::kernel_ssl_solve;
use fgs_core::spectral::{lanczos_largest, EigenPairs, LanczosOptions};
use fgs_core::FgsError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Range = 3,
    Shape = 4,
    DegreePositivity = 5,
    Indefinite = 6,
    Numerical = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FgsKernel {
    Gaussian = 0,
    LaplacianRbf = 1,
    Multiquadric = 2,
    InverseMultiquadric = 3,
}

/// Normalized adjacency operator `D^{-1/2} W D^{-1/2}` over a fixed node set.
pub struct FgsOperator {
    inner: AdjacencyOperator,
}

/// Eigenvalues (descending) with column-major eigenvectors.
pub struct FgsEigenpairs {
    inner: EigenPairs,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &FgsError) -> FgsStatus {
    match e {
        FgsError::Parameter(_) => FgsStatus::InvalidParameter,
        FgsError::Range { .. } => FgsStatus::Range,
        FgsError::Shape { .. } => FgsStatus::Shape,
        FgsError::DegreePositivity { .. } => FgsStatus::DegreePositivity,
        FgsError::Indefinite { .. } => FgsStatus::Indefinite,
        FgsError::Io(_) | FgsError::Parse { .. } | FgsError::Format(_) => FgsStatus::Io,
        _ => FgsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (FgsStatus, String)>) -> FgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FgsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FgsStatus::Panic
        }
    }
}

fn lift<T>(r: fgs_core::Result<T>) -> Result<T, (FgsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (FgsStatus, String) {
    (FgsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (FgsStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], (FgsStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn kernel_spec(kernel: FgsKernel, param: f64) -> fgs_core::Result<KernelSpec> {
    let family = match kernel {
        FgsKernel::Gaussian => KernelFamily::Gaussian,
        FgsKernel::LaplacianRbf => KernelFamily::LaplacianRbf,
        FgsKernel::Multiquadric => KernelFamily::Multiquadric,
        FgsKernel::InverseMultiquadric => KernelFamily::InverseMultiquadric,
    };
    KernelSpec::new(family, param)
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length without the
/// terminator, so a caller can size the buffer with a first call using `len = 0`.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn fgs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds the fast operator for `n` nodes stored row-major (`n * dim` values),
/// with bandwidth `bandwidth` and window cutoff `cutoff`.
///
/// # Safety
/// `nodes` must point to `n * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_new(
    nodes: *const f64,
    n: usize,
    dim: usize,
    kernel: FgsKernel,
    param: f64,
    bandwidth: usize,
    cutoff: usize,
    out: *mut *mut FgsOperator,
) -> FgsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let nodes = input(nodes, n.saturating_mul(dim), "nodes")?;
        let spec = lift(kernel_spec(kernel, param))?;
        let params = lift(FastsumParams::new(bandwidth, cutoff))?;
        let inner = lift(AdjacencyOperator::build(nodes, dim, spec, params))?;
        *out = Box::into_raw(Box::new(FgsOperator { inner }));
        Ok(())
    })
}

/// Same as [`fgs_operator_new`] but with direct O(n^2) kernel sums.
///
/// # Safety
/// `nodes` must point to `n * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_new_exact(
    nodes: *const f64,
    n: usize,
    dim: usize,
    kernel: FgsKernel,
    param: f64,
    out: *mut *mut FgsOperator,
) -> FgsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let nodes = input(nodes, n.saturating_mul(dim), "nodes")?;
        let spec = lift(kernel_spec(kernel, param))?;
        let inner = lift(AdjacencyOperator::exact(nodes, dim, spec))?;
        *out = Box::into_raw(Box::new(FgsOperator { inner }));
        Ok(())
    })
}

/// # Safety
/// `op` must come from `fgs_operator_new*` and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_free(op: *mut FgsOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `op` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_len(op: *const FgsOperator) -> usize {
    op.as_ref().map_or(0, |o| o.inner.len())
}

unsafe fn apply_with(
    op: *const FgsOperator,
    x: *const f64,
    y: *mut f64,
    f: impl FnOnce(&AdjacencyOperator, &[f64]) -> fgs_core::Result<Vec<f64>>,
) -> FgsStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let n = op.inner.len();
        let x = input(x, n, "x")?;
        let y = output(y, n, "y")?;
        y.copy_from_slice(&lift(f(&op.inner, x))?);
        Ok(())
    })
}

/// `y = D^{-1/2} W D^{-1/2} x`, both of length `fgs_operator_len(op)`.
///
/// # Safety
/// `x` and `y` must each hold `fgs_operator_len(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_apply(op: *const FgsOperator, x: *const f64, y: *mut f64) -> FgsStatus {
    apply_with(op, x, y, |o, x| o.apply_normalized(x))
}

/// `y = (I - D^{-1/2} W D^{-1/2}) x`.
///
/// # Safety
/// `x` and `y` must each hold `fgs_operator_len(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_apply_laplacian(op: *const FgsOperator, x: *const f64, y: *mut f64) -> FgsStatus {
    apply_with(op, x, y, |o, x| o.apply_sym_laplacian(x))
}

/// Copies the computed degrees into `out`.
///
/// # Safety
/// `out` must hold `fgs_operator_len(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn fgs_operator_degrees(op: *const FgsOperator, out: *mut f64) -> FgsStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let d = op.inner.degrees();
        output(out, d.len(), "out")?.copy_from_slice(d);
        Ok(())
    })
}

/// The `k` largest eigenpairs of the normalized adjacency operator via Lanczos.
/// `max_iter = 0` selects the default iteration cap.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fgs_eigs_largest(
    op: *const FgsOperator,
    k: usize,
    max_iter: usize,
    seed: u64,
    out: *mut *mut FgsEigenpairs,
) -> FgsStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut opts = LanczosOptions { seed, ..Default::default() };
        if max_iter > 0 {
            opts.max_iter = max_iter;
        }
        let res = lift(lanczos_largest(&op.inner, k, &opts))?;
        *out = Box::into_raw(Box::new(FgsEigenpairs { inner: res.pairs }));
        Ok(())
    })
}

/// # Safety
/// `pairs` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fgs_eigenpairs_count(pairs: *const FgsEigenpairs) -> usize {
    pairs.as_ref().map_or(0, |p| p.inner.len())
}

/// # Safety
/// `pairs` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fgs_eigenpairs_dim(pairs: *const FgsEigenpairs) -> usize {
    pairs.as_ref().map_or(0, |p| p.inner.dim())
}

/// Copies eigenvalues (`count` doubles) and, if `vectors` is non-null, the
/// column-major eigenvectors (`dim * count` doubles).
///
/// # Safety
/// Buffers must be sized as above.
#[no_mangle]
pub unsafe extern "C" fn fgs_eigenpairs_copy(pairs: *const FgsEigenpairs, values: *mut f64, vectors: *mut f64) -> FgsStatus {
    guard(|| {
        let p = &pairs.as_ref().ok_or_else(|| null("pairs"))?.inner;
        output(values, p.len(), "values")?.copy_from_slice(p.values());
        if !vectors.is_null() {
            output(vectors, p.vectors().len(), "vectors")?.copy_from_slice(p.vectors());
        }
        Ok(())
    })
}

/// # Safety
/// `pairs` must come from `fgs_eigs_largest` and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn fgs_eigenpairs_free(pairs: *mut FgsEigenpairs) {
    if !pairs.is_null() {
        drop(Box::from_raw(pairs));
    }
}

/// Solves `(I + beta L_s) u = f` by CG and writes `u`. `iterations` may be null.
/// Returns `Numerical` if the cap is hit before `tol`; `u` still holds the last iterate.
///
/// # Safety
/// `f` and `u` must each hold `fgs_operator_len(op)` doubles.
#[no_mangle]
pub unsafe extern "C" fn fgs_kernel_ssl(
    op: *const FgsOperator,
    f: *const f64,
    beta: f64,
    tol: f64,
    max_iter: usize,
    u: *mut f64,
    iterations: *mut usize,
) -> FgsStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        let n = op.inner.len();
        let f = input(f, n, "f")?;
        let u = output(u, n, "u")?;
        let res = lift(kernel_ssl_solve(&op.inner, f, beta, tol, max_iter))?;
        u.copy_from_slice(&res.u);
        if let Some(it) = iterations.as_mut() {
            *it = res.iterations;
        }
        if !res.converged {
            return Err((
                FgsStatus::Numerical,
                format!("CG did not reach tol {tol:e} within {max_iter} iterations"),
            ));
        }
        Ok(())
    })
}
