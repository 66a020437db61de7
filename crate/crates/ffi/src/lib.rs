//! C ABI over the rankmf solver.
//!
//! Matrices and factorizations are opaque handles owned by the caller
//! and released with the matching `*_free`. Every fallible call returns
//! a [`RankmfStatus`]; on failure `rankmf_last_error` describes it until
//! the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rankmf::krylov::{gmres, GmresOptions};
use rankmf::multifrontal::{multifrontal_factorize, Compression, MultifrontalFactor, Policy};
use rankmf::sparse::{model_problem, parse_matrix_market, MatrixMarket, ModelKind, Point, SparseMatrix};
use rankmf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankmfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Dimension = 4,
    Singular = 5,
    NotConverged = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankmfCompression {
    None = 0,
    Blr = 1,
    Hodlr = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankmfModel {
    Poisson2d = 0,
    Poisson3d = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RankmfPolicy {
    pub compression: RankmfCompression,
    pub tol: f64,
    /// Fronts smaller than this stay dense.
    pub threshold_dense: usize,
    pub tile: usize,
    pub leaf_size: usize,
    pub eta: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RankmfGmresResult {
    pub iterations: usize,
    pub restarts: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Opaque sparse matrix.
pub struct RankmfMatrix {
    a: SparseMatrix,
    coords: Option<Vec<Point>>,
}

/// Opaque factorization.
pub struct RankmfFactor {
    f: MultifrontalFactor,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(s).expect("nul bytes removed")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> RankmfStatus {
    match e {
        Error::Config(_) => RankmfStatus::InvalidArgument,
        Error::Dimension(_) | Error::SizeOverflow(_) => RankmfStatus::Dimension,
        Error::SingularPivot { .. }
        | Error::StructurallySingular(_)
        | Error::SingularFront { .. }
        | Error::SingularLeaf { .. }
        | Error::SingularTile { .. } => RankmfStatus::Singular,
        Error::Structure(_) | Error::Cycle(_) => RankmfStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (RankmfStatus, String)>) -> RankmfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RankmfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RankmfStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (RankmfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RankmfStatus, String) {
    (RankmfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (RankmfStatus, String)> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

fn emit_handle<T>(out: *mut *mut T, value: T) {
    // SAFETY: callers check `out` for null before building the value.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message for the last failed call on this thread, or null. The
/// pointer stays valid until the next rankmf call on the same thread.
#[no_mangle]
pub extern "C" fn rankmf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn rankmf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn rankmf_policy_default() -> RankmfPolicy {
    let p = Policy::default();
    RankmfPolicy {
        compression: RankmfCompression::None,
        tol: p.tol,
        threshold_dense: p.threshold_dense,
        tile: p.tile,
        leaf_size: p.leaf_size,
        eta: p.eta,
        seed: p.seed,
    }
}

/// Builds a matrix from CSC arrays (row indices strictly increasing
/// per column, no explicit zeros). The arrays are copied.
///
/// # Safety
/// `col_starts` must hold `n_cols + 1` entries and `row_indices` and
/// `values` `col_starts[n_cols]` entries each.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_from_csc(
    n_rows: usize,
    n_cols: usize,
    col_starts: *const usize,
    row_indices: *const usize,
    values: *const f64,
    out: *mut *mut RankmfMatrix,
) -> RankmfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cs = slice(col_starts, n_cols + 1, "col_starts")?;
        let nnz = cs[n_cols];
        let ri = slice(row_indices, nnz, "row_indices")?;
        let v = slice(values, nnz, "values")?;
        let a = SparseMatrix::new(n_rows, n_cols, cs.to_vec(), ri.to_vec(), v.to_vec()).map_err(lib_err)?;
        emit_handle(out, RankmfMatrix { a, coords: None });
        Ok(())
    })
}

/// Parses a real MatrixMarket coordinate file held in memory.
///
/// # Safety
/// `text` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_from_matrix_market(
    text: *const u8,
    len: usize,
    out: *mut *mut RankmfMatrix,
) -> RankmfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let bytes = slice(text, len, "text")?;
        match parse_matrix_market(bytes) {
            Ok(MatrixMarket::Real(a)) => {
                emit_handle(out, RankmfMatrix { a, coords: None });
                Ok(())
            }
            Ok(MatrixMarket::Complex(_)) => Err((RankmfStatus::Parse, "complex matrices are not supported".into())),
            Err(e) => Err((RankmfStatus::Parse, e.to_string())),
        }
    })
}

/// Finite-difference Laplacian on a k×k (or k×k×k) lattice; the
/// lattice coordinates are kept for geometric ordering.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_model(kind: RankmfModel, k: usize, out: *mut *mut RankmfMatrix) -> RankmfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let kind = match kind {
            RankmfModel::Poisson2d => ModelKind::Poisson2d,
            RankmfModel::Poisson3d => ModelKind::Poisson3d,
        };
        let (a, c) = model_problem(kind, k).map_err(lib_err)?;
        emit_handle(out, RankmfMatrix { a, coords: Some(c) });
        Ok(())
    })
}

/// # Safety
/// `m` must be a live matrix handle; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_shape(
    m: *const RankmfMatrix,
    n_rows: *mut usize,
    n_cols: *mut usize,
    nnz: *mut usize,
) -> RankmfStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        for (p, v) in [(n_rows, m.a.n_rows()), (n_cols, m.a.n_cols()), (nnz, m.a.nnz())] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// `y = A x`.
///
/// # Safety
/// `x` must hold `n_cols` and `y` `n_rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_matvec(m: *const RankmfMatrix, x: *const f64, y: *mut f64) -> RankmfStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let x = slice(x, m.a.n_cols(), "x")?;
        if y.is_null() && m.a.n_rows() > 0 {
            return Err(null("y"));
        }
        let r = m.a.matvec(x);
        ptr::copy_nonoverlapping(r.as_ptr(), y, r.len());
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rankmf_matrix_free(m: *mut RankmfMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Equilibrates, orders and factors `m`. A null policy means the
/// defaults from `rankmf_policy_default`.
///
/// # Safety
/// `m` must be a live matrix handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rankmf_factorize(
    m: *const RankmfMatrix,
    policy: *const RankmfPolicy,
    out: *mut *mut RankmfFactor,
) -> RankmfStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = policy.as_ref().copied().unwrap_or_else(|| rankmf_policy_default());
        let policy = Policy {
            threshold_dense: p.threshold_dense,
            compression: match p.compression {
                RankmfCompression::None => Compression::None,
                RankmfCompression::Blr => Compression::Blr,
                RankmfCompression::Hodlr => Compression::Hodlr,
            },
            tol: p.tol,
            tile: p.tile,
            leaf_size: p.leaf_size,
            eta: p.eta,
            seed: p.seed,
        };
        if !(policy.tol > 0.0 && policy.tol < 1.0) || policy.tile == 0 || policy.leaf_size == 0 {
            return Err((RankmfStatus::InvalidArgument, "policy needs tol in (0,1) and positive tile and leaf_size".into()));
        }
        let f = multifrontal_factorize(&m.a, m.coords.as_deref(), &policy).map_err(lib_err)?;
        emit_handle(out, RankmfFactor { f });
        Ok(())
    })
}

/// Stored factor entries.
///
/// # Safety
/// `f` must be a live factor handle.
#[no_mangle]
pub unsafe extern "C" fn rankmf_factor_entries(f: *const RankmfFactor) -> usize {
    f.as_ref().map_or(0, |f| f.f.stats.fill)
}

/// Solves with the factors; `x` and `b` may alias.
///
/// # Safety
/// `b` and `x` must hold `n` doubles, `n` the factored dimension.
#[no_mangle]
pub unsafe extern "C" fn rankmf_factor_solve(f: *const RankmfFactor, b: *const f64, x: *mut f64, n: usize) -> RankmfStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("factor"))?;
        if n != f.f.n {
            return Err((RankmfStatus::Dimension, format!("n = {n} but the factor has dimension {}", f.f.n)));
        }
        let b = slice(b, n, "b")?.to_vec();
        if x.is_null() && n > 0 {
            return Err(null("x"));
        }
        let r = f.f.solve(&b).map_err(lib_err)?;
        ptr::copy_nonoverlapping(r.as_ptr(), x, n);
        Ok(())
    })
}

/// Right-preconditioned restarted GMRES on `m` with `f` as the
/// preconditioner. Returns `NotConverged` (with `x` holding the last
/// iterate) when `max_iters` runs out.
///
/// # Safety
/// Handles must be live; `b` and `x` hold `n` doubles; `result` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn rankmf_gmres(
    m: *const RankmfMatrix,
    f: *const RankmfFactor,
    b: *const f64,
    x: *mut f64,
    n: usize,
    tol: f64,
    restart: usize,
    max_iters: usize,
    result: *mut RankmfGmresResult,
) -> RankmfStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let f = f.as_ref().ok_or_else(|| null("factor"))?;
        if n != m.a.n_rows() || n != f.f.n {
            return Err((RankmfStatus::Dimension, format!("n = {n} does not match the matrix and factor")));
        }
        let b = slice(b, n, "b")?.to_vec();
        if x.is_null() && n > 0 {
            return Err(null("x"));
        }
        let opts = GmresOptions { tol, restart, max_iters };
        let (sol, t) = gmres(|v: &[f64]| m.a.matvec(v), |v: &[f64]| f.f.solve(v), &b, &opts).map_err(lib_err)?;
        ptr::copy_nonoverlapping(sol.as_ptr(), x, n);
        if let Some(r) = result.as_mut() {
            *r = RankmfGmresResult {
                iterations: t.iterations,
                restarts: t.restarts,
                relative_residual: t.final_residual(),
                converged: t.converged,
            };
        }
        if t.converged {
            Ok(())
        } else {
            Err((RankmfStatus::NotConverged, format!("GMRES stopped after {} iterations", t.iterations)))
        }
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rankmf_factor_free(f: *mut RankmfFactor) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Copies `s` into an owned string for Rust callers and tests.
///
/// # Safety
/// `s` must be null or NUL-terminated.
pub unsafe fn message(s: *const c_char) -> Option<String> {
    (!s.is_null()).then(|| CStr::from_ptr(s).to_string_lossy().into_owned())
}
