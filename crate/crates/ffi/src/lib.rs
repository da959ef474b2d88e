//! C ABI over `l1gram`.
//!
//! Every fallible call returns an [`L1gStatus`]; on failure the message is
//! available from [`l1g_last_error`] on the same thread. Objects are opaque
//! handles released with the matching `*_free` function. Matrices are dense,
//! row-major and symmetric.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use l1gram::bounds::{
    certify_ratio, piplus_dual_upper, rho1_exact, rho1_multistart, BoundReport, Certificate, MultistartOptions,
    RatioMode, RatioOptions, Witness,
};
use l1gram::decompose::{eigen_decomposer, greedy_peel, validate, Decomposition, PivotRule};
use l1gram::randcert::{build_t, sample_w};
use l1gram::{io, Error, GramMatrix, Rng};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1gStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotSymmetric = 3,
    NotPsd = 4,
    SingularPivot = 5,
    NotConverged = 6,
    Reconstruction = 7,
    TooLarge = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum L1gCertificate {
    Heuristic = 0,
    CertifiedBound = 1,
    Exact = 2,
}

/// Numeric view of a bound report. Absent bounds are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct L1gBounds {
    pub lower: f64,
    pub upper: f64,
    pub certificate: L1gCertificate,
    /// Length of the vector witness, or 0 if there is none.
    pub witness_len: usize,
}

pub struct L1gMatrix(GramMatrix);

pub struct L1gDecomposition(Decomposition);

pub struct L1gReport(BoundReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> L1gStatus {
    match e {
        Error::NotSymmetric { .. } => L1gStatus::NotSymmetric,
        Error::NotPsd { .. } => L1gStatus::NotPsd,
        Error::SingularPivot { .. } => L1gStatus::SingularPivot,
        Error::NotConverged { .. } => L1gStatus::NotConverged,
        Error::Reconstruction { .. } => L1gStatus::Reconstruction,
        Error::TooLarge { .. } => L1gStatus::TooLarge,
        Error::Parse { .. } => L1gStatus::Parse,
        Error::Io(_) => L1gStatus::Io,
        _ => L1gStatus::InvalidArgument,
    }
}

enum Fail {
    Status(L1gStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> L1gStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => L1gStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            L1gStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(L1gStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(L1gStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail::Status(
            L1gStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn l1g_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn l1g_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn l1g_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a matrix from `n * n` row-major values. Symmetry is checked.
///
/// # Safety
/// `data` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_new(n: usize, data: *const f64, out: *mut *mut L1gMatrix) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(n).ok_or_else(|| Fail::Lib(Error::InvalidDimension(format!("n = {n}"))))?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        *out = boxed(L1gMatrix(GramMatrix::from_row_major(n, values)?));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_load(path: *const c_char, out: *mut *mut L1gMatrix) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(L1gMatrix(io::load_matrix(string(path, "path")?)?));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_save(m: *const L1gMatrix, path: *const c_char) -> L1gStatus {
    guard(|| {
        io::save_matrix(string(path, "path")?, &deref(m, "matrix")?.0)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be a handle from this library or null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_free(m: *mut L1gMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of `m`, or 0 for a null handle.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_dim(m: *const L1gMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.n())
}

/// Copies the `n * n` row-major entries into `buf`.
///
/// # Safety
/// `m` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_copy(m: *const L1gMatrix, buf: *mut f64, len: usize) -> L1gStatus {
    guard(|| copy_out(deref(m, "matrix")?.0.as_slice(), buf, len))
}

/// Sum of absolute entries.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_matrix_one_norm(m: *const L1gMatrix, out: *mut f64) -> L1gStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(m, "matrix")?.0.entrywise_one_norm();
        Ok(())
    })
}

/// Random hollow sign matrix of size `n` from `seed`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_sample_w(n: usize, seed: u64, out: *mut *mut L1gMatrix) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()).into());
        }
        *out = boxed(L1gMatrix(sample_w(n, &mut Rng::new(seed))));
        Ok(())
    })
}

/// The shifted sign matrix `-(sqrt n / 4) I + W`, with `W` as in [`l1g_sample_w`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_build_t(n: usize, seed: u64, out: *mut *mut L1gMatrix) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()).into());
        }
        *out = boxed(L1gMatrix(build_t(n, &mut Rng::new(seed))));
        Ok(())
    })
}

/// Spectral decomposition into rank-one PSD terms.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_decompose_eigen(m: *const L1gMatrix, out: *mut *mut L1gDecomposition) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = boxed(L1gDecomposition(eigen_decomposer(&deref(m, "matrix")?.0)?));
        Ok(())
    })
}

/// Greedy peeling. `rule` uses the CLI spelling (`min_cost_per_trace`,
/// `max_diagonal`, `fixed:2,0,1`, ...); null selects the default rule.
///
/// # Safety
/// `m` must be a live handle; `rule` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_decompose_peel(
    m: *const L1gMatrix,
    rule: *const c_char,
    out: *mut *mut L1gDecomposition,
) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let a = &deref(m, "matrix")?.0;
        let rule: PivotRule = if rule.is_null() { PivotRule::default() } else { string(rule, "rule")?.parse()? };
        let run = greedy_peel(a, &rule, a.n())?;
        *out = boxed(L1gDecomposition(run.decomposition));
        Ok(())
    })
}

/// # Safety
/// `d` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_free(d: *mut L1gDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of rank-one terms, or 0 for a null handle.
///
/// # Safety
/// `d` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_len(d: *const L1gDecomposition) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Sum of squared l1 norms of the terms.
///
/// # Safety
/// `d` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_cost(d: *const L1gDecomposition, out: *mut f64) -> L1gStatus {
    guard(|| {
        *out_ptr(out, "out")? = deref(d, "decomposition")?.0.total_cost;
        Ok(())
    })
}

/// Copies term `k` (length `n`) into `buf`.
///
/// # Safety
/// `d` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_vector(
    d: *const L1gDecomposition,
    k: usize,
    buf: *mut f64,
    len: usize,
) -> L1gStatus {
    guard(|| {
        let d = &deref(d, "decomposition")?.0;
        let x = d.vectors.get(k).ok_or_else(|| {
            Fail::Status(L1gStatus::InvalidArgument, format!("term {k} out of range for {} terms", d.len()))
        })?;
        copy_out(x, buf, len)
    })
}

/// Max-entry error of the reconstruction against `m`.
///
/// # Safety
/// Both handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_error(
    d: *const L1gDecomposition,
    m: *const L1gMatrix,
    out: *mut f64,
) -> L1gStatus {
    guard(|| {
        let (d, a) = (&deref(d, "decomposition")?.0, &deref(m, "matrix")?.0);
        if d.n != a.n() {
            return Err(Error::InvalidDimension(format!("decomposition is {}, matrix is {}", d.n, a.n())).into());
        }
        *out_ptr(out, "out")? = validate(d, a, f64::INFINITY).reconstruction_error;
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn l1g_decomposition_save(d: *const L1gDecomposition, path: *const c_char) -> L1gStatus {
    guard(|| {
        io::save_decomposition(string(path, "path")?, &deref(d, "decomposition")?.0)?;
        Ok(())
    })
}

fn report_out(out: *mut *mut L1gReport, report: BoundReport) -> Result<(), Fail> {
    let out = unsafe { out_ptr(out, "out")? };
    *out = boxed(L1gReport(report));
    Ok(())
}

/// Exact maximum of `x^T T x` over the l1 unit sphere, by enumeration.
/// Refuses `n > n_cap`.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_rho1_exact(m: *const L1gMatrix, n_cap: usize, out: *mut *mut L1gReport) -> L1gStatus {
    guard(|| report_out(out, rho1_exact(&deref(m, "matrix")?.0, n_cap)?))
}

/// Heuristic lower bound on the same maximum by projected ascent.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_rho1_multistart(
    m: *const L1gMatrix,
    restarts: usize,
    steps: usize,
    seed: u64,
    out: *mut *mut L1gReport,
) -> L1gStatus {
    guard(|| {
        let opts = MultistartOptions { restarts, steps, ..MultistartOptions::default() };
        report_out(out, rho1_multistart(&deref(m, "matrix")?.0, opts, &Rng::new(seed))?)
    })
}

/// Certified upper bound on `sup Tr(T A)` over PSD `A` with unit entrywise l1 norm.
///
/// # Safety
/// `m` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_piplus_dual_upper(
    m: *const L1gMatrix,
    tol: f64,
    iter_cap: usize,
    out: *mut *mut L1gReport,
) -> L1gStatus {
    guard(|| report_out(out, piplus_dual_upper(&deref(m, "matrix")?.0, tol, iter_cap)?))
}

/// Bounds on the PSD-to-rank-one ratio for the seeded sign matrix of size `n`.
/// `mode` is `exact`, `structured` or `heuristic`.
///
/// # Safety
/// `mode` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_certify_ratio(
    n: usize,
    seed: u64,
    c: f64,
    mode: *const c_char,
    out: *mut *mut L1gReport,
) -> L1gStatus {
    guard(|| {
        let mode: RatioMode = string(mode, "mode")?.parse()?;
        let cert = certify_ratio(n, seed, c, mode, &RatioOptions::default())?;
        report_out(out, cert.report)
    })
}

/// # Safety
/// `r` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn l1g_report_free(r: *mut L1gReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_report_bounds(r: *const L1gReport, out: *mut L1gBounds) -> L1gStatus {
    guard(|| {
        let r = &deref(r, "report")?.0;
        *out_ptr(out, "out")? = L1gBounds {
            lower: r.lower.unwrap_or(f64::NAN),
            upper: r.upper.unwrap_or(f64::NAN),
            certificate: match r.certificate {
                Certificate::Heuristic => L1gCertificate::Heuristic,
                Certificate::CertifiedBound => L1gCertificate::CertifiedBound,
                Certificate::Exact => L1gCertificate::Exact,
            },
            witness_len: match &r.witness {
                Some(Witness::Vector(x)) => x.len(),
                _ => 0,
            },
        };
        Ok(())
    })
}

/// Copies the vector witness into `buf`. Fails if the report has none.
///
/// # Safety
/// `r` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn l1g_report_witness(r: *const L1gReport, buf: *mut f64, len: usize) -> L1gStatus {
    guard(|| match &deref(r, "report")?.0.witness {
        Some(Witness::Vector(x)) => copy_out(x, buf, len),
        _ => Err(Fail::Status(L1gStatus::InvalidArgument, "report has no vector witness".into())),
    })
}

/// JSON rendering of the report. Release with [`l1g_string_free`].
///
/// # Safety
/// `r` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn l1g_report_json(r: *const L1gReport, out: *mut *mut c_char) -> L1gStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let text = serde_json::to_string(&deref(r, "report")?.0).map_err(Error::from)?;
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}
