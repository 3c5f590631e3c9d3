//! C interface to `gl2ext`.
//!
//! Blocks are opaque heap handles released with `gl2ext_block_free`. Every
//! fallible call returns a `Gl2extStatus`; on failure the message is kept per
//! thread and can be read with `gl2ext_last_error`. Strings handed out by the
//! library must be released with `gl2ext_string_free`.
//!
//! Conventions are calibrated once per process on first use, which takes a
//! few hundred milliseconds.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use gl2ext::calibration::{self, CalibrationRecord};
use gl2ext::dgtensor::{build_chain, homology_of_chain};
use gl2ext::field::FieldMode;
use gl2ext::schur::{build_mu, BlockAlgebra};
use gl2ext::{report, Error};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gl2extStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    OutOfRange = 4,
    Calibration = 5,
    FieldMismatch = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque block algebra μ_q.
pub struct Gl2extBlock {
    inner: BlockAlgebra,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: Gl2extStatus, msg: impl Into<String>) -> Gl2extStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> Gl2extStatus {
    let status = match &e {
        Error::InvalidArgument(_) => Gl2extStatus::InvalidArgument,
        Error::CapExceeded { .. } => Gl2extStatus::CapExceeded,
        Error::Calibration(_) => Gl2extStatus::Calibration,
        Error::FieldMismatch(_) => Gl2extStatus::FieldMismatch,
        _ => Gl2extStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> Gl2extStatus) -> Gl2extStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(Gl2extStatus::Panic, msg)
        }
    }
}

fn record() -> Result<&'static CalibrationRecord, Gl2extStatus> {
    static REC: OnceLock<Result<CalibrationRecord, String>> = OnceLock::new();
    match REC.get_or_init(|| calibration::default_record().map_err(|e| e.to_string())) {
        Ok(r) => Ok(r),
        Err(e) => Err(fail(Gl2extStatus::Calibration, e.clone())),
    }
}

fn check_p(p: u32) -> Result<(), Gl2extStatus> {
    if p < 2 {
        return Err(fail(Gl2extStatus::InvalidArgument, format!("p must be at least 2, got {p}")));
    }
    Ok(())
}

unsafe fn block_ref<'a>(b: *const Gl2extBlock) -> Result<&'a BlockAlgebra, Gl2extStatus> {
    if b.is_null() {
        return Err(fail(Gl2extStatus::NullPointer, "null block handle"));
    }
    Ok(&(*b).inner)
}

unsafe fn vertex<'a>(v: *const u32, q: usize) -> Result<&'a [u32], Gl2extStatus> {
    if v.is_null() {
        return Err(fail(Gl2extStatus::NullPointer, "null vertex"));
    }
    Ok(std::slice::from_raw_parts(v, q))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! out_ptr {
    ($p:expr) => {
        if $p.is_null() {
            return fail(Gl2extStatus::NullPointer, concat!("null output pointer ", stringify!($p)));
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gl2ext_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn gl2ext_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Total dimension of the dg-homology of the i-th tensor power (i ≤ 1),
/// computed over ℚ and 𝔽_p, which must agree.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_oracle_total(p: u32, i: i64, out: *mut usize) -> Gl2extStatus {
    guarded(|| {
        out_ptr!(out);
        tri!(check_p(p));
        if i > 1 {
            return fail(Gl2extStatus::InvalidArgument, format!("i must be at most 1, got {i}"));
        }
        let rec = tri!(record());
        let h = tri!(build_chain(p, i, rec.conventions.junction)
            .and_then(|c| homology_of_chain(&c, FieldMode::Both))
            .map_err(from_error));
        *out = h.total();
        Gl2extStatus::Ok
    })
}

/// Build μ_q at p. A negative `k_max` means no truncation.
///
/// # Safety
/// `out` must be a valid pointer; the handle written there is owned by the
/// caller.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_new(p: u32, q: usize, k_max: i64, out: *mut *mut Gl2extBlock) -> Gl2extStatus {
    guarded(|| {
        out_ptr!(out);
        *out = ptr::null_mut();
        tri!(check_p(p));
        if q == 0 {
            return fail(Gl2extStatus::InvalidArgument, "q must be at least 1");
        }
        let rec = tri!(record());
        let k = (k_max >= 0).then_some(k_max);
        let b = tri!(build_mu(&rec.upsilon(p), q, k).map_err(from_error));
        *out = Box::into_raw(Box::new(Gl2extBlock { inner: b }));
        Gl2extStatus::Ok
    })
}

/// Release a block. NULL is ignored.
///
/// # Safety
/// `b` must come from `gl2ext_block_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_free(b: *mut Gl2extBlock) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Basis size, or 0 for NULL.
///
/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_dim(b: *const Gl2extBlock) -> usize {
    b.as_ref().map_or(0, |b| b.inner.dim())
}

/// Number of vertices (primitive idempotents), or 0 for NULL.
///
/// # Safety
/// `b` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_vertex_count(b: *const Gl2extBlock) -> usize {
    b.as_ref().map_or(0, |b| b.inner.idempotents().len())
}

/// Copy vertex `n` (in sorted order) into `out`, which holds q entries.
///
/// # Safety
/// `b` must be a live handle and `out` must have room for q values.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_vertex(b: *const Gl2extBlock, n: usize, out: *mut u32) -> Gl2extStatus {
    guarded(|| {
        let b = tri!(block_ref(b));
        out_ptr!(out);
        let vs = b.vertices();
        let Some(v) = vs.get(n) else {
            return fail(Gl2extStatus::OutOfRange, format!("vertex {n} of {}", vs.len()));
        };
        ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Gl2extStatus::Ok
    })
}

/// dim Ext^k between two vertices, each given as q labels in 1..=p. With
/// `has_j` zero the internal degree j is summed over.
///
/// # Safety
/// `b` must be a live handle, `from` and `to` must point to q values.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_ext_dim(
    b: *const Gl2extBlock,
    from: *const u32,
    to: *const u32,
    k: i64,
    j: i64,
    has_j: i32,
    out: *mut usize,
) -> Gl2extStatus {
    guarded(|| {
        let b = tri!(block_ref(b));
        out_ptr!(out);
        let u = tri!(vertex(from, b.q));
        let v = tri!(vertex(to, b.q));
        for w in [u, v] {
            if !b.idempotents().contains_key(w) {
                return fail(Gl2extStatus::OutOfRange, format!("{w:?} is not a vertex"));
            }
        }
        *out = report::ext_dim(b, u, v, k, (has_j != 0).then_some(j));
        Gl2extStatus::Ok
    })
}

/// Product of basis elements `a` and `c`. A zero product sets `*sign` to 0.
///
/// # Safety
/// `b` must be a live handle, `sign` and `index` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_multiply(
    b: *const Gl2extBlock,
    a: usize,
    c: usize,
    sign: *mut i8,
    index: *mut usize,
) -> Gl2extStatus {
    guarded(|| {
        let b = tri!(block_ref(b));
        out_ptr!(sign);
        out_ptr!(index);
        let n = b.dim();
        if a >= n || c >= n {
            return fail(Gl2extStatus::OutOfRange, format!("basis index out of range ({a}, {c}; dim {n})"));
        }
        match b.multiply(a, c) {
            Some((s, r)) => {
                *sign = s;
                *index = r;
            }
            None => {
                *sign = 0;
                *index = 0;
            }
        }
        Gl2extStatus::Ok
    })
}

/// Serialize the block (vertices, basis and optionally the product table) as
/// JSON. Release the string with `gl2ext_string_free`.
///
/// # Safety
/// `b` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_block_to_json(
    b: *const Gl2extBlock,
    with_products: i32,
    out: *mut *mut c_char,
) -> Gl2extStatus {
    guarded(|| {
        let b = tri!(block_ref(b));
        out_ptr!(out);
        *out = ptr::null_mut();
        let s = tri!(serde_json::to_string(&report::dump_block(b, with_products != 0))
            .map_err(|e| fail(Gl2extStatus::Internal, e.to_string())));
        *out = CString::new(s).map_or(ptr::null_mut(), CString::into_raw);
        Gl2extStatus::Ok
    })
}

/// Release a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gl2ext_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copy of the last error message as an owned string, for callers that keep
/// it past the next call. NULL if there is none.
#[no_mangle]
pub extern "C" fn gl2ext_last_error_copy() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(ptr::null_mut(), CString::into_raw))
}
