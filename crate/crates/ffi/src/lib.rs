//! C interface to `dtwave`.
//!
//! Objects are opaque handles created by `dt_*_new`/`dt_*_load`/`dt_*_forward`
//! functions and released with the matching `dt_*_free`. Every fallible
//! call returns a `DtStatus`; on failure `dt_last_error` describes the
//! problem. Images are row-major `double` arrays.

use dtwave::diag::compare_filters;
use dtwave::dualtree::{
    dtcwt2d_complex_forward, dtcwt2d_complex_inverse, dtcwt2d_real_forward, dtcwt2d_real_inverse, DualTreePyramidComplex2D,
    DualTreePyramidReal2D,
};
use dtwave::{dwt2d_forward, dwt2d_inverse, fixtures, DualTreeFilterSet, Error, Filter, Image, Pyramid2D};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidLength = 2,
    UnsupportedSize = 3,
    Structure = 4,
    OutOfRange = 5,
    NonFinite = 6,
    Diverged = 7,
    Undefined = 8,
    Parse = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Which dual-tree transform a `DtDualTree` holds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtVariant {
    Real = 0,
    Complex = 1,
}

pub struct DtFilter(Filter);
pub struct DtFilterSet(DualTreeFilterSet);
pub struct DtPyramid(Pyramid2D);

enum DualTree {
    Real(DualTreePyramidReal2D),
    Complex(DualTreePyramidComplex2D),
}

pub struct DtDualTree(DualTree);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DtStatus {
    match e {
        Error::InvalidLength(_) => DtStatus::InvalidLength,
        Error::UnsupportedSize(_) => DtStatus::UnsupportedSize,
        Error::Structure(_) => DtStatus::Structure,
        Error::OutOfRange(_) => DtStatus::OutOfRange,
        Error::NonFinite { .. } => DtStatus::NonFinite,
        Error::Diverged { .. } => DtStatus::Diverged,
        Error::Undefined(_) => DtStatus::Undefined,
        Error::Parse(_) => DtStatus::Parse,
        Error::Io { .. } => DtStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Small(usize),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DtStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            DtStatus::NullPointer
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("output buffer too small, need {need} values"));
            DtStatus::BufferTooSmall
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            DtStatus::Panic
        }
    }
}

unsafe fn obj<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::Parse(format!("{what} is not UTF-8"))))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn write_out(values: &[f64], out: *mut f64, cap: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    if cap < values.len() {
        return Err(Fail::Small(values.len()));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

unsafe fn image(data: *const f64, rows: usize, cols: usize) -> Result<Image, Fail> {
    let n = rows.checked_mul(cols).ok_or(Fail::Lib(Error::InvalidLength("image too large".into())))?;
    Ok(Image::new(rows, cols, slice(data, n, "data")?.to_vec())?)
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread. Empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn dt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Filter from `len` taps.
///
/// # Safety
/// `taps` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_filter_new(taps: *const f64, len: usize, out: *mut *mut DtFilter) -> DtStatus {
    guard(|| put(out, DtFilter(Filter::new(slice(taps, len, "taps")?.to_vec())?)))
}

/// Filter from a `.flt` file, or a bundled fixture when no such file exists.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_filter_load(path: *const c_char, out: *mut *mut DtFilter) -> DtStatus {
    guard(|| {
        let p = text(path, "path")?;
        let f = if std::path::Path::new(p).exists() { Filter::read(p)? } else { fixtures::load(p)? };
        put(out, DtFilter(f))
    })
}

/// Number of taps, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dt_filter_len(f: *const DtFilter) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the taps into `out` (capacity `cap`).
///
/// # Safety
/// `f` must be a live handle; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_filter_taps(f: *const DtFilter, out: *mut f64, cap: usize) -> DtStatus {
    guard(|| write_out(obj(f, "filter")?.0.taps(), out, cap))
}

/// # Safety
/// `f` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dt_filter_free(f: *mut DtFilter) {
    free(f)
}

/// Distance in `[0, 1]` between two filters, invariant to circular shift,
/// sign and reversal.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_compare_filters(a: *const DtFilter, b: *const DtFilter, out: *mut f64) -> DtStatus {
    guard(|| {
        let d = compare_filters(&obj(a, "a")?.0, &obj(b, "b")?.0)?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        *out = d;
        Ok(())
    })
}

/// Dual-tree filter set from the later-level and first-level filters. The
/// inputs are copied and stay owned by the caller.
///
/// # Safety
/// `h1` and `h1_first` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_filterset_new(h1: *const DtFilter, h1_first: *const DtFilter, out: *mut *mut DtFilterSet) -> DtStatus {
    guard(|| {
        let fs = DualTreeFilterSet::new(obj(h1, "h1")?.0.clone(), obj(h1_first, "h1_first")?.0.clone());
        put(out, DtFilterSet(fs))
    })
}

/// Bundled learned filter set, e.g. `"complex"` or `"real"`.
///
/// # Safety
/// `model` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dt_filterset_fixture(model: *const c_char, out: *mut *mut DtFilterSet) -> DtStatus {
    guard(|| put(out, DtFilterSet(fixtures::learned(text(model, "model")?)?)))
}

/// # Safety
/// `fs` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dt_filterset_free(fs: *mut DtFilterSet) {
    free(fs)
}

/// Separable 2D DWT of a `rows x cols` image.
///
/// # Safety
/// `data` must hold `rows*cols` doubles; `h` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_dwt2d_forward(
    data: *const f64,
    rows: usize,
    cols: usize,
    h: *const DtFilter,
    levels: usize,
    out: *mut *mut DtPyramid,
) -> DtStatus {
    guard(|| {
        let x = image(data, rows, cols)?;
        put(out, DtPyramid(dwt2d_forward(&x, &obj(h, "h")?.0, levels)?))
    })
}

/// Number of levels, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dt_pyramid_levels(p: *const DtPyramid) -> usize {
    p.as_ref().map_or(0, |p| p.0.levels())
}

/// Copies detail band `band` (0 = h, 1 = v, 2 = d) of `level` (1-based),
/// or the approximation when `level` is 0. The band has
/// `(rows >> L) * (cols >> L)` values for `L = level` (or the number of
/// levels for the approximation).
///
/// # Safety
/// `p` must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_pyramid_band(p: *const DtPyramid, level: usize, band: usize, out: *mut f64, cap: usize) -> DtStatus {
    guard(|| {
        let p = &obj(p, "pyramid")?.0;
        let img = if level == 0 {
            &p.approx
        } else {
            if level > p.levels() || band > 2 {
                return Err(Error::OutOfRange(format!("no band {band} at level {level}")).into());
            }
            p.level(level).get(band)
        };
        write_out(img.data(), out, cap)
    })
}

/// Inverse DWT into `out` (capacity `cap`, at least `rows*cols`).
///
/// # Safety
/// `p` and `h` must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_dwt2d_inverse(p: *const DtPyramid, h: *const DtFilter, out: *mut f64, cap: usize) -> DtStatus {
    guard(|| {
        let y = dwt2d_inverse(&obj(p, "pyramid")?.0, &obj(h, "h")?.0)?;
        write_out(y.data(), out, cap)
    })
}

/// # Safety
/// `p` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dt_pyramid_free(p: *mut DtPyramid) {
    free(p)
}

/// Real or complex dual-tree transform of a `rows x cols` image.
///
/// # Safety
/// `data` must hold `rows*cols` doubles; `fs` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dt_dualtree_forward(
    data: *const f64,
    rows: usize,
    cols: usize,
    fs: *const DtFilterSet,
    levels: usize,
    variant: DtVariant,
    out: *mut *mut DtDualTree,
) -> DtStatus {
    guard(|| {
        let x = image(data, rows, cols)?;
        let fs = &obj(fs, "filterset")?.0;
        let t = match variant {
            DtVariant::Real => DualTree::Real(dtcwt2d_real_forward(&x, fs, levels)?),
            DtVariant::Complex => DualTree::Complex(dtcwt2d_complex_forward(&x, fs, levels)?),
        };
        put(out, DtDualTree(t))
    })
}

/// Copies band `band` (1..=6) of `level` (1-based). `im` receives the
/// imaginary part for the complex transform and may be null otherwise.
/// Each part has `(rows >> level) * (cols >> level)` values.
///
/// # Safety
/// `t` must be live; `re` (and `im` when used) must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_dualtree_band(
    t: *const DtDualTree,
    level: usize,
    band: usize,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> DtStatus {
    guard(|| {
        let t = &obj(t, "dualtree")?.0;
        let levels = match t {
            DualTree::Real(p) => p.levels(),
            DualTree::Complex(p) => p.levels(),
        };
        if level == 0 || level > levels || !(1..=6).contains(&band) {
            return Err(Error::OutOfRange(format!("no band {band} at level {level}")).into());
        }
        match t {
            DualTree::Real(p) => write_out(p.band(level, band).data(), re, cap),
            DualTree::Complex(p) => {
                let b = p.band(level, band);
                write_out(b.re.data(), re, cap)?;
                write_out(b.im.data(), im, cap)
            }
        }
    })
}

/// Inverse dual-tree transform into `out` (capacity `cap`).
///
/// # Safety
/// `t` and `fs` must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn dt_dualtree_inverse(t: *const DtDualTree, fs: *const DtFilterSet, out: *mut f64, cap: usize) -> DtStatus {
    guard(|| {
        let fs = &obj(fs, "filterset")?.0;
        let y = match &obj(t, "dualtree")?.0 {
            DualTree::Real(p) => dtcwt2d_real_inverse(p, fs)?,
            DualTree::Complex(p) => dtcwt2d_complex_inverse(p, fs)?,
        };
        write_out(y.data(), out, cap)
    })
}

/// # Safety
/// `t` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dt_dualtree_free(t: *mut DtDualTree) {
    free(t)
}
