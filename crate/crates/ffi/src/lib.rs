//! C ABI over the zde core.
//!
//! Every function returns a [`ZdeStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`zde_last_error_message`]. Measures and block sets are opaque handles
//! that the caller releases with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use zde::construction::{sample_point, BlockSubshift};
use zde::counting::{binary_entropy, ln_big, q_count_volume};
use zde::lattice::{compose, LatticeBox, LatticeMode};
use zde::measures::{bernoulli, metric_d, CylinderMeasure};
use zde::separation::katok_entropy;
use zde::symbolic::{read_blockset, write_blockset};
use zde::Error;

pub const ZDE_MODE_POSITIVE: u32 = 0;
pub const ZDE_MODE_FULL: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZdeStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    Infeasible = 3,
    SamplingExhausted = 4,
    TooLarge = 5,
    InsufficientDepth = 6,
    NoTrace = 7,
    Io = 8,
    NullPointer = 9,
    Panic = 10,
}

/// Opaque cylinder measure.
pub struct ZdeMeasure(CylinderMeasure);

/// Opaque block set Γ_M with its optional sidecar metadata.
pub struct ZdeBlockSet(BlockSubshift);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ZdeStatus {
    match e {
        Error::InvalidArgument(_) => ZdeStatus::InvalidArgument,
        Error::Parse { .. } | Error::SymbolOutOfRange { .. } => ZdeStatus::Parse,
        Error::InsufficientDepth { .. } => ZdeStatus::InsufficientDepth,
        Error::Infeasible(_) => ZdeStatus::Infeasible,
        Error::SamplingExhausted { .. } => ZdeStatus::SamplingExhausted,
        Error::TooLarge(_) => ZdeStatus::TooLarge,
        Error::NoTrace(_) => ZdeStatus::NoTrace,
        Error::Io(_) => ZdeStatus::Io,
    }
}

struct Fail(ZdeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(ZdeStatus::NullPointer, "null pointer argument".into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ZdeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ZdeStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ZdeStatus::Panic
        }
    }
}

fn mode_of(mode: u32) -> Result<LatticeMode, Fail> {
    match mode {
        ZDE_MODE_POSITIVE => Ok(LatticeMode::Positive),
        ZDE_MODE_FULL => Ok(LatticeMode::Full),
        m => Err(Fail(ZdeStatus::InvalidArgument, format!("unknown lattice mode {m}"))),
    }
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ZdeStatus::InvalidArgument, "string is not UTF-8".into()))
}

/// Message of the last failure on this thread. Valid until the next call.
#[no_mangle]
pub extern "C" fn zde_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// V_n = |Λ_n|.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zde_box_volume(dim: usize, mode: u32, radius: u64, out: *mut u64) -> ZdeStatus {
    guard(|| {
        let bx = LatticeBox::new(dim, mode_of(mode)?, radius)?;
        let v = bx.volume_u64().ok_or_else(|| Fail(ZdeStatus::TooLarge, format!("V = {} overflows u64", bx.volume())))?;
        put(out, v)
    })
}

/// The radius m*n with Λ_{m*n} tiled by V_n translates of Λ_m.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zde_compose(m: u64, n: u64, mode: u32, out: *mut u64) -> ZdeStatus {
    guard(|| put(out, compose(m, n, mode_of(mode)?)))
}

/// -δ ln δ - (1-δ) ln(1-δ).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zde_binary_entropy(delta: f64, out: *mut f64) -> ZdeStatus {
    guard(|| put(out, binary_entropy(delta)?))
}

/// ln Q for a box of the given volume, and the bound H(δ) on ln Q / V.
///
/// # Safety
/// Both out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn zde_q_count_log(volume: u64, delta: f64, out_log: *mut f64, out_bound: *mut f64) -> ZdeStatus {
    guard(|| {
        let q = q_count_volume(volume, delta)?;
        put(out_log, q.log_value)?;
        put(out_bound, q.bound)
    })
}

/// Bernoulli measure with one-site vector `p`, cylinders through `depth`.
///
/// # Safety
/// `p` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zde_measure_bernoulli(
    p: *const f64,
    len: usize,
    depth: u64,
    dim: usize,
    mode: u32,
    out: *mut *mut ZdeMeasure,
) -> ZdeStatus {
    guard(|| {
        if p.is_null() {
            return Err(null());
        }
        let probs = std::slice::from_raw_parts(p, len);
        let mu = bernoulli(probs, depth, dim, mode_of(mode)?)?;
        put(out, Box::into_raw(Box::new(ZdeMeasure(mu))))
    })
}

/// # Safety
/// `mu` must come from `zde_measure_bernoulli` and not be freed already. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zde_measure_free(mu: *mut ZdeMeasure) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

/// Truncated D(μ,ν) through `depth`; the true value lies in [value, value + tail].
///
/// # Safety
/// Handles must be live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn zde_metric_d(
    mu: *const ZdeMeasure,
    nu: *const ZdeMeasure,
    depth: u64,
    out_value: *mut f64,
    out_tail: *mut f64,
) -> ZdeStatus {
    guard(|| {
        let (a, b) = (mu.as_ref().ok_or_else(null)?, nu.as_ref().ok_or_else(null)?);
        let d = metric_d(&a.0, &b.0, depth)?;
        put(out_value, d.value)?;
        put(out_tail, d.tail_bound)
    })
}

/// Katok estimate ln r / V_n, with ln r alongside.
///
/// # Safety
/// `mu` must be live; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn zde_katok_entropy(
    mu: *const ZdeMeasure,
    n: u64,
    epsilon: f64,
    delta: f64,
    out_estimate: *mut f64,
    out_ln_r: *mut f64,
) -> ZdeStatus {
    guard(|| {
        let m = mu.as_ref().ok_or_else(null)?;
        let k = katok_entropy(&m.0, n, epsilon, delta)?;
        put(out_estimate, k.estimate)?;
        put(out_ln_r, ln_big(&k.r))
    })
}

/// Reads a block file, plus `<path>.meta` when present.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_read(path: *const c_char, out: *mut *mut ZdeBlockSet) -> ZdeStatus {
    guard(|| {
        let sub = zde::cli::load_subshift(Path::new(str_arg(path)?))?;
        put(out, Box::into_raw(Box::new(ZdeBlockSet(sub))))
    })
}

/// Parses block-file text (no sidecar).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_parse(text: *const c_char, out: *mut *mut ZdeBlockSet) -> ZdeStatus {
    guard(|| {
        let file = read_blockset(str_arg(text)?)?;
        let sub = BlockSubshift::from_file(file, None)?;
        put(out, Box::into_raw(Box::new(ZdeBlockSet(sub))))
    })
}

/// Writes the block file in canonical order. The sidecar is not written.
///
/// # Safety
/// `set` must be live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_write(set: *const ZdeBlockSet, path: *const c_char) -> ZdeStatus {
    guard(|| {
        let s = set.as_ref().ok_or_else(null)?;
        std::fs::write(str_arg(path)?, write_blockset(&s.0.to_file())).map_err(Error::from)?;
        Ok(())
    })
}

/// # Safety
/// `set` must come from a `zde_blockset_*` constructor and not be freed already. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_free(set: *mut ZdeBlockSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// |Γ_M|.
///
/// # Safety
/// `set` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_len(set: *const ZdeBlockSet, out: *mut usize) -> ZdeStatus {
    guard(|| put(out, set.as_ref().ok_or_else(null)?.0.len()))
}

/// ln|Γ_M| / V_M.
///
/// # Safety
/// `set` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn zde_blockset_entropy(set: *const ZdeBlockSet, out: *mut f64) -> ZdeStatus {
    guard(|| put(out, set.as_ref().ok_or_else(null)?.0.exact_entropy()))
}

/// The Λ_radius pattern of the seeded Δ-point, row-major, as `zde sample` prints it.
///
/// `out_needed` always receives the pattern size; when `cap` is smaller
/// nothing is copied and the call fails with `InvalidArgument`.
///
/// # Safety
/// `set` must be live; `buf` must hold `cap` bytes; `out_needed` writable.
#[no_mangle]
pub unsafe extern "C" fn zde_sample_window(
    set: *const ZdeBlockSet,
    seed: u64,
    radius: u64,
    buf: *mut u8,
    cap: usize,
    out_needed: *mut usize,
) -> ZdeStatus {
    guard(|| {
        let sub = &set.as_ref().ok_or_else(null)?.0;
        let (_, _, z) = sample_point(sub, seed, 0)?;
        let bx = LatticeBox::new(sub.dim(), sub.mode(), radius)?;
        let symbols = z.window(&bx, &vec![0; sub.dim()])?;
        put(out_needed, symbols.len())?;
        if cap < symbols.len() {
            return Err(Fail(ZdeStatus::InvalidArgument, format!("buffer holds {cap}, need {}", symbols.len())));
        }
        if buf.is_null() {
            return Err(null());
        }
        std::ptr::copy_nonoverlapping(symbols.as_ptr(), buf, symbols.len());
        Ok(())
    })
}
