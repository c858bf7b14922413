//! C ABI for the `qds-core` toolkit.
//!
//! Conventions:
//! - Channels are opaque handles created by the `qds_channel_*` constructors
//!   and released with [`qds_channel_free`].
//! - Every fallible function returns a [`QdsStatus`]; on any non-`Ok` status
//!   a human-readable message is available via [`qds_last_error`].
//! - Matrices cross the boundary as row-major interleaved doubles
//!   `[re00, im00, re01, im01, ...]` of length `2 * dim * dim`.
//! - Strings returned by the library are UTF-8, NUL-terminated, and must be
//!   released with [`qds_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qds_core::channels::{self, Channel};
use qds_core::entropy;
use qds_core::majorization;
use qds_core::matcore::{ComplexMatrix, DensityMatrix};
use qds_core::norms::{self, AscentOptions};
use qds_core::Tolerances;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// An argument failed validation (bad JSON, bad dimension, non-density
    /// input, unknown name, ...).
    InvalidArgument = 2,
    /// The computation ran but a mathematical precondition failed
    /// (e.g. the channel is not QDS where one is required).
    PropertyViolation = 3,
    /// Unexpected internal failure.
    Internal = 4,
}

/// Opaque channel handle.
pub struct QdsChannel {
    inner: Channel,
}

/// Certification record mirrored as a plain C struct.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdsCertification {
    pub tp_residual: f64,
    pub unital_residual: f64,
    pub choi_min_eig: f64,
    /// 1 when all QDS axioms hold within tolerance, else 0.
    pub is_qds: i32,
}

/// Induced-norm result mirrored as a plain C struct.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdsNormBounds {
    pub lower_bound: f64,
    pub upper_bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: QdsStatus, msg: impl Into<String>) -> QdsStatus {
    set_error(msg.into());
    status
}

/// Run `f`, translating panics into `Internal` instead of unwinding across
/// the FFI boundary.
fn guarded(f: impl FnOnce() -> QdsStatus) -> QdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(QdsStatus::Internal, "internal panic"),
    }
}

fn default_opts(seed: u64) -> AscentOptions {
    AscentOptions {
        seed,
        ..AscentOptions::default()
    }
}

/// # Safety
/// `ptr` must be NULL or a valid NUL-terminated UTF-8 string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, QdsStatus> {
    if ptr.is_null() {
        return Err(fail(QdsStatus::NullPointer, "NULL string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(QdsStatus::InvalidArgument, "string is not valid UTF-8"))
}

/// # Safety
/// `data` must point to `2 * dim * dim` doubles.
unsafe fn read_matrix(data: *const f64, dim: usize) -> Result<ComplexMatrix, QdsStatus> {
    if data.is_null() {
        return Err(fail(QdsStatus::NullPointer, "NULL matrix argument"));
    }
    if dim == 0 {
        return Err(fail(QdsStatus::InvalidArgument, "dimension must be positive"));
    }
    let slice = std::slice::from_raw_parts(data, 2 * dim * dim);
    let pairs: Vec<(f64, f64)> = slice.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    ComplexMatrix::from_pairs(dim, &pairs)
        .map_err(|e| fail(QdsStatus::InvalidArgument, e.to_string()))
}

unsafe fn read_density(
    data: *const f64,
    dim: usize,
    tol: &Tolerances,
) -> Result<DensityMatrix, QdsStatus> {
    let m = read_matrix(data, dim)?;
    DensityMatrix::from_matrix(m, tol).map_err(|e| fail(QdsStatus::InvalidArgument, e.to_string()))
}

unsafe fn channel_ref<'a>(handle: *const QdsChannel) -> Result<&'a Channel, QdsStatus> {
    if handle.is_null() {
        return Err(fail(QdsStatus::NullPointer, "NULL channel handle"));
    }
    Ok(&(*handle).inner)
}

fn emit_channel(channel: Channel, out: *mut *mut QdsChannel) -> QdsStatus {
    if out.is_null() {
        return fail(QdsStatus::NullPointer, "NULL output handle");
    }
    unsafe {
        *out = Box::into_raw(Box::new(QdsChannel { inner: channel }));
    }
    clear_error();
    QdsStatus::Ok
}

/// Copy the most recent error message for the calling thread into `buf`
/// (truncating if needed, always NUL-terminated). Returns the full message
/// length in bytes, or 0 when no error is recorded.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qds_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static string (do not free).
#[no_mangle]
pub extern "C" fn qds_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by a `qds_*` function
/// documented to require `qds_string_free`.
#[no_mangle]
pub unsafe extern "C" fn qds_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a channel from its JSON wire form.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_from_json(
    json: *const c_char,
    out: *mut *mut QdsChannel,
) -> QdsStatus {
    guarded(|| {
        let json = match read_str(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match serde_json::from_str::<Channel>(json) {
            Ok(channel) => emit_channel(channel, out),
            Err(e) => fail(QdsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Serialize a channel to its JSON wire form. The returned string must be
/// released with `qds_string_free`.
///
/// # Safety
/// `channel` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_to_json(
    channel: *const QdsChannel,
    out: *mut *mut c_char,
) -> QdsStatus {
    guarded(|| {
        let channel = match channel_ref(channel) {
            Ok(c) => c,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output pointer");
        }
        match serde_json::to_string_pretty(channel) {
            Ok(s) => match CString::new(s) {
                Ok(c) => {
                    *out = c.into_raw();
                    clear_error();
                    QdsStatus::Ok
                }
                Err(_) => fail(QdsStatus::Internal, "serialized JSON contained NUL"),
            },
            Err(e) => fail(QdsStatus::Internal, e.to_string()),
        }
    })
}

/// Construct the depolarizing channel with parameter `t` on dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_depolarizing(
    t: f64,
    n: usize,
    out: *mut *mut QdsChannel,
) -> QdsStatus {
    guarded(|| match channels::depolarizing(t, n) {
        Ok(channel) => emit_channel(channel, out),
        Err(e) => fail(QdsStatus::InvalidArgument, e.to_string()),
    })
}

/// Construct the pinching channel on dimension `n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_pinching(n: usize, out: *mut *mut QdsChannel) -> QdsStatus {
    guarded(|| {
        if n == 0 {
            return fail(QdsStatus::InvalidArgument, "dimension must be positive");
        }
        emit_channel(channels::pinching(n), out)
    })
}

/// Construct a random mixed-unitary channel (`count` unitaries, seeded).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_random_mixed_unitary(
    n: usize,
    count: usize,
    seed: u64,
    out: *mut *mut QdsChannel,
) -> QdsStatus {
    guarded(|| {
        if n == 0 || count == 0 {
            return fail(
                QdsStatus::InvalidArgument,
                "dimension and count must be positive",
            );
        }
        let tol = Tolerances::default();
        let mut rng = qds_core::rng::rng_from_seed(seed);
        emit_channel(
            channels::random_mixed_unitary(n, count, &mut rng, &tol),
            out,
        )
    })
}

/// Release a channel handle.
///
/// # Safety
/// `channel` must be NULL or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_free(channel: *mut QdsChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Hilbert-space dimension of the channel, or 0 when the handle is NULL.
///
/// # Safety
/// `channel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_dim(channel: *const QdsChannel) -> usize {
    match channel_ref(channel) {
        Ok(c) => c.dim(),
        Err(_) => 0,
    }
}

/// Certify the QDS axioms with default tolerances.
///
/// # Safety
/// `channel` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_certify(
    channel: *const QdsChannel,
    out: *mut QdsCertification,
) -> QdsStatus {
    guarded(|| {
        let channel = match channel_ref(channel) {
            Ok(c) => c,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output pointer");
        }
        let report = channel.certify(&Tolerances::default());
        *out = QdsCertification {
            tp_residual: report.tp_residual,
            unital_residual: report.unital_residual,
            choi_min_eig: report.choi_min_eig,
            is_qds: report.is_qds as i32,
        };
        clear_error();
        QdsStatus::Ok
    })
}

/// Apply the channel to a matrix. `input` and `output` are row-major
/// interleaved buffers of length `2 * dim * dim`; they may not alias.
///
/// # Safety
/// `channel` must be a live handle; both buffers must have the documented
/// length.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_apply(
    channel: *const QdsChannel,
    input: *const f64,
    output: *mut f64,
) -> QdsStatus {
    guarded(|| {
        let channel = match channel_ref(channel) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let n = channel.dim();
        let x = match read_matrix(input, n) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if output.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output buffer");
        }
        let y = match channel.apply(&x) {
            Ok(y) => y,
            Err(e) => return fail(QdsStatus::Internal, e.to_string()),
        };
        let m = y.as_ref();
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                *output.add(2 * (i * n + j)) = z.re;
                *output.add(2 * (i * n + j) + 1) = z.im;
            }
        }
        clear_error();
        QdsStatus::Ok
    })
}

/// Certified lower/upper bounds on the induced p->p norm (use `p = INFINITY`
/// for the sup norm).
///
/// # Safety
/// `channel` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_induced_norm(
    channel: *const QdsChannel,
    p: f64,
    seed: u64,
    out: *mut QdsNormBounds,
) -> QdsStatus {
    guarded(|| {
        let channel = match channel_ref(channel) {
            Ok(c) => c,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output pointer");
        }
        let tol = Tolerances::default();
        match norms::induced_norm(channel, p, &tol, &default_opts(seed)) {
            Ok(result) => {
                *out = QdsNormBounds {
                    lower_bound: result.lower_bound,
                    upper_bound: result.upper_bound,
                };
                clear_error();
                QdsStatus::Ok
            }
            Err(e) => fail(QdsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Entropy change `S(Phi(rho)) - S(rho)` in nats. `rho` is a row-major
/// interleaved density matrix of the channel's dimension. Fails with
/// `PropertyViolation` when the channel is not QDS.
///
/// # Safety
/// `channel` must be a live handle; `rho` a buffer of `2 * dim * dim`
/// doubles; `out_delta` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_channel_entropy_delta(
    channel: *const QdsChannel,
    rho: *const f64,
    out_delta: *mut f64,
) -> QdsStatus {
    guarded(|| {
        let channel = match channel_ref(channel) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let tol = Tolerances::default();
        let rho = match read_density(rho, channel.dim(), &tol) {
            Ok(r) => r,
            Err(status) => return status,
        };
        if out_delta.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output pointer");
        }
        match entropy::entropy_monotonicity_check(channel, &rho, &tol) {
            Ok(report) => {
                *out_delta = report.delta;
                clear_error();
                QdsStatus::Ok
            }
            Err(e) => fail(QdsStatus::PropertyViolation, e.to_string()),
        }
    })
}

/// Whether the spectrum of `sigma` majorizes the spectrum of `rho`
/// (both row-major interleaved `dim x dim` density matrices). Writes 1 or 0.
///
/// # Safety
/// `rho` and `sigma` must be buffers of `2 * dim * dim` doubles; `out_holds`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qds_majorization_holds(
    rho: *const f64,
    sigma: *const f64,
    dim: usize,
    out_holds: *mut i32,
) -> QdsStatus {
    guarded(|| {
        let tol = Tolerances::default();
        let rho = match read_density(rho, dim, &tol) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let sigma = match read_density(sigma, dim, &tol) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_holds.is_null() {
            return fail(QdsStatus::NullPointer, "NULL output pointer");
        }
        match majorization::check_majorization(&rho, &sigma, &tol) {
            Ok(cert) => {
                *out_holds = cert.holds as i32;
                clear_error();
                QdsStatus::Ok
            }
            Err(e) => fail(QdsStatus::Internal, e.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    fn last_error_string() -> String {
        let mut buf = vec![0i8; 256];
        let n = unsafe { qds_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
        let bytes: Vec<u8> = buf[..n.min(buf.len() - 1)]
            .iter()
            .map(|&b| b as u8)
            .collect();
        String::from_utf8_lossy(&bytes).into_owned()
    }

    #[test]
    fn depolarizing_round_trip_and_certify() {
        let mut handle: *mut QdsChannel = ptr::null_mut();
        let status = unsafe { qds_channel_depolarizing(0.5, 3, &mut handle) };
        assert_eq!(status, QdsStatus::Ok);
        assert_eq!(unsafe { qds_channel_dim(handle) }, 3);

        let mut cert = QdsCertification {
            tp_residual: f64::NAN,
            unital_residual: f64::NAN,
            choi_min_eig: f64::NAN,
            is_qds: -1,
        };
        assert_eq!(
            unsafe { qds_channel_certify(handle, &mut cert) },
            QdsStatus::Ok
        );
        assert_eq!(cert.is_qds, 1);
        assert!(cert.tp_residual < 1e-10);

        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(
            unsafe { qds_channel_to_json(handle, &mut json) },
            QdsStatus::Ok
        );
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
        unsafe { qds_string_free(json) };

        let c = CString::new(text).unwrap();
        let mut back: *mut QdsChannel = ptr::null_mut();
        assert_eq!(
            unsafe { qds_channel_from_json(c.as_ptr(), &mut back) },
            QdsStatus::Ok
        );
        assert_eq!(unsafe { qds_channel_dim(back) }, 3);
        unsafe {
            qds_channel_free(handle);
            qds_channel_free(back);
        }
    }

    #[test]
    fn apply_matches_depolarizing_action() {
        let mut handle: *mut QdsChannel = ptr::null_mut();
        unsafe { qds_channel_depolarizing(0.0, 2, &mut handle) };
        // |0><0| -> I/2 under full depolarizing (t = 0).
        let input = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut output = [f64::NAN; 8];
        assert_eq!(
            unsafe { qds_channel_apply(handle, input.as_ptr(), output.as_mut_ptr()) },
            QdsStatus::Ok
        );
        assert!((output[0] - 0.5).abs() < 1e-12);
        assert!((output[6] - 0.5).abs() < 1e-12);
        assert!(output[2].abs() < 1e-12 && output[4].abs() < 1e-12);
        unsafe { qds_channel_free(handle) };
    }

    #[test]
    fn induced_norm_of_qds_channel_is_one() {
        let mut handle: *mut QdsChannel = ptr::null_mut();
        unsafe { qds_channel_random_mixed_unitary(3, 3, 7, &mut handle) };
        let mut bounds = QdsNormBounds {
            lower_bound: f64::NAN,
            upper_bound: f64::NAN,
        };
        assert_eq!(
            unsafe { qds_channel_induced_norm(handle, 2.0, 7, &mut bounds) },
            QdsStatus::Ok
        );
        assert!((bounds.lower_bound - 1.0).abs() < 1e-8);
        assert!(bounds.lower_bound <= bounds.upper_bound + 1e-12);
        unsafe { qds_channel_free(handle) };
    }

    #[test]
    fn entropy_and_majorization_helpers() {
        let mut handle: *mut QdsChannel = ptr::null_mut();
        unsafe { qds_channel_pinching(2, &mut handle) };
        let plus = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0];
        let mut delta = f64::NAN;
        assert_eq!(
            unsafe { qds_channel_entropy_delta(handle, plus.as_ptr(), &mut delta) },
            QdsStatus::Ok
        );
        assert!((delta - std::f64::consts::LN_2).abs() < 1e-10);
        unsafe { qds_channel_free(handle) };

        let maximally_mixed = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0];
        let pure = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut holds = -1i32;
        assert_eq!(
            unsafe {
                qds_majorization_holds(
                    maximally_mixed.as_ptr(),
                    pure.as_ptr(),
                    2,
                    &mut holds,
                )
            },
            QdsStatus::Ok
        );
        assert_eq!(holds, 1);
        assert_eq!(
            unsafe {
                qds_majorization_holds(pure.as_ptr(), maximally_mixed.as_ptr(), 2, &mut holds)
            },
            QdsStatus::Ok
        );
        assert_eq!(holds, 0);
    }

    #[test]
    fn error_paths_set_status_and_message() {
        let mut handle: *mut QdsChannel = ptr::null_mut();
        let bad = CString::new("not json").unwrap();
        assert_eq!(
            unsafe { qds_channel_from_json(bad.as_ptr(), &mut handle) },
            QdsStatus::InvalidArgument
        );
        assert!(!last_error_string().is_empty());
        assert_eq!(
            unsafe { qds_channel_from_json(ptr::null(), &mut handle) },
            QdsStatus::NullPointer
        );
        assert_eq!(
            unsafe { qds_channel_depolarizing(2.0, 3, &mut handle) },
            QdsStatus::InvalidArgument
        );
        let mut cert = QdsCertification {
            tp_residual: 0.0,
            unital_residual: 0.0,
            choi_min_eig: 0.0,
            is_qds: 0,
        };
        assert_eq!(
            unsafe { qds_channel_certify(ptr::null(), &mut cert) },
            QdsStatus::NullPointer
        );
        assert_eq!(unsafe { qds_channel_dim(ptr::null()) }, 0);
    }

    #[test]
    fn version_string_is_static() {
        let v = unsafe { CStr::from_ptr(qds_version()) }.to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
