//! C ABI for emdkit.
//!
//! Every fallible call returns an [`EmdkitStatus`]; on failure the message
//! is available from [`emdkit_last_error`] on the same thread. Decompositions
//! are returned as opaque [`EmdkitDecomposition`] handles owned by the caller
//! and released with [`emdkit_decomposition_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use emdkit::hsa::analytic_signal;
use emdkit::{decompose, ortho_report, Decomposition, EemdConfig, EmdError, SampledSignal, SiftConfig, Variant};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmdkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    NoEnvelope = 4,
    RankDeficient = 5,
    UndefinedRatio = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmdkitVariant {
    Emd = 0,
    Eemd = 1,
    Epemd = 2,
    Memd = 3,
    Epmemd = 4,
    Oimf = 5,
    Foimf = 6,
    Roimf = 7,
    Fouimf = 8,
    Rouimf = 9,
}

impl From<EmdkitVariant> for Variant {
    fn from(v: EmdkitVariant) -> Self {
        match v {
            EmdkitVariant::Emd => Variant::Emd,
            EmdkitVariant::Eemd => Variant::Eemd,
            EmdkitVariant::Epemd => Variant::Epemd,
            EmdkitVariant::Memd => Variant::Memd,
            EmdkitVariant::Epmemd => Variant::Epmemd,
            EmdkitVariant::Oimf => Variant::Oimf,
            EmdkitVariant::Foimf => Variant::Foimf,
            EmdkitVariant::Roimf => Variant::Roimf,
            EmdkitVariant::Fouimf => Variant::Fouimf,
            EmdkitVariant::Rouimf => Variant::Rouimf,
        }
    }
}

/// Sifting and ensemble parameters. Fill with [`emdkit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmdkitOptions {
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    /// Zero means no limit.
    pub max_imfs: usize,
    pub noise_stddev_ratio: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmdkitOrthoSummary {
    pub io_total: f64,
    pub pee: f64,
    pub signal_energy: f64,
    pub total_component_energy: f64,
    pub reconstruction_error: f64,
}

/// Opaque decomposition handle; keeps the input signal for reporting.
pub struct EmdkitDecomposition {
    input: SampledSignal,
    inner: Decomposition,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: EmdkitStatus, msg: impl Into<String>) -> EmdkitStatus {
    set_error(msg);
    status
}

fn from_error(e: EmdError) -> EmdkitStatus {
    let status = match e {
        EmdError::InsufficientData { .. } => EmdkitStatus::InsufficientData,
        EmdError::NoEnvelope => EmdkitStatus::NoEnvelope,
        EmdError::RankDeficient { .. } => EmdkitStatus::RankDeficient,
        EmdError::UndefinedRatio(_) => EmdkitStatus::UndefinedRatio,
        _ => EmdkitStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> EmdkitStatus) -> EmdkitStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(EmdkitStatus::Panic, "internal panic"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable doubles.
unsafe fn input_slice<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], EmdkitStatus> {
    if ptr.is_null() {
        return Err(fail(EmdkitStatus::NullPointer, "samples pointer is null"));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emdkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// NUL-terminated library version.
#[no_mangle]
pub extern "C" fn emdkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or point to writable storage for one `EmdkitOptions`.
#[no_mangle]
pub unsafe extern "C" fn emdkit_options_default(out: *mut EmdkitOptions) -> EmdkitStatus {
    if out.is_null() {
        return fail(EmdkitStatus::NullPointer, "options pointer is null");
    }
    let s = SiftConfig::default();
    let e = EemdConfig::default();
    out.write(EmdkitOptions {
        sd_threshold: s.sd_threshold,
        max_sift_iterations: s.max_sift_iterations,
        max_imfs: s.max_imfs,
        noise_stddev_ratio: e.noise_stddev_ratio,
        ensemble_size: e.ensemble_size,
        seed: e.rng_seed,
    });
    EmdkitStatus::Ok
}

/// Decomposes `len` samples taken at `sample_rate` Hz. `options` may be
/// null for defaults. On success `*out` receives a new handle.
///
/// # Safety
/// `samples` must point to `len` readable doubles, `options` must be null
/// or valid, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decompose(
    samples: *const f64,
    len: usize,
    sample_rate: f64,
    variant: EmdkitVariant,
    options: *const EmdkitOptions,
    out: *mut *mut EmdkitDecomposition,
) -> EmdkitStatus {
    guard(|| {
        if out.is_null() {
            return fail(EmdkitStatus::NullPointer, "output pointer is null");
        }
        out.write(ptr::null_mut());
        let data = match input_slice(samples, len) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let mut opts = EmdkitOptions {
            sd_threshold: 0.0,
            max_sift_iterations: 0,
            max_imfs: 0,
            noise_stddev_ratio: 0.0,
            ensemble_size: 0,
            seed: 0,
        };
        if options.is_null() {
            emdkit_options_default(&mut opts);
        } else {
            opts = options.read();
        }
        let run = || -> emdkit::Result<EmdkitDecomposition> {
            let sift = SiftConfig::new(opts.sd_threshold, opts.max_sift_iterations, opts.max_imfs)?;
            let ens = EemdConfig::new(opts.noise_stddev_ratio, opts.ensemble_size, opts.seed)?;
            let input = SampledSignal::new(data.to_vec(), sample_rate)?;
            let inner = decompose(&input, variant.into(), &sift, &ens)?;
            Ok(EmdkitDecomposition { input, inner })
        };
        match run() {
            Ok(d) => {
                out.write(Box::into_raw(Box::new(d)));
                EmdkitStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `handle` must be null or a pointer returned by [`emdkit_decompose`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_free(handle: *mut EmdkitDecomposition) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of IMFs (the residue is not counted).
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_imf_count(handle: *const EmdkitDecomposition) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.imfs.len())
}

/// Samples per component.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_len(handle: *const EmdkitDecomposition) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.len())
}

/// Constant split off by the mean-removed orderings; zero otherwise.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_dc_constant(handle: *const EmdkitDecomposition) -> f64 {
    handle.as_ref().map_or(f64::NAN, |h| h.inner.dc_constant)
}

/// Copies component `index` into `out`. Indices below the IMF count select
/// IMFs; the index equal to it selects the residue.
///
/// # Safety
/// `handle` must be a live handle and `out` must point to `out_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_copy_component(
    handle: *const EmdkitDecomposition,
    index: usize,
    out: *mut f64,
    out_len: usize,
) -> EmdkitStatus {
    let Some(h) = handle.as_ref() else {
        return fail(EmdkitStatus::NullPointer, "handle is null");
    };
    if out.is_null() {
        return fail(EmdkitStatus::NullPointer, "output buffer is null");
    }
    let d = &h.inner;
    let comp = match index.cmp(&d.imfs.len()) {
        std::cmp::Ordering::Less => &d.imfs[index],
        std::cmp::Ordering::Equal => &d.residue,
        std::cmp::Ordering::Greater => {
            return fail(
                EmdkitStatus::OutOfRange,
                format!("component {index} out of range (0..={})", d.imfs.len()),
            )
        }
    };
    if out_len < comp.len() {
        return fail(
            EmdkitStatus::OutOfRange,
            format!("buffer holds {out_len} values, {} needed", comp.len()),
        );
    }
    ptr::copy_nonoverlapping(comp.samples().as_ptr(), out, comp.len());
    EmdkitStatus::Ok
}

/// Leakage summary of the decomposition against its input.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emdkit_decomposition_ortho_summary(
    handle: *const EmdkitDecomposition,
    out: *mut EmdkitOrthoSummary,
) -> EmdkitStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return fail(EmdkitStatus::NullPointer, "handle is null");
        };
        if out.is_null() {
            return fail(EmdkitStatus::NullPointer, "output pointer is null");
        }
        match ortho_report(&h.input, &h.inner) {
            Ok(r) => {
                out.write(EmdkitOrthoSummary {
                    io_total: r.io_total,
                    pee: r.pee,
                    signal_energy: r.signal_energy,
                    total_component_energy: r.total_component_energy,
                    reconstruction_error: r.reconstruction_error,
                });
                EmdkitStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Instantaneous amplitude and frequency (Hz) of `len` samples. Either
/// output may be null; non-null outputs must hold `len` doubles.
///
/// # Safety
/// `samples` must point to `len` readable doubles; non-null outputs must
/// point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn emdkit_analytic_signal(
    samples: *const f64,
    len: usize,
    sample_rate: f64,
    amplitude: *mut f64,
    inst_freq: *mut f64,
) -> EmdkitStatus {
    guard(|| {
        let data = match input_slice(samples, len) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let attrs = match SampledSignal::new(data.to_vec(), sample_rate).and_then(|x| analytic_signal(&x)) {
            Ok(a) => a,
            Err(e) => return from_error(e),
        };
        if !amplitude.is_null() {
            ptr::copy_nonoverlapping(attrs.amplitude.as_ptr(), amplitude, len);
        }
        if !inst_freq.is_null() {
            ptr::copy_nonoverlapping(attrs.inst_freq.as_ptr(), inst_freq, len);
        }
        EmdkitStatus::Ok
    })
}
