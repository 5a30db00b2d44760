//! C interface to the hrload core.
//!
//! Every fallible function returns an [`HrlStatus`]; on failure a message is
//! kept per thread and can be copied out with [`hrl_last_error_message`].
//! Objects are opaque handles created by `*_new` / `*_load` functions and
//! released by the matching `*_free`. Passing NULL to a `*_free` is a no-op.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hrload::activity::artifact::ModelArtifact;
use hrload::activity::evaluate::Predictor;
use hrload::bootstrap::{bootstrap_cloud, BootstrapCloud, BootstrapConfig};
use hrload::ingest::{hb_to_hr, hr_to_hb};
use hrload::moments::{batch_moments, MomentAccumulator, MomentSummary, WindowAccumulator};
use hrload::pearson::{classify_region, metric1, metric2, to_pearson, PearsonPoint, Region};
use hrload::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    Degenerate = 4,
    NonFinite = 5,
    Parse = 6,
    Schema = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrlRegion {
    Infeasible = 0,
    NearNormal = 1,
    NearUniform = 2,
    BetaRegion = 3,
    Other = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HrlSummary {
    pub n: u64,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    /// Non-excess kurtosis (3 for a normal distribution).
    pub kurtosis: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HrlPoint {
    pub beta1: f64,
    pub beta2: f64,
}

/// Streaming accumulator over every pushed value.
pub struct HrlMoments(MomentAccumulator);

/// Fixed-length sliding window.
pub struct HrlWindow(WindowAccumulator);

/// Result of a resampling run.
pub struct HrlCloud(BootstrapCloud);

/// Trained activity model.
pub struct HrlModel(ModelArtifact);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> HrlStatus {
    match e {
        Error::InsufficientData { .. } | Error::EmptyInput => HrlStatus::InsufficientData,
        Error::Degenerate
        | Error::AllTrialsDegenerate { .. }
        | Error::PerfectFit
        | Error::RankDeficient { .. } => HrlStatus::Degenerate,
        Error::NonFinite(_) | Error::NonFiniteTraining { .. } => HrlStatus::NonFinite,
        Error::Parse { .. }
        | Error::NonMonotoneTimestamp { .. }
        | Error::Csv(_)
        | Error::Json(_) => HrlStatus::Parse,
        Error::Schema(_) | Error::DimensionMismatch { .. } => HrlStatus::Schema,
        _ => HrlStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HrlStatus>) -> HrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HrlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HrlStatus::Panic
        }
    }
}

fn fail(e: Error) -> HrlStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> HrlStatus {
    set_error(format!("{what} is NULL"));
    HrlStatus::NullPointer
}

unsafe fn values<'a>(data: *const f64, len: usize) -> Result<&'a [f64], HrlStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null("data"));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HrlStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn live<'a, T>(p: *const T) -> Result<&'a T, HrlStatus> {
    p.as_ref().ok_or_else(|| null("handle"))
}

unsafe fn live_mut<'a, T>(p: *mut T) -> Result<&'a mut T, HrlStatus> {
    p.as_mut().ok_or_else(|| null("handle"))
}

fn to_c(s: &MomentSummary) -> HrlSummary {
    HrlSummary {
        n: s.n as u64,
        mean: s.mean,
        std: s.std,
        skewness: s.skewness,
        kurtosis: s.kurtosis,
    }
}

fn from_c(s: &HrlSummary) -> MomentSummary {
    MomentSummary {
        n: s.n as usize,
        mean: s.mean,
        std: s.std,
        skewness: s.skewness,
        kurtosis: s.kurtosis,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hrl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len - 1` bytes). Returns the full message
/// length, so a return value `>= len` means truncation.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be NULL with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn hrl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Beat interval in ms to heart rate in bpm, rounded half up.
///
/// # Safety
/// `out_bpm` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hrl_hb_to_hr(hb_ms: f64, out_bpm: *mut u32) -> HrlStatus {
    guard(|| {
        *out(out_bpm, "out_bpm")? = hb_to_hr(hb_ms).map_err(fail)?;
        Ok(())
    })
}

/// Heart rate in bpm to beat interval in ms.
///
/// # Safety
/// `out_ms` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hrl_hr_to_hb(hr_bpm: u32, out_ms: *mut f64) -> HrlStatus {
    guard(|| {
        *out(out_ms, "out_ms")? = hr_to_hb(hr_bpm).map_err(fail)?;
        Ok(())
    })
}

/// Two-pass moments of `len` values.
///
/// # Safety
/// `data` must point to `len` doubles; `out_summary` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_batch_moments(
    data: *const f64,
    len: usize,
    out_summary: *mut HrlSummary,
) -> HrlStatus {
    guard(|| {
        let xs = values(data, len)?;
        let dst = out(out_summary, "out_summary")?;
        *dst = to_c(&batch_moments(xs).map_err(fail)?);
        Ok(())
    })
}

/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hrl_moments_new(out_handle: *mut *mut HrlMoments) -> HrlStatus {
    guard(|| {
        *out(out_handle, "out_handle")? =
            Box::into_raw(Box::new(HrlMoments(MomentAccumulator::new())));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`hrl_moments_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hrl_moments_free(handle: *mut HrlMoments) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Pushes `len` values. Stops at the first non-finite value, leaving the
/// earlier ones applied.
///
/// # Safety
/// `handle` must be live; `data` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hrl_moments_push(
    handle: *mut HrlMoments,
    data: *const f64,
    len: usize,
) -> HrlStatus {
    guard(|| {
        let h = live_mut(handle)?;
        for &x in values(data, len)? {
            h.0.push(x).map_err(fail)?;
        }
        Ok(())
    })
}

/// Folds `other` into `handle`; `other` is left unchanged.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn hrl_moments_merge(
    handle: *mut HrlMoments,
    other: *const HrlMoments,
) -> HrlStatus {
    guard(|| {
        let merged = live(handle)?.0.merge(&live(other)?.0);
        live_mut(handle)?.0 = merged;
        Ok(())
    })
}

/// # Safety
/// `handle` must be live; `out_summary` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_moments_summary(
    handle: *const HrlMoments,
    out_summary: *mut HrlSummary,
) -> HrlStatus {
    guard(|| {
        let s = live(handle)?.0.summary().map_err(fail)?;
        *out(out_summary, "out_summary")? = to_c(&s);
        Ok(())
    })
}

/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hrl_window_new(
    capacity: usize,
    out_handle: *mut *mut HrlWindow,
) -> HrlStatus {
    guard(|| {
        let dst = out(out_handle, "out_handle")?;
        *dst = Box::into_raw(Box::new(HrlWindow(
            WindowAccumulator::new(capacity).map_err(fail)?,
        )));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`hrl_window_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hrl_window_free(handle: *mut HrlWindow) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Pushes one value. When the window was full, the evicted value is
/// written to `out_evicted` and `out_did_evict` is set to 1; either output
/// may be NULL.
///
/// # Safety
/// `handle` must be live; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_window_push(
    handle: *mut HrlWindow,
    value: f64,
    out_evicted: *mut f64,
    out_did_evict: *mut i32,
) -> HrlStatus {
    guard(|| {
        let evicted = live_mut(handle)?.0.push(value).map_err(fail)?;
        if let Some(d) = out_did_evict.as_mut() {
            *d = i32::from(evicted.is_some());
        }
        if let (Some(dst), Some(v)) = (out_evicted.as_mut(), evicted) {
            *dst = v;
        }
        Ok(())
    })
}

/// # Safety
/// `handle` must be live; `out_summary` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_window_summary(
    handle: *const HrlWindow,
    out_summary: *mut HrlSummary,
) -> HrlStatus {
    guard(|| {
        let s = live(handle)?.0.summary().map_err(fail)?;
        *out(out_summary, "out_summary")? = to_c(&s);
        Ok(())
    })
}

/// Places a summary on the plane.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_to_pearson(
    summary: *const HrlSummary,
    out_point: *mut HrlPoint,
) -> HrlStatus {
    guard(|| {
        let s = summary.as_ref().ok_or_else(|| null("summary"))?;
        let p = to_pearson(&from_c(s)).map_err(fail)?;
        *out(out_point, "out_point")? = HrlPoint {
            beta1: p.beta1,
            beta2: p.beta2,
        };
        Ok(())
    })
}

/// Distance to the normal landmark.
#[no_mangle]
pub extern "C" fn hrl_metric1(point: HrlPoint) -> f64 {
    metric1(PearsonPoint::new(point.beta1, point.beta2))
}

/// Distance to the uniform landmark.
#[no_mangle]
pub extern "C" fn hrl_metric2(point: HrlPoint) -> f64 {
    metric2(PearsonPoint::new(point.beta1, point.beta2))
}

/// # Safety
/// `out_region` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_classify_region(
    point: HrlPoint,
    tol: f64,
    out_region: *mut HrlRegion,
) -> HrlStatus {
    guard(|| {
        if !(tol >= 0.0) {
            set_error("tolerance must be non-negative");
            return Err(HrlStatus::InvalidArgument);
        }
        let r = classify_region(PearsonPoint::new(point.beta1, point.beta2), tol).region;
        *out(out_region, "out_region")? = match r {
            Region::Infeasible => HrlRegion::Infeasible,
            Region::NearNormal => HrlRegion::NearNormal,
            Region::NearUniform => HrlRegion::NearUniform,
            Region::BetaRegion => HrlRegion::BetaRegion,
            Region::Other => HrlRegion::Other,
        };
        Ok(())
    })
}

/// Resamples `len` values `trials` times. `subsample == 0` resamples at the
/// input size. The result is identical for every `workers` value.
///
/// # Safety
/// `data` must point to `len` doubles; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_bootstrap(
    data: *const f64,
    len: usize,
    trials: usize,
    subsample: usize,
    seed: u64,
    workers: usize,
    out_handle: *mut *mut HrlCloud,
) -> HrlStatus {
    guard(|| {
        let xs = values(data, len)?;
        let dst = out(out_handle, "out_handle")?;
        let cfg = BootstrapConfig {
            trials,
            subsample: (subsample > 0).then_some(subsample),
            seed,
            workers: workers.max(1),
        };
        *dst = Box::into_raw(Box::new(HrlCloud(bootstrap_cloud(xs, &cfg).map_err(fail)?)));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`hrl_bootstrap`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hrl_cloud_free(handle: *mut HrlCloud) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of non-degenerate trials; 0 for a NULL handle.
///
/// # Safety
/// `handle` must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn hrl_cloud_len(handle: *const HrlCloud) -> usize {
    handle.as_ref().map_or(0, |c| c.0.points.len())
}

/// Copies the cloud points into `buf`, which must hold at least
/// [`hrl_cloud_len`] entries.
///
/// # Safety
/// `handle` must be live; `buf` must point to `cap` writable points.
#[no_mangle]
pub unsafe extern "C" fn hrl_cloud_points(
    handle: *const HrlCloud,
    buf: *mut HrlPoint,
    cap: usize,
) -> HrlStatus {
    guard(|| {
        let c = live(handle)?;
        if cap < c.0.points.len() {
            set_error(format!(
                "buffer holds {cap} points, cloud has {}",
                c.0.points.len()
            ));
            return Err(HrlStatus::BufferTooSmall);
        }
        if c.0.points.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = slice::from_raw_parts_mut(buf, c.0.points.len());
        for (d, p) in dst.iter_mut().zip(&c.0.points) {
            *d = HrlPoint {
                beta1: p.beta1,
                beta2: p.beta2,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `handle` must be live; outputs must be valid. `out_degenerate` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn hrl_cloud_centroid(
    handle: *const HrlCloud,
    out_centroid: *mut HrlPoint,
    out_degenerate: *mut usize,
) -> HrlStatus {
    guard(|| {
        let c = live(handle)?;
        *out(out_centroid, "out_centroid")? = HrlPoint {
            beta1: c.0.centroid.beta1,
            beta2: c.0.centroid.beta2,
        };
        if let Some(d) = out_degenerate.as_mut() {
            *d = c.0.degenerate_count;
        }
        Ok(())
    })
}

/// Parses a model artifact from a NUL-terminated JSON string.
///
/// # Safety
/// `json` must be a valid C string; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hrl_model_load_json(
    json: *const c_char,
    out_handle: *mut *mut HrlModel,
) -> HrlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| {
            set_error("artifact is not valid UTF-8");
            HrlStatus::Parse
        })?;
        let dst = out(out_handle, "out_handle")?;
        *dst = Box::into_raw(Box::new(HrlModel(
            ModelArtifact::from_json(text).map_err(fail)?,
        )));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`hrl_model_load_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hrl_model_free(handle: *mut HrlModel) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of raw features the model expects; 0 for a NULL handle.
///
/// # Safety
/// `handle` must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn hrl_model_input_dim(handle: *const HrlModel) -> usize {
    handle.as_ref().map_or(0, |m| m.0.input_dim())
}

/// Predicted activity code (real valued) for one raw feature row.
///
/// # Safety
/// `handle` must be live; `features` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hrl_model_predict(
    handle: *const HrlModel,
    features: *const f64,
    len: usize,
    out_prediction: *mut f64,
) -> HrlStatus {
    guard(|| {
        let m = live(handle)?;
        let x = values(features, len)?;
        *out(out_prediction, "out_prediction")? = m.0.predict_row(x).map_err(fail)?;
        Ok(())
    })
}
