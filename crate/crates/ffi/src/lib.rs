//! C ABI for the eogforge toolkit.
//!
//! Conventions:
//! - Opaque handles ([`EogConfig`], [`EogLog`]) are created and destroyed by
//!   this library; pass them back only to these functions.
//! - Functions that can fail return an [`EogStatus`]; on failure a
//!   description is available from [`eog_last_error_message`].
//! - Returned strings are NUL-terminated, owned by the caller, and must be
//!   released with [`eog_string_free`].
//!
//! The matching header is generated into `include/eogforge.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eogforge::config::ChainConfig;
use eogforge::error::Error;
use eogforge::pipeline::{process_log, simulate, GroundTruth};
use eogforge::serial::{parse_serial_csv_str, write_serial_csv_string, SerialLog};
use eogforge::signal_model::GazeScenario;

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EogStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// Configuration or scenario rejected by validation.
    InvalidConfig = 2,
    /// Malformed input data (serial log, JSON).
    ParseError = 3,
    /// Internal invariant violation; report as a bug.
    InternalError = 4,
}

/// Chain configuration handle.
pub struct EogConfig {
    inner: ChainConfig,
}

/// Serial log handle.
pub struct EogLog {
    inner: SerialLog,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(err: &Error) -> EogStatus {
    match err {
        Error::InvalidConfig { .. }
        | Error::InvalidScenario(_)
        | Error::Aliasing { .. }
        | Error::Resample { .. } => EogStatus::InvalidConfig,
        Error::Parse { .. }
        | Error::Stream(_)
        | Error::File { .. }
        | Error::Io(_)
        | Error::Json(_) => EogStatus::ParseError,
        Error::Internal(_) => EogStatus::InternalError,
    }
}

fn fail(err: Error) -> EogStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Run a closure, translating panics into `InternalError` instead of
/// unwinding across the FFI boundary.
fn guarded(f: impl FnOnce() -> EogStatus) -> EogStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("panic inside eogforge".to_string());
            EogStatus::InternalError
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Option<Result<&'a str, EogStatus>> {
    if ptr.is_null() {
        return None;
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Some(Ok(s)),
        Err(_) => {
            set_error("argument is not valid UTF-8".to_string());
            Some(Err(EogStatus::ParseError))
        }
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', "\\0"))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn eog_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eog_string_free(s: *mut c_char) {
    if !s.is_null() {
        unsafe {
            drop(CString::from_raw(s));
        }
    }
}

/// Description of the most recent failure on this thread, or NULL.
/// The caller owns the returned string.
#[no_mangle]
pub extern "C" fn eog_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|m| m.clone().into_raw())
            .unwrap_or(ptr::null_mut())
    })
}

/// New configuration with stock defaults. Free with `eog_config_free`.
#[no_mangle]
pub extern "C" fn eog_config_default() -> *mut EogConfig {
    Box::into_raw(Box::new(EogConfig {
        inner: ChainConfig::default(),
    }))
}

/// New configuration at the fig6 bench operating point.
#[no_mangle]
pub extern "C" fn eog_config_fig6() -> *mut EogConfig {
    Box::into_raw(Box::new(EogConfig {
        inner: ChainConfig::fig6(),
    }))
}

/// Parse and validate a configuration from JSON. Missing fields take their
/// defaults; unknown fields are rejected.
///
/// # Safety
/// `json` must be NULL or point to a NUL-terminated buffer;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_config_from_json(
    json: *const c_char,
    out: *mut *mut EogConfig,
) -> EogStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        let json = match unsafe { cstr_arg(json) } {
            None => {
                set_error("json pointer is NULL".to_string());
                return EogStatus::NullArgument;
            }
            Some(Err(status)) => return status,
            Some(Ok(s)) => s,
        };
        match ChainConfig::from_json_str(json) {
            Ok(config) => {
                unsafe { *out = Box::into_raw(Box::new(EogConfig { inner: config })) };
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Canonical JSON for a configuration. Caller frees the string.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
#[no_mangle]
pub unsafe extern "C" fn eog_config_to_json(config: *const EogConfig) -> *mut c_char {
    match unsafe { config.as_ref() } {
        Some(c) => to_c_string(c.inner.canonical_json()),
        None => ptr::null_mut(),
    }
}

/// Stable content hash identifying a configuration. Caller frees the string.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
#[no_mangle]
pub unsafe extern "C" fn eog_config_hash(config: *const EogConfig) -> *mut c_char {
    match unsafe { config.as_ref() } {
        Some(c) => to_c_string(c.inner.hash()),
        None => ptr::null_mut(),
    }
}

/// Override the noise seed.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`.
#[no_mangle]
pub unsafe extern "C" fn eog_config_set_seed(config: *mut EogConfig, seed: u64) -> EogStatus {
    match unsafe { config.as_mut() } {
        Some(c) => {
            c.inner.noise.seed = seed;
            EogStatus::Ok
        }
        None => {
            set_error("config pointer is NULL".to_string());
            EogStatus::NullArgument
        }
    }
}

///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; the handle is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn eog_config_free(config: *mut EogConfig) {
    if !config.is_null() {
        unsafe {
            drop(Box::from_raw(config));
        }
    }
}

/// Parse a serial CSV log from a NUL-terminated buffer.
///
/// # Safety
/// `text` must be NULL or point to a NUL-terminated buffer;
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_log_parse(text: *const c_char, out: *mut *mut EogLog) -> EogStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        let text = match unsafe { cstr_arg(text) } {
            None => {
                set_error("text pointer is NULL".to_string());
                return EogStatus::NullArgument;
            }
            Some(Err(status)) => return status,
            Some(Ok(s)) => s,
        };
        match parse_serial_csv_str(text) {
            Ok((log, _report)) => {
                unsafe { *out = Box::into_raw(Box::new(EogLog { inner: log })) };
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Serialize a log in the canonical serial CSV format. Caller frees.
///
/// # Safety
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`.
#[no_mangle]
pub unsafe extern "C" fn eog_log_write(log: *const EogLog) -> *mut c_char {
    match unsafe { log.as_ref() } {
        Some(l) => to_c_string(write_serial_csv_string(&l.inner)),
        None => ptr::null_mut(),
    }
}

/// Number of samples in a log; 0 for NULL.
///
/// # Safety
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`.
#[no_mangle]
pub unsafe extern "C" fn eog_log_sample_count(log: *const EogLog) -> usize {
    unsafe { log.as_ref() }.map_or(0, |l| l.inner.records.len())
}

/// Fetch one sample. Output pointers may be NULL to skip a field.
///
/// # Safety
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; output pointers must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_log_sample(
    log: *const EogLog,
    index: usize,
    out_timestamp_s: *mut f64,
    out_code: *mut u16,
    out_volts: *mut f64,
) -> EogStatus {
    let Some(l) = (unsafe { log.as_ref() }) else {
        set_error("log pointer is NULL".to_string());
        return EogStatus::NullArgument;
    };
    let Some(r) = l.inner.records.get(index) else {
        set_error(format!(
            "sample index {index} out of range ({} samples)",
            l.inner.records.len()
        ));
        return EogStatus::InvalidConfig;
    };
    unsafe {
        if !out_timestamp_s.is_null() {
            *out_timestamp_s = r.timestamp_s;
        }
        if !out_code.is_null() {
            *out_code = r.code;
        }
        if !out_volts.is_null() {
            *out_volts = r.volts;
        }
    }
    EogStatus::Ok
}

///
/// # Safety
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; the handle is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn eog_log_free(log: *mut EogLog) {
    if !log.is_null() {
        unsafe {
            drop(Box::from_raw(log));
        }
    }
}

/// Simulate a scenario (JSON text) through the configured chain.
/// On success `*out_log` holds the serial log and, when `out_truth_json` is
/// non-NULL, `*out_truth_json` holds the ground-truth events as JSON.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
/// `scenario_json` must be NULL or NUL-terminated; `out_log` must be valid for
/// writes and `out_truth_json` NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_simulate(
    config: *const EogConfig,
    scenario_json: *const c_char,
    out_log: *mut *mut EogLog,
    out_truth_json: *mut *mut c_char,
) -> EogStatus {
    guarded(|| {
        let Some(config) = (unsafe { config.as_ref() }) else {
            set_error("config pointer is NULL".to_string());
            return EogStatus::NullArgument;
        };
        if out_log.is_null() {
            set_error("out_log pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        let scenario_text = match unsafe { cstr_arg(scenario_json) } {
            None => {
                set_error("scenario_json pointer is NULL".to_string());
                return EogStatus::NullArgument;
            }
            Some(Err(status)) => return status,
            Some(Ok(s)) => s,
        };
        let scenario: GazeScenario = match serde_json::from_str(scenario_text) {
            Ok(s) => s,
            Err(e) => return fail(Error::Json(e)),
        };
        match simulate(&config.inner, &scenario) {
            Ok(sim) => {
                unsafe {
                    *out_log = Box::into_raw(Box::new(EogLog { inner: sim.log }));
                    if !out_truth_json.is_null() {
                        *out_truth_json = to_c_string(
                            serde_json::to_string(&sim.truth).expect("truth serializes"),
                        );
                    }
                }
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Detect events in a log; `*out_json` receives a JSON array of
/// `{onset_s, polarity, peak_value_v, peak_time_s}` objects.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`; `out_json` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_detect_events_json(
    config: *const EogConfig,
    log: *const EogLog,
    out_json: *mut *mut c_char,
) -> EogStatus {
    guarded(|| {
        let (Some(config), Some(log)) = (unsafe { config.as_ref() }, unsafe { log.as_ref() })
        else {
            set_error("config or log pointer is NULL".to_string());
            return EogStatus::NullArgument;
        };
        if out_json.is_null() {
            set_error("out_json pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        match eogforge::detect_events(&log.inner.records, &config.inner.detector) {
            Ok(events) => {
                let json = serde_json::to_string(&events).expect("events serialize");
                unsafe { *out_json = to_c_string(json) };
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Full metrics for a log, optionally against ground-truth JSON (pass NULL
/// to skip latency/accuracy). `*out_json` receives the metrics report.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`;
/// `log` must be NULL or an unfreed handle from `eog_log_parse` or `eog_simulate`;
/// `truth_json` must be NULL or NUL-terminated; `out_json` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_metrics_json(
    config: *const EogConfig,
    log: *const EogLog,
    truth_json: *const c_char,
    out_json: *mut *mut c_char,
) -> EogStatus {
    guarded(|| {
        let (Some(config), Some(log)) = (unsafe { config.as_ref() }, unsafe { log.as_ref() })
        else {
            set_error("config or log pointer is NULL".to_string());
            return EogStatus::NullArgument;
        };
        if out_json.is_null() {
            set_error("out_json pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        let truth: Option<GroundTruth> = match unsafe { cstr_arg(truth_json) } {
            None => None,
            Some(Err(status)) => return status,
            Some(Ok(text)) => match serde_json::from_str(text) {
                Ok(t) => Some(t),
                Err(e) => return fail(Error::Json(e)),
            },
        };
        match process_log(&config.inner, &log.inner, truth.as_ref()) {
            Ok(out) => {
                let json = serde_json::to_string(&out.report).expect("report serializes");
                unsafe { *out_json = to_c_string(json) };
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Mean-square / variance SNR of a sample buffer. A constant input reports
/// +infinity in `*out_snr_db`.
///
/// # Safety
/// `samples` must be NULL or valid for reads of `len` doubles; output pointers
/// must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_snr(
    samples: *const f64,
    len: usize,
    out_snr_db: *mut f64,
    out_signal_power: *mut f64,
    out_noise_power: *mut f64,
) -> EogStatus {
    guarded(|| {
        if samples.is_null() {
            set_error("samples pointer is NULL".to_string());
            return EogStatus::NullArgument;
        }
        let samples = unsafe { std::slice::from_raw_parts(samples, len) };
        match eogforge::snr_db(samples) {
            Ok(est) => {
                unsafe {
                    if !out_snr_db.is_null() {
                        *out_snr_db = est.snr_db;
                    }
                    if !out_signal_power.is_null() {
                        *out_signal_power = est.signal_power;
                    }
                    if !out_noise_power.is_null() {
                        *out_noise_power = est.noise_power;
                    }
                }
                EogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Converter step size `v_ref / 2^bits`; NaN for invalid arguments.
#[no_mangle]
pub extern "C" fn eog_lsb(v_ref: f64, bits: u8) -> f64 {
    let config = eogforge::AdcConfig {
        v_ref,
        bits,
        ..eogforge::AdcConfig::default()
    };
    if config.validate().is_err() {
        return f64::NAN;
    }
    eogforge::lsb(&config)
}

/// First-stage instrumentation-amplifier gain of a configuration.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; `out_gain` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_ina_gain(config: *const EogConfig, out_gain: *mut f64) -> EogStatus {
    gain_impl(config, out_gain, eogforge::ina_gain)
}

/// Total (both stages) gain of a configuration.
///
/// # Safety
/// `config` must be NULL or an unfreed handle from `eog_config_default`, `eog_config_fig6`, or `eog_config_from_json`; `out_gain` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eog_total_gain(config: *const EogConfig, out_gain: *mut f64) -> EogStatus {
    gain_impl(config, out_gain, eogforge::total_gain)
}

unsafe fn gain_impl(
    config: *const EogConfig,
    out_gain: *mut f64,
    f: fn(&eogforge::AfeConfig) -> eogforge::Result<f64>,
) -> EogStatus {
    let Some(config) = (unsafe { config.as_ref() }) else {
        set_error("config pointer is NULL".to_string());
        return EogStatus::NullArgument;
    };
    if out_gain.is_null() {
        set_error("out_gain pointer is NULL".to_string());
        return EogStatus::NullArgument;
    }
    match f(&config.inner.afe) {
        Ok(gain) => {
            unsafe { *out_gain = gain };
            EogStatus::Ok
        }
        Err(e) => fail(e),
    }
}
