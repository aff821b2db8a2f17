//! Exercises the C ABI from Rust (the exported functions are plain
//! `extern "C"` symbols) and compiles a real C client against the generated
//! header as a smoke test of the shipped interface.

use std::ffi::{CStr, CString};
use std::ptr;

use eogforge_ffi::*;

fn c(text: &str) -> CString {
    CString::new(text).unwrap()
}

unsafe fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { eog_string_free(ptr) };
    s
}

const SCENARIO: &str = r#"{
    "total_duration_s": 5.0,
    "saccades": [
        {"onset_s": 1.0, "target_angle_deg": 30.0, "transition_duration_s": 0.05},
        {"onset_s": 3.0, "target_angle_deg": -30.0, "transition_duration_s": 0.05}
    ]
}"#;

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(eog_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn config_lifecycle_and_hash() {
    unsafe {
        let config = eog_config_default();
        assert!(!config.is_null());
        let hash = take_string(eog_config_hash(config));
        assert_eq!(hash.len(), 64);

        let json = take_string(eog_config_to_json(config));
        let mut reparsed: *mut EogConfig = ptr::null_mut();
        let status = eog_config_from_json(c(&json).as_ptr(), &mut reparsed);
        assert_eq!(status, EogStatus::Ok);
        let hash2 = take_string(eog_config_hash(reparsed));
        assert_eq!(hash, hash2, "JSON round trip must preserve the hash");

        assert_eq!(eog_config_set_seed(reparsed, 7), EogStatus::Ok);
        let hash3 = take_string(eog_config_hash(reparsed));
        assert_ne!(hash, hash3);

        eog_config_free(config);
        eog_config_free(reparsed);
    }
}

#[test]
fn invalid_config_json_reports_details() {
    unsafe {
        let mut out: *mut EogConfig = ptr::null_mut();
        let status = eog_config_from_json(c(r#"{"bogus_field": 1}"#).as_ptr(), &mut out);
        assert_eq!(status, EogStatus::ParseError);
        assert!(out.is_null());
        let message = take_string(eog_last_error_message());
        assert!(message.contains("bogus_field"), "{message}");

        let status = eog_config_from_json(c(r#"{"afe": {"fc_hp_hz": 50.0}}"#).as_ptr(), &mut out);
        assert_eq!(status, EogStatus::InvalidConfig);
    }
}

#[test]
fn null_arguments_are_rejected_not_crashed() {
    unsafe {
        assert_eq!(
            eog_config_from_json(ptr::null(), ptr::null_mut()),
            EogStatus::NullArgument
        );
        let mut out: *mut EogLog = ptr::null_mut();
        assert_eq!(
            eog_log_parse(ptr::null(), &mut out),
            EogStatus::NullArgument
        );
        assert_eq!(eog_log_sample_count(ptr::null()), 0);
        assert!(eog_config_hash(ptr::null()).is_null());
        assert_eq!(
            eog_config_set_seed(ptr::null_mut(), 1),
            EogStatus::NullArgument
        );
        eog_config_free(ptr::null_mut());
        eog_log_free(ptr::null_mut());
        eog_string_free(ptr::null_mut());
    }
}

#[test]
fn log_parse_write_and_sample_access() {
    unsafe {
        let mut log: *mut EogLog = ptr::null_mut();
        let status = eog_log_parse(c("0,512\n4,513\n").as_ptr(), &mut log);
        assert_eq!(status, EogStatus::Ok);
        assert_eq!(eog_log_sample_count(log), 2);

        let (mut t, mut code, mut volts) = (0.0f64, 0u16, 0.0f64);
        assert_eq!(
            eog_log_sample(log, 0, &mut t, &mut code, &mut volts),
            EogStatus::Ok
        );
        assert_eq!((t, code, volts), (0.0, 512, 2.5));
        assert_eq!(
            eog_log_sample(log, 9, &mut t, &mut code, &mut volts),
            EogStatus::InvalidConfig
        );

        let text = take_string(eog_log_write(log));
        assert!(text.ends_with("0,512\n4,513\n"), "{text}");
        eog_log_free(log);

        let mut bad: *mut EogLog = ptr::null_mut();
        assert_eq!(
            eog_log_parse(c("0,9999\n").as_ptr(), &mut bad),
            EogStatus::ParseError
        );
        let message = take_string(eog_last_error_message());
        assert!(message.contains("line 1"), "{message}");
    }
}

#[test]
fn simulate_detect_metrics_round_trip() {
    unsafe {
        let config = eog_config_fig6();
        let mut log: *mut EogLog = ptr::null_mut();
        let mut truth: *mut std::ffi::c_char = ptr::null_mut();
        let status = eog_simulate(config, c(SCENARIO).as_ptr(), &mut log, &mut truth);
        assert_eq!(status, EogStatus::Ok);
        assert!(eog_log_sample_count(log) > 1000);
        let truth_json = take_string(truth);
        assert!(truth_json.contains("\"UP\""));

        let mut events: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            eog_detect_events_json(config, log, &mut events),
            EogStatus::Ok
        );
        let events_json = take_string(events);
        let events: serde_json::Value = serde_json::from_str(&events_json).unwrap();
        assert_eq!(events.as_array().unwrap().len(), 2);

        let mut metrics: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            eog_metrics_json(config, log, c(&truth_json).as_ptr(), &mut metrics),
            EogStatus::Ok
        );
        let metrics: serde_json::Value = serde_json::from_str(&take_string(metrics)).unwrap();
        assert_eq!(metrics["hits"], 2);
        assert_eq!(metrics["misses"], 0);

        eog_log_free(log);
        eog_config_free(config);
    }
}

#[test]
fn snr_and_lsb_scalar_helpers() {
    unsafe {
        let samples = [2.0f64, 4.0, 2.0, 4.0];
        let (mut snr, mut sig, mut noise) = (0.0f64, 0.0f64, 0.0f64);
        let status = eog_snr(
            samples.as_ptr(),
            samples.len(),
            &mut snr,
            &mut sig,
            &mut noise,
        );
        assert_eq!(status, EogStatus::Ok);
        assert!((sig - 10.0).abs() < 1e-12);
        assert!((noise - 1.0).abs() < 1e-12);
        assert!((snr - 10.0).abs() < 1e-9);

        let constant = [1.5f64; 8];
        let status = eog_snr(constant.as_ptr(), 8, &mut snr, &mut sig, &mut noise);
        assert_eq!(status, EogStatus::Ok);
        assert!(snr.is_infinite() && snr > 0.0);

        assert_eq!(eog_lsb(5.0, 10), 0.0048828125);
        assert!(eog_lsb(5.0, 40).is_nan());

        let config = eog_config_default();
        let mut gain = 0.0f64;
        assert_eq!(eog_ina_gain(config, &mut gain), EogStatus::Ok);
        assert_eq!(gain, 40_000.0);
        assert_eq!(eog_total_gain(config, &mut gain), EogStatus::Ok);
        assert_eq!(gain, 50_000.0);
        eog_config_free(config);
    }
}

/// Compile and run a genuine C client against include/eogforge.h and the
/// static library, proving the generated header matches the ABI.
#[test]
fn c_client_compiles_and_runs() {
    let target_dir = std::env::current_exe()
        .unwrap()
        .parent() // deps/
        .unwrap()
        .parent() // debug/
        .unwrap()
        .to_path_buf();
    let static_lib = target_dir.join("libeogforge_ffi.a");
    assert!(
        static_lib.exists(),
        "static library missing at {}",
        static_lib.display()
    );
    let include_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(
        include_dir.join("eogforge.h").exists(),
        "header not generated"
    );

    let work = std::env::temp_dir().join(format!("eogforge-cclient-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&work);
    std::fs::create_dir_all(&work).unwrap();
    let c_source = r#"
#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "eogforge.h"

int main(void) {
    EogConfig *config = eog_config_default();
    assert(config != NULL);

    double gain = 0.0;
    assert(eog_total_gain(config, &gain) == EOG_STATUS_OK);
    assert(gain == 50000.0);
    assert(eog_lsb(5.0, 10) == 0.0048828125);

    char *hash = eog_config_hash(config);
    assert(hash != NULL && strlen(hash) == 64);
    eog_string_free(hash);

    EogLog *log = NULL;
    assert(eog_log_parse("0,512\n4,513\n", &log) == EOG_STATUS_OK);
    assert(eog_log_sample_count(log) == 2);
    double volts = 0.0;
    assert(eog_log_sample(log, 0, NULL, NULL, &volts) == EOG_STATUS_OK);
    assert(fabs(volts - 2.5) < 1e-12);

    double samples[4] = {2.0, 4.0, 2.0, 4.0};
    double snr = 0.0, sig = 0.0, noise = 0.0;
    assert(eog_snr(samples, 4, &snr, &sig, &noise) == EOG_STATUS_OK);
    assert(fabs(snr - 10.0) < 1e-9);

    eog_log_free(log);
    eog_config_free(config);
    printf("c client ok\n");
    return 0;
}
"#;
    std::fs::write(work.join("client.c"), c_source).unwrap();
    let exe = work.join("client");
    let compile = std::process::Command::new("cc")
        .arg(work.join("client.c"))
        .arg(&static_lib)
        .arg("-I")
        .arg(&include_dir)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc runs");
    assert!(
        compile.status.success(),
        "C client failed to compile: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&exe)
        .output()
        .expect("client runs");
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "c client ok\n");
    let _ = std::fs::remove_dir_all(&work);
}
