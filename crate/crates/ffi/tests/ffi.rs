use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use construct_audit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    ca_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(ca_last_error_message()).to_str().unwrap().to_owned()
}

unsafe fn build(kind: &str, params: Option<&str>, seed: u64) -> *mut CaDistribution {
    let kind = c(kind);
    let params = params.map(c);
    let mut d = ptr::null_mut();
    let status = ca_construct(kind.as_ptr(), params.as_ref().map_or(ptr::null(), |p| p.as_ptr()), seed, &mut d);
    assert_eq!(status, CaStatus::Ok, "{}", last_error());
    d
}

#[test]
fn xor_round_trip_and_audit() {
    unsafe {
        let d = build("xor", None, 0);
        let mut json = ptr::null_mut();
        assert_eq!(ca_distribution_to_json(d, &mut json), CaStatus::Ok);
        let text = c(&take(json));
        let mut again = ptr::null_mut();
        assert_eq!(ca_distribution_from_json(text.as_ptr(), &mut again), CaStatus::Ok);

        let mut gap = -1.0;
        assert_eq!(ca_output_disparity(again, &mut gap), CaStatus::Ok);
        assert_eq!(gap, 0.0);

        let opts = c(r#"{"tests": ["dp", "misclass"]}"#);
        let mut report = ptr::null_mut();
        let mut passed = -1;
        assert_eq!(ca_audit(again, opts.as_ptr(), &mut report, &mut passed), CaStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(passed, 0);
        assert_eq!(report["schema"], "construct-audit/1");
        assert_eq!(report["tests"][1]["statistic"], "1");
        ca_distribution_free(d);
        ca_distribution_free(again);
    }
}

#[test]
fn pp_adversary_has_the_claimed_gap() {
    unsafe {
        let d = build("pp-adversarial", Some(r#"{"yo0": "0.6", "yo1": "0.3", "epsilon": "0.02"}"#), 0);
        let mut gap = 0.0;
        assert_eq!(ca_output_disparity(d, &mut gap), CaStatus::Ok);
        assert!((gap - 0.98).abs() < 1e-15);
        let opts = c(r#"{"tests": ["pp"], "mode": "float"}"#);
        let mut report = ptr::null_mut();
        let mut passed = -1;
        assert_eq!(ca_audit(d, opts.as_ptr(), &mut report, &mut passed), CaStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(report)).unwrap();
        assert_eq!(report["tests"][0]["pass"], true);
        // the adversary amplifies: Yc copies Yo, whose gap is only 0.3
        assert_eq!(report["criteria"][0]["amplification"], true);
        assert_eq!(passed, 0);
        ca_distribution_free(d);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(ca_distribution_from_json(ptr::null(), &mut d), CaStatus::NullPointer);
        let bad = c(r#"{"supports":{"Yo":[0],"Yp":[0]},"cells":[{"z":0,"yo":0,"yp":0,"p":"0.5"}]}"#);
        assert_eq!(ca_distribution_from_json(bad.as_ptr(), &mut d), CaStatus::InvalidDistribution);
        assert!(!last_error().is_empty());
        let garbage = c("{");
        assert_eq!(ca_distribution_from_json(garbage.as_ptr(), &mut d), CaStatus::Parse);

        let kind = c("alpha");
        let params = c(r#"{"alpha": "0.5", "alpha_prime": "0.5"}"#);
        assert_eq!(ca_construct(kind.as_ptr(), params.as_ptr(), 1, &mut d), CaStatus::Infeasible);
        let unknown = c("nope");
        assert_eq!(ca_construct(unknown.as_ptr(), ptr::null(), 1, &mut d), CaStatus::InvalidParameter);

        let obs = c(
            r#"{"supports":{"Yo":[0,1],"Yp":[0,1]},"cells":[{"z":0,"yo":0,"yp":0,"p":"0.5"},{"z":1,"yo":1,"yp":1,"p":"0.5"}]}"#,
        );
        assert_eq!(ca_distribution_from_json(obs.as_ptr(), &mut d), CaStatus::Ok);
        assert!(last_error().is_empty());
        let mut x = 0.0;
        assert_eq!(ca_construct_disparity(d, &mut x), CaStatus::MissingConstruct);
        ca_distribution_free(d);
        ca_distribution_free(ptr::null_mut());
        ca_string_free(ptr::null_mut());
    }
}

#[test]
fn emd_is_exact() {
    unsafe {
        let (a, b) = (c(r#"{"0": "1/2", "2": "1/2"}"#), c(r#"{"0": "1/4", "2": "3/4"}"#));
        let mut out = ptr::null_mut();
        let numeric = c("numeric");
        assert_eq!(ca_emd(a.as_ptr(), b.as_ptr(), numeric.as_ptr(), &mut out), CaStatus::Ok);
        assert_eq!(take(out), "1/2");
        assert_eq!(ca_emd(a.as_ptr(), b.as_ptr(), ptr::null(), &mut out), CaStatus::Ok);
        assert_eq!(take(out), "1/4");
    }
}

#[test]
fn verify_runs_a_suite() {
    unsafe {
        let t = c("L1");
        let mut out = ptr::null_mut();
        let mut passed = -1;
        assert_eq!(ca_verify(t.as_ptr(), 20, 7, &mut out, &mut passed), CaStatus::Ok);
        let reports: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(passed, 1);
        assert_eq!(reports[0]["theorem"], "L1");
        let bogus = c("T99");
        assert_eq!(ca_verify(bogus.as_ptr(), 1, 7, &mut out, ptr::null_mut()), CaStatus::InvalidParameter);
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/construct_audit.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "ca_distribution_from_json",
        "ca_distribution_free",
        "ca_audit",
        "ca_construct",
        "ca_verify",
        "ca_emd",
        "ca_last_error_message",
        "typedef struct CaDistribution CaDistribution",
        "CA_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // compile it as C when a compiler is around
    if let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).status() {
        assert!(status.success(), "header does not compile as C99");
    }
}
