//! C interface to construct-audit.
//!
//! Distributions live behind an opaque `CaDistribution` handle and are held
//! in exact rational arithmetic. Structured data crosses the boundary as
//! UTF-8 JSON. Every function returns a `CaStatus`; on failure
//! `ca_last_error_message` describes the error for the calling thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with `ca_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use construct_audit::audit::{audit_distribution, AuditConfig, CriterionKind, InputFormat, MetricChoice, TestKind};
use construct_audit::constructions::{
    alpha_counterexample, eqodds_amplifying_counterexample, optimal_dem_parity_model, pp_adversarial_model,
    xor_example, ypz_example,
};
use construct_audit::criteria::{construct_disparity, Worldview};
use construct_audit::distances::{emd_cost, MetricSupport};
use construct_audit::empirical::output_disparity;
use construct_audit::harness::{run_all_with, run_suite_with, SuiteConfig, TheoremId};
use construct_audit::io::{joint_from_json, joint_to_json, law_from_json};
use construct_audit::probability::{Distribution, JointDistribution, Label, Support};
use construct_audit::scalar::{parse_rational, Mode, Rational, Scalar};
use construct_audit::AuditError;
use serde::Deserialize;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidDistribution = 4,
    InvalidParameter = 5,
    MissingConstruct = 6,
    Infeasible = 7,
    Io = 8,
    Internal = 9,
}

/// Opaque joint distribution over `(Z, Yc, Yo, Yp)`.
pub struct CaDistribution {
    inner: JointDistribution<Rational>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Error(CaStatus, String);

impl From<AuditError> for Error {
    fn from(e: AuditError) -> Self {
        let status = match &e {
            AuditError::Parse(_) => CaStatus::Parse,
            AuditError::Io(_) => CaStatus::Io,
            AuditError::ConstructUnavailable => CaStatus::MissingConstruct,
            AuditError::InfeasibleTarget(_) | AuditError::EpsilonTooLarge(_) | AuditError::WrongOrder(_) => {
                CaStatus::Infeasible
            }
            AuditError::NegativeProbability { .. }
            | AuditError::MassNotOne { .. }
            | AuditError::EmptyGroup(_)
            | AuditError::UnknownLabel { .. }
            | AuditError::DuplicateLabel(_)
            | AuditError::EmptySupport
            | AuditError::MixedConstructPresence => CaStatus::InvalidDistribution,
            _ => CaStatus::InvalidParameter,
        };
        Error(status, e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error(CaStatus::Parse, e.to_string())
    }
}

type Outcome<T> = Result<T, Error>;

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Outcome<()>) -> CaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CaStatus::Ok
        }
        Ok(Err(Error(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CaStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Error(CaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error(CaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// `None` for a null pointer.
unsafe fn opt_text<'a>(p: *const c_char, what: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a>(d: *const CaDistribution) -> Outcome<&'a JointDistribution<Rational>> {
    d.as_ref().map(|h| &h.inner).ok_or_else(|| Error(CaStatus::NullPointer, "distribution handle is null".into()))
}

fn check_out<T>(out: *mut T) -> Outcome<()> {
    if out.is_null() {
        Err(Error(CaStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome<()> {
    check_out(out)?;
    let c = CString::new(s).map_err(|_| Error(CaStatus::Internal, "string contains nul".into()))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_handle(out: *mut *mut CaDistribution, dist: JointDistribution<Rational>) -> Outcome<()> {
    check_out(out)?;
    *out = Box::into_raw(Box::new(CaDistribution { inner: dist }));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a distribution file (JSON text).
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_distribution_from_json(json: *const c_char, out: *mut *mut CaDistribution) -> CaStatus {
    guard(|| {
        let dist = joint_from_json::<Rational>(text(json, "json")?)?;
        put_handle(out, dist)
    })
}

/// Serializes a distribution with exact probabilities.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_distribution_to_json(dist: *const CaDistribution, out: *mut *mut c_char) -> CaStatus {
    guard(|| put_string(out, joint_to_json(handle(dist)?)))
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `dist` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ca_distribution_free(dist: *mut CaDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// `tv(Yp | Z=0, Yp | Z=1)` as the nearest double.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_output_disparity(dist: *const CaDistribution, out: *mut f64) -> CaStatus {
    guard(|| {
        let d = handle(dist)?;
        check_out(out)?;
        *out = Scalar::to_f64(&output_disparity(d));
        Ok(())
    })
}

/// `tv(Yc | Z=0, Yc | Z=1)` as the nearest double.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_construct_disparity(dist: *const CaDistribution, out: *mut f64) -> CaStatus {
    guard(|| {
        let d = handle(dist)?;
        check_out(out)?;
        *out = Scalar::to_f64(&construct_disparity(d)?);
        Ok(())
    })
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct AuditOptions {
    tests: Vec<String>,
    tau: Option<String>,
    alpha: Option<String>,
    p: Option<String>,
    favorable: Option<String>,
    worldview: Option<String>,
    criteria: Vec<String>,
    metric: Option<String>,
    mode: Option<String>,
    seed: u64,
}

impl AuditOptions {
    fn config(&self) -> Result<AuditConfig, AuditError> {
        let mut cfg = AuditConfig::new("");
        cfg.format = Some(InputFormat::DistJson);
        cfg.tests = self.tests.iter().map(|t| t.parse()).collect::<Result<Vec<TestKind>, _>>()?;
        cfg.criteria = self.criteria.iter().map(|c| c.parse()).collect::<Result<Vec<CriterionKind>, _>>()?;
        if let Some(t) = &self.tau {
            cfg.tau = parse_rational(t)?;
        }
        cfg.alpha = self.alpha.as_deref().map(parse_rational).transpose()?;
        if let Some(p) = &self.p {
            cfg.p = parse_rational(p)?;
        }
        if let Some(f) = &self.favorable {
            cfg.favorable = Label::parse(f);
        }
        cfg.worldview = self.worldview.as_deref().map(str::parse::<Worldview>).transpose()?;
        if let Some(m) = &self.metric {
            cfg.metric = m.parse::<MetricChoice>()?;
        }
        cfg.mode = self.mode.as_deref().map(str::parse::<Mode>).transpose()?;
        cfg.seed = self.seed;
        Ok(cfg)
    }
}

/// Audits `dist`. `options_json` (may be null) is an object with optional
/// keys `tests`, `tau`, `alpha`, `p`, `favorable`, `worldview`, `criteria`,
/// `metric`, `mode` and `seed`, named and valued as on the command line.
/// Writes the JSON report to `report` and, when `passed` is not null,
/// 1 or 0 to `passed`.
///
/// # Safety
/// Pointers must be valid as described; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_audit(
    dist: *const CaDistribution,
    options_json: *const c_char,
    report: *mut *mut c_char,
    passed: *mut i32,
) -> CaStatus {
    guard(|| {
        let d = handle(dist)?;
        check_out(report)?;
        let options: AuditOptions = match opt_text(options_json, "options_json")? {
            Some(t) => serde_json::from_str(t)?,
            None => AuditOptions::default(),
        };
        let cfg = options.config()?;
        let result = match cfg.mode() {
            Mode::Rational => audit_distribution(d, &cfg)?,
            Mode::Float => audit_distribution(&d.convert::<f64>(), &cfg)?,
        };
        if !passed.is_null() {
            *passed = i32::from(result.pass);
        }
        put_string(report, result.to_json())
    })
}

/// Earth mover's distance between two laws given as `{"label": p}` JSON.
/// `metric` is `indicator` (also used for null), `numeric`, or metric JSON
/// text. Writes the exact value as a string.
///
/// # Safety
/// String arguments must be valid C strings or null where allowed; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_emd(
    law_a: *const c_char,
    law_b: *const c_char,
    metric: *const c_char,
    out: *mut *mut c_char,
) -> CaStatus {
    guard(|| {
        let p: Distribution<Rational> = law_from_json(text(law_a, "law_a")?)?;
        let q: Distribution<Rational> = law_from_json(text(law_b, "law_b")?)?;
        let support = p.support().union(q.support());
        let ms = match opt_text(metric, "metric")?.map(str::trim) {
            None | Some("indicator") => MetricSupport::indicator(support),
            Some("numeric") => MetricSupport::numeric(support)?,
            Some(json) => MetricSupport::from_json(json)?,
        };
        put_string(out, emd_cost(&p, &q, &ms)?.render())
    })
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ConstructParams {
    base: Option<serde_json::Value>,
    yo0: Option<String>,
    yo1: Option<String>,
    epsilon: Option<String>,
    alpha: Option<String>,
    alpha_prime: Option<String>,
}

fn required(v: &Option<String>, name: &str) -> Outcome<Rational> {
    let s = v.as_deref().ok_or_else(|| Error(CaStatus::InvalidParameter, format!("missing parameter `{name}`")))?;
    Ok(parse_rational(s)?)
}

fn binary_margin(p_one: Rational) -> Outcome<Distribution<Rational>> {
    let rest = Rational::from_frac(1, 1) - p_one.clone();
    Ok(Distribution::new(Support::binary(), vec![rest, p_one])?)
}

/// Builds one of the generators: `optimal-dp` (param `base`: a distribution
/// object), `pp-adversarial` (`yo0`, `yo1`, `epsilon`), `eqodds`, `alpha`
/// (`alpha`, `alpha_prime`), `xor`, `ypz`. Parameters are a JSON object with
/// numbers written as strings; `params_json` may be null when none are needed.
///
/// # Safety
/// `kind` must be a valid C string, `params_json` a valid C string or null,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ca_construct(
    kind: *const c_char,
    params_json: *const c_char,
    seed: u64,
    out: *mut *mut CaDistribution,
) -> CaStatus {
    guard(|| {
        let kind = text(kind, "kind")?;
        let params: ConstructParams = match opt_text(params_json, "params_json")? {
            Some(t) => serde_json::from_str(t)?,
            None => ConstructParams::default(),
        };
        let dist = match kind {
            "optimal-dp" => {
                let base = params
                    .base
                    .as_ref()
                    .ok_or_else(|| Error(CaStatus::InvalidParameter, "missing parameter `base`".into()))?;
                let base = joint_from_json::<Rational>(&base.to_string())?;
                optimal_dem_parity_model(&base)?.dist
            }
            "pp-adversarial" => {
                let margins =
                    [binary_margin(required(&params.yo0, "yo0")?)?, binary_margin(required(&params.yo1, "yo1")?)?];
                pp_adversarial_model(&margins, &required(&params.epsilon, "epsilon")?)?.dist
            }
            "eqodds" => eqodds_amplifying_counterexample(seed)?,
            "alpha" => alpha_counterexample(
                &required(&params.alpha, "alpha")?,
                &required(&params.alpha_prime, "alpha_prime")?,
                seed,
            )?,
            "xor" => xor_example(),
            "ypz" => ypz_example(),
            other => return Err(Error(CaStatus::InvalidParameter, format!("unknown construction `{other}`"))),
        };
        put_handle(out, dist)
    })
}

/// Runs one theorem suite (`T1`..`T11`, `L1`, `TBL`) or `all` in exact mode
/// and writes the JSON list of suite reports. `passed` (nullable) receives 1
/// when no trial failed.
///
/// # Safety
/// `theorem` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ca_verify(
    theorem: *const c_char,
    trials: usize,
    seed: u64,
    out: *mut *mut c_char,
    passed: *mut i32,
) -> CaStatus {
    guard(|| {
        let name = text(theorem, "theorem")?;
        check_out(out)?;
        let cfg = SuiteConfig::new(trials, seed);
        let reports = if name.eq_ignore_ascii_case("all") {
            run_all_with(&cfg)?
        } else {
            vec![run_suite_with(name.parse::<TheoremId>()?, &cfg)?]
        };
        if !passed.is_null() {
            *passed = i32::from(reports.iter().all(|r| r.passed()));
        }
        put_string(out, serde_json::to_string_pretty(&reports)?)
    })
}
