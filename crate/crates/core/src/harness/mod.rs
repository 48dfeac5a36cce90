//! Seeded randomized suites that check every theorem numerically.
//!
//! Each trial samples a premise by direct construction, re-audits it with the
//! library's own tests, then asserts the conclusion: exactly in rational mode,
//! within [`HARNESS_TOL`] in float mode.

mod samplers;
mod suites;
mod table;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AuditError, Result};
use crate::io::DistributionFile;
use crate::probability::random::derive_seed;
use crate::probability::JointDistribution;
use crate::scalar::{Mode, Rational, Scalar};

pub use table::{TableCell, TABLE_TESTS};

/// Float-mode assertion tolerance.
pub const HARNESS_TOL: f64 = 1e-9;

/// Random kernels drawn per base distribution in the accuracy suites.
pub const DEFAULT_KERNELS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TheoremId {
    T1,
    T2,
    L1,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    T11,
    #[serde(rename = "TBL")]
    Table,
}

impl TheoremId {
    pub const ALL: [TheoremId; 13] = [
        TheoremId::T1,
        TheoremId::T2,
        TheoremId::L1,
        TheoremId::T3,
        TheoremId::T4,
        TheoremId::T5,
        TheoremId::T6,
        TheoremId::T7,
        TheoremId::T8,
        TheoremId::T9,
        TheoremId::T10,
        TheoremId::T11,
        TheoremId::Table,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T1 => "T1",
            TheoremId::T2 => "T2",
            TheoremId::L1 => "L1",
            TheoremId::T3 => "T3",
            TheoremId::T4 => "T4",
            TheoremId::T5 => "T5",
            TheoremId::T6 => "T6",
            TheoremId::T7 => "T7",
            TheoremId::T8 => "T8",
            TheoremId::T9 => "T9",
            TheoremId::T10 => "T10",
            TheoremId::T11 => "T11",
            TheoremId::Table => "TBL",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            TheoremId::T1 => "demographic parity implies no disparity amplification",
            TheoremId::T2 => "demographic parity caps construct accuracy at 1 - tv(Yc..)/2, and the cap is attained",
            TheoremId::L1 => "sum of pointwise minima equals 1 - tv; a maximal coupling agrees with that probability",
            TheoremId::T3 => "under WYSIWYG, equalized odds implies no disparity amplification",
            TheoremId::T4 => "without WYSIWYG, equalized odds admits disparity amplification",
            TheoremId::T5 => "a predictive-parity model can have output disparity 1 - epsilon and amplify",
            TheoremId::T6 => "under alpha-Hybrid, passing the alpha-disparity test implies no amplification",
            TheoremId::T7 => "under alpha-Hybrid, passing the alpha'-test (alpha' < alpha) caps construct accuracy",
            TheoremId::T8 => "under alpha-Hybrid, passing the alpha'-test (alpha' > alpha) admits amplification",
            TheoremId::T9 => "categorical amplification implies general amplification under the indicator metric",
            TheoremId::T10 => "demographic parity implies no general disparity amplification",
            TheoremId::T11 => "under WYSIWYG, equalized odds implies no general disparity amplification",
            TheoremId::Table => "test x worldview summary matrix",
        }
    }

    fn stream(self) -> u64 {
        1000 + self as u64
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase();
        if key == "TABLE" {
            return Ok(TheoremId::Table);
        }
        TheoremId::ALL.into_iter().find(|id| id.name() == key).ok_or_else(|| AuditError::UnknownTheorem(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Kernels per base distribution in T2 and T7.
    pub kernels: usize,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        SuiteConfig { trials, seed, mode: Mode::Rational, kernels: DEFAULT_KERNELS }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kernels(mut self, kernels: usize) -> Self {
        self.kernels = kernels;
        self
    }
}

/// Why a trial failed, with the offending distribution when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub message: String,
    pub distribution: Option<serde_json::Value>,
}

impl Failure {
    pub fn new<T: Scalar>(message: String, dist: &JointDistribution<T>) -> Self {
        let distribution = serde_json::to_value(DistributionFile::from_joint(dist)).ok();
        Failure { message, distribution }
    }
}

impl From<AuditError> for Failure {
    fn from(e: AuditError) -> Self {
        Failure { message: format!("error: {e}"), distribution: None }
    }
}

pub type Outcome = std::result::Result<(), Failure>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    /// Pass to `replay` to rerun exactly this trial.
    pub seed: u64,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub theorem: TheoremId,
    pub statement: String,
    pub mode: Mode,
    pub trials: usize,
    pub failures: usize,
    pub first_counterexample: Option<Counterexample>,
    pub wall_time_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<TableCell>>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs `trials` trials of one suite in rational mode.
pub fn run_suite(id: TheoremId, trials: usize, seed: u64) -> Result<SuiteReport> {
    run_suite_with(id, &SuiteConfig::new(trials, seed))
}

pub fn run_suite_with(id: TheoremId, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.trials == 0 {
        return Err(AuditError::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(match cfg.mode {
        Mode::Rational => run::<Rational>(id, cfg),
        Mode::Float => run::<f64>(id, cfg),
    })
}

/// Every suite in catalogue order.
pub fn run_all(trials: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    run_all_with(&SuiteConfig::new(trials, seed))
}

pub fn run_all_with(cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    TheoremId::ALL.into_iter().map(|id| run_suite_with(id, cfg)).collect()
}

/// Reruns the single trial whose seed a [`Counterexample`] reported.
pub fn replay(id: TheoremId, seed: u64, cfg: &SuiteConfig) -> Outcome {
    match cfg.mode {
        Mode::Rational => trial::<Rational>(id, seed, cfg.kernels),
        Mode::Float => trial::<f64>(id, seed, cfg.kernels),
    }
}

fn trial<T: Scalar>(id: TheoremId, seed: u64, kernels: usize) -> Outcome {
    match id {
        TheoremId::T1 => suites::t1::<T>(seed),
        TheoremId::T2 => suites::t2::<T>(seed, kernels),
        TheoremId::L1 => suites::l1::<T>(seed),
        TheoremId::T3 => suites::t3::<T>(seed),
        TheoremId::T4 => suites::t4::<T>(seed),
        TheoremId::T5 => suites::t5::<T>(seed),
        TheoremId::T6 => suites::t6::<T>(seed),
        TheoremId::T7 => suites::t7::<T>(seed, kernels),
        TheoremId::T8 => suites::t8::<T>(seed),
        TheoremId::T9 => suites::t9::<T>(seed),
        TheoremId::T10 => suites::t10::<T>(seed),
        TheoremId::T11 => suites::t11::<T>(seed),
        TheoremId::Table => table::whole_table::<T>(seed),
    }
}

/// Trial outcomes in trial order, run in parallel.
pub(crate) fn sweep(stream: u64, trials: usize, f: impl Fn(u64) -> Outcome + Sync) -> Vec<(u64, Outcome)> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(stream, i as u64);
            (seed, f(seed))
        })
        .collect()
}

pub(crate) fn summarize(outcomes: Vec<(u64, Outcome)>) -> (usize, Option<Counterexample>) {
    let failures = outcomes.iter().filter(|(_, o)| o.is_err()).count();
    let first = outcomes.into_iter().enumerate().find_map(|(trial, (seed, o))| {
        o.err().map(|f| Counterexample { trial, seed, message: f.message, distribution: f.distribution })
    });
    (failures, first)
}

fn run<T: Scalar>(id: TheoremId, cfg: &SuiteConfig) -> SuiteReport {
    let start = Instant::now();
    let stream = derive_seed(cfg.seed, id.stream());
    let (failures, first, table) = if id == TheoremId::Table {
        let (cells, first) = table::run_cells::<T>(stream, cfg.trials);
        (cells.iter().map(|c| c.failures).sum(), first, Some(cells))
    } else {
        let (failures, first) = summarize(sweep(stream, cfg.trials, |s| trial::<T>(id, s, cfg.kernels)));
        (failures, first, None)
    };
    SuiteReport {
        theorem: id,
        statement: id.statement().into(),
        mode: T::MODE,
        trials: cfg.trials,
        failures,
        first_counterexample: first,
        wall_time_ms: start.elapsed().as_millis() as u64,
        table,
    }
}
