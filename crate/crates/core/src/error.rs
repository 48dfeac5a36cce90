use thiserror::Error;

pub type Result<T, E = AuditError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("negative probability {value} at {cell}")]
    NegativeProbability { cell: String, value: String },
    #[error("total probability mass is {total}, expected 1")]
    MassNotOne { total: String },
    #[error("group Z={0} has zero probability mass")]
    EmptyGroup(u8),
    #[error("label `{label}` is not in the declared support of {variable}")]
    UnknownLabel { variable: String, label: String },
    #[error("duplicate label `{0}` in support")]
    DuplicateLabel(String),
    #[error("support is empty")]
    EmptySupport,
    #[error("conditioning event has zero probability: {0}")]
    ZeroMassCondition(String),
    #[error("some records carry a construct label and some do not")]
    MixedConstructPresence,
    #[error("model kernel has no row for {0}")]
    MissingKernelRow(String),
    #[error("invalid kernel row for {context}: {reason}")]
    InvalidKernelRow { context: String, reason: String },
    #[error("label `{0}` is outside the metric support")]
    MetricMismatch(String),
    #[error("label `{0}` is not numeric")]
    NotNumeric(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("brute-force oracle supports at most {max} labels, got {got}")]
    SupportTooLarge { got: usize, max: usize },
    #[error("test function is not 1-Lipschitz (constant {0})")]
    NotLipschitz(String),
    #[error("no observed/predicted slice has positive mass in both groups")]
    NoComparableSlice,
    #[error("favorable label has zero rate in both groups")]
    ZeroRate,
    #[error("the distribution carries no construct variable")]
    ConstructUnavailable,
    #[error("construct and prediction supports share no label")]
    SupportMismatch,
    #[error("prediction support must be a subset of {{0, 1}}, found `{0}`")]
    NonBinaryPrediction(String),
    #[error("likelihood undefined at zero-mass construct label `{0}`")]
    ZeroMassConstructLabel(String),
    #[error("alpha parameters out of order: need {0}")]
    WrongOrder(String),
    #[error("worldview target is infeasible: {0}")]
    InfeasibleTarget(String),
    #[error("epsilon too large: solved posterior {0} is not positive")]
    EpsilonTooLarge(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("optimality certificate failed: {0}")]
    Certificate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for AuditError {
    fn from(e: std::io::Error) -> Self {
        AuditError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for AuditError {
    fn from(e: serde_json::Error) -> Self {
        AuditError::Parse(e.to_string())
    }
}

impl From<csv::Error> for AuditError {
    fn from(e: csv::Error) -> Self {
        AuditError::Parse(e.to_string())
    }
}
