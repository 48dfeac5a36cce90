//! One audit run: load a table, run the requested tests and criteria, and
//! collect everything into a versioned JSON report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::criteria::{
    construct_accuracy, construct_disparity, disparity_amplification_categorical,
    disparity_amplification_general_with_transform, worldview_holds, Worldview,
};
use crate::distances::MetricSupport;
use crate::empirical::{
    alpha_disparity, demographic_parity, equalized_odds, misclassification_parity, observed_disparity,
    output_disparity, p_percent_rule, predictive_parity,
};
use crate::error::{AuditError, Result};
use crate::io::{read_csv_path, read_joint_path};
use crate::probability::{from_samples, DeclaredSupports, JointDistribution, Label, Variable};
use crate::scalar::{render_ratio, Mode, Rational, Scalar};

pub const SCHEMA: &str = "construct-audit/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Csv,
    DistJson,
}

impl InputFormat {
    /// `.csv` files are datasets; anything else is read as a distribution file.
    pub fn detect(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::DistJson,
        }
    }

    /// Datasets are audited in floating point, distribution files exactly.
    pub fn default_mode(self) -> Mode {
        match self {
            InputFormat::Csv => Mode::Float,
            InputFormat::DistJson => Mode::Rational,
        }
    }
}

impl FromStr for InputFormat {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "dist-json" | "json" | "dist" => Ok(InputFormat::DistJson),
            other => Err(AuditError::Parse(format!("unknown input format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TestKind {
    DemographicParity,
    EqualizedOdds,
    PredictiveParity,
    AlphaDisparity,
    Misclassification,
    PPercent,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::DemographicParity,
        TestKind::EqualizedOdds,
        TestKind::PredictiveParity,
        TestKind::AlphaDisparity,
        TestKind::Misclassification,
        TestKind::PPercent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::DemographicParity => "dp",
            TestKind::EqualizedOdds => "eo",
            TestKind::PredictiveParity => "pp",
            TestKind::AlphaDisparity => "alpha",
            TestKind::Misclassification => "misclass",
            TestKind::PPercent => "ppct",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        TestKind::ALL.into_iter().find(|k| k.name() == t).ok_or_else(|| {
            AuditError::Parse(format!("unknown test `{s}` (expected dp, eo, pp, alpha, misclass, ppct)"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    Categorical,
    General,
}

impl FromStr for CriterionKind {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "categorical" => Ok(CriterionKind::Categorical),
            "general" => Ok(CriterionKind::General),
            other => Err(AuditError::Parse(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Metric on the construct support for the general criterion.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricChoice {
    Indicator,
    Numeric,
    /// A metric JSON file.
    File(PathBuf),
}

impl FromStr for MetricChoice {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "indicator" => Ok(MetricChoice::Indicator),
            "numeric" => Ok(MetricChoice::Numeric),
            _ => Ok(MetricChoice::File(PathBuf::from(s.trim()))),
        }
    }
}

impl MetricChoice {
    pub fn resolve<T: Scalar>(&self, dist: &JointDistribution<T>) -> Result<MetricSupport> {
        dist.require_construct()?;
        let yc = dist.support(Variable::Yc);
        let ms = match self {
            MetricChoice::Indicator => MetricSupport::indicator(yc.clone()),
            MetricChoice::Numeric => MetricSupport::numeric(yc.clone())?,
            MetricChoice::File(path) => MetricSupport::from_json(&std::fs::read_to_string(path)?)?,
        };
        if let Some(l) = yc.iter().find(|l| !ms.support().contains(l)) {
            return Err(AuditError::MetricMismatch(l.to_string()));
        }
        Ok(ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub input: PathBuf,
    /// Detected from the file extension when `None`.
    pub format: Option<InputFormat>,
    /// Empty means every test whose parameters are available.
    pub tests: Vec<TestKind>,
    pub tau: Rational,
    pub alpha: Option<Rational>,
    pub p: Rational,
    pub favorable: Label,
    pub worldview: Option<Worldview>,
    /// Empty means the categorical criterion whenever a construct is present.
    pub criteria: Vec<CriterionKind>,
    pub metric: MetricChoice,
    /// Follows the input format when `None`.
    pub mode: Option<Mode>,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl AuditConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        AuditConfig {
            input: input.into(),
            format: None,
            tests: Vec::new(),
            tau: Rational::from_frac(0, 1),
            alpha: None,
            p: Rational::from_frac(4, 5),
            favorable: Label::int(1),
            worldview: None,
            criteria: Vec::new(),
            metric: MetricChoice::Indicator,
            mode: None,
            output: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = Rational::from_frac(0, 1);
        let one = Rational::from_frac(1, 1);
        if self.tau < zero {
            return Err(AuditError::InvalidParameter(format!("tau = {} is negative", render_ratio(&self.tau))));
        }
        if let Some(a) = &self.alpha {
            if *a < zero || *a > one {
                return Err(AuditError::InvalidParameter(format!("alpha = {} is outside [0, 1]", render_ratio(a))));
            }
        }
        if self.p <= zero || self.p > one {
            return Err(AuditError::InvalidParameter(format!("p = {} is outside (0, 1]", render_ratio(&self.p))));
        }
        if self.tests.contains(&TestKind::AlphaDisparity) && self.alpha.is_none() {
            return Err(AuditError::InvalidParameter("the alpha test needs --alpha".into()));
        }
        Ok(())
    }

    pub fn format(&self) -> InputFormat {
        self.format.unwrap_or_else(|| InputFormat::detect(&self.input))
    }

    pub fn mode(&self) -> Mode {
        self.mode.unwrap_or_else(|| self.format().default_mode())
    }

    fn tests(&self) -> Vec<TestKind> {
        if !self.tests.is_empty() {
            return self.tests.clone();
        }
        TestKind::ALL.into_iter().filter(|k| *k != TestKind::AlphaDisparity || self.alpha.is_some()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub schema: &'static str,
    pub mode: Mode,
    pub format: InputFormat,
    pub seed: u64,
    pub tests: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worldview: Option<Value>,
    pub criteria: Vec<Value>,
    /// Disparities and, with a construct column, construct accuracy.
    pub quantities: BTreeMap<String, String>,
    /// Every test passes and no criterion reports amplification.
    pub pass: bool,
}

impl AuditReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Reads the input named by `cfg` in arithmetic type `T`.
pub fn load<T: Scalar>(cfg: &AuditConfig) -> Result<JointDistribution<T>> {
    match cfg.format() {
        InputFormat::DistJson => read_joint_path(&cfg.input),
        InputFormat::Csv => from_samples(&read_csv_path(&cfg.input)?, &DeclaredSupports::default()),
    }
}

/// Loads the input and audits it in the configured mode.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    match cfg.mode() {
        Mode::Rational => audit_distribution(&load::<Rational>(cfg)?, cfg),
        Mode::Float => audit_distribution(&load::<f64>(cfg)?, cfg),
    }
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("reports serialize")
}

/// Audits an already loaded table.
pub fn audit_distribution<T: Scalar>(dist: &JointDistribution<T>, cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let tau = T::from_ratio(&cfg.tau);
    let mut pass = true;
    let mut tests = Vec::new();
    for kind in cfg.tests() {
        let report = match kind {
            TestKind::DemographicParity => demographic_parity(dist, &tau)?,
            TestKind::EqualizedOdds => equalized_odds(dist, &tau)?,
            TestKind::PredictiveParity => predictive_parity(dist, &tau)?,
            TestKind::AlphaDisparity => {
                let alpha = cfg.alpha.as_ref().expect("validated");
                alpha_disparity(dist, &T::from_ratio(alpha), &tau)?
            }
            TestKind::Misclassification => misclassification_parity(dist, &tau)?,
            TestKind::PPercent => p_percent_rule(dist, &cfg.favorable, &T::from_ratio(&cfg.p))?,
        };
        pass &= report.pass;
        tests.push(to_value(&report));
    }

    let worldview = match &cfg.worldview {
        Some(wv) if dist.has_construct() => Some(to_value(&worldview_holds(dist, wv, &tau)?)),
        Some(wv) => Some(serde_json::json!({
            "worldview": wv,
            "holds": Value::Null,
            "note": "no construct column; the worldview is assumed, not checked",
        })),
        None => None,
    };

    let kinds = if cfg.criteria.is_empty() {
        if dist.has_construct() {
            vec![CriterionKind::Categorical]
        } else {
            Vec::new()
        }
    } else {
        cfg.criteria.clone()
    };
    let mut criteria = Vec::new();
    for kind in kinds {
        let report = match kind {
            CriterionKind::Categorical => disparity_amplification_categorical(dist)?,
            CriterionKind::General => {
                let ms = cfg.metric.resolve(dist)?;
                disparity_amplification_general_with_transform(dist, &ms)?
            }
        };
        pass &= !report.amplification;
        criteria.push(to_value(&report));
    }

    let mut quantities = BTreeMap::new();
    quantities.insert("output_disparity".to_string(), output_disparity(dist).render());
    quantities.insert("observed_disparity".to_string(), observed_disparity(dist).render());
    if dist.has_construct() {
        quantities.insert("construct_disparity".to_string(), construct_disparity(dist)?.render());
        // undefined when the construct and prediction supports are disjoint
        if let Ok(acc) = construct_accuracy(dist) {
            quantities.insert("construct_accuracy".to_string(), acc.render());
        }
    }

    Ok(AuditReport {
        schema: SCHEMA,
        mode: T::MODE,
        format: cfg.format(),
        seed: cfg.seed,
        tests,
        worldview,
        criteria,
        quantities,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::xor_example;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn parses_test_names() {
        let kinds: Vec<TestKind> = "dp,eo,pp,alpha,misclass,ppct".split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(kinds, TestKind::ALL);
        assert!("bogus".parse::<TestKind>().is_err());
    }

    #[test]
    fn xor_fails_misclassification_only() {
        let mut cfg = AuditConfig::new("xor.json");
        cfg.tests = vec![TestKind::DemographicParity, TestKind::Misclassification];
        let report = audit_distribution(&xor_example::<Rational>(), &cfg).unwrap();
        assert_eq!(report.tests[0]["pass"], true);
        assert_eq!(report.tests[1]["statistic"], "1");
        assert_eq!(report.exit_code(), 1);
        assert_eq!(report.schema, SCHEMA);
        assert_eq!(report.quantities["construct_accuracy"], "1/2");
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut cfg = AuditConfig::new("x.json");
        cfg.alpha = Some(q(3, 2));
        assert!(cfg.validate().is_err());
        cfg.alpha = None;
        cfg.tests = vec![TestKind::AlphaDisparity];
        assert!(cfg.validate().is_err());
        cfg.tests.clear();
        cfg.tau = q(-1, 10);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mode_follows_format() {
        assert_eq!(AuditConfig::new("d.csv").mode(), Mode::Float);
        assert_eq!(AuditConfig::new("d.json").mode(), Mode::Rational);
    }
}
