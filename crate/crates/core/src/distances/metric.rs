use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::probability::{Label, Support};
use crate::scalar::{parse_rational, render_ratio, Rational, Scalar};
use num_traits::Signed;

/// Ground metric on a finite support.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// `d(u, v) = 1` iff `u != v`.
    Indicator,
    /// Labels are numbers; `d(u, v) = |u - v|`.
    NumericAbsolute,
    /// Full symmetric matrix aligned with the support order.
    ExplicitMatrix(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSupport {
    support: Support,
    metric: Metric,
}

impl MetricSupport {
    pub fn indicator(support: Support) -> Self {
        MetricSupport { support, metric: Metric::Indicator }
    }

    pub fn numeric(support: Support) -> Result<Self> {
        if let Some(l) = support.iter().find(|l| l.as_rational().is_none()) {
            return Err(AuditError::NotNumeric(l.to_string()));
        }
        Ok(MetricSupport { support, metric: Metric::NumericAbsolute })
    }

    /// `labels[i]` and `matrix[i][j]` are given in any order; the matrix is
    /// re-indexed to the canonical support order and validated as a metric.
    pub fn explicit(labels: Vec<Label>, matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(AuditError::InvalidMetric(format!("matrix must be {n}x{n}")));
        }
        let support = Support::new(labels.iter().cloned())?;
        let pos: Vec<usize> =
            support.iter().map(|l| labels.iter().position(|x| x == l).expect("label present")).collect();
        let d: Vec<Vec<Rational>> = pos.iter().map(|&i| pos.iter().map(|&j| matrix[i][j].clone()).collect()).collect();
        for i in 0..n {
            if !d[i][i].is_zero() {
                return Err(AuditError::InvalidMetric(format!("d({0}, {0}) must be 0", support.get(i))));
            }
            for j in 0..n {
                if d[i][j] != d[j][i] {
                    return Err(AuditError::InvalidMetric("matrix is not symmetric".into()));
                }
                if i != j && !d[i][j].is_positive() {
                    return Err(AuditError::InvalidMetric(format!(
                        "d({}, {}) must be positive",
                        support.get(i),
                        support.get(j)
                    )));
                }
                for k in 0..n {
                    if d[i][k] > &d[i][j] + &d[j][k] {
                        return Err(AuditError::InvalidMetric(format!(
                            "triangle inequality fails at ({}, {}, {})",
                            support.get(i),
                            support.get(j),
                            support.get(k)
                        )));
                    }
                }
            }
        }
        Ok(MetricSupport { support, metric: Metric::ExplicitMatrix(d) })
    }

    /// Parses `{"labels": [...], "d": [[...], ...]}`; entries are numbers or rational strings.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MetricFile = serde_json::from_str(text)?;
        let matrix = file
            .d
            .iter()
            .map(|row| row.iter().map(|v| v.to_rational()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        MetricSupport::explicit(file.labels, matrix)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.support.len();
        let d: Vec<Vec<String>> =
            (0..n).map(|i| (0..n).map(|j| render_ratio(&self.distance::<Rational>(i, j))).collect()).collect();
        serde_json::json!({ "labels": self.support.labels(), "d": d })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn kind(&self) -> &'static str {
        match self.metric {
            Metric::Indicator => "indicator",
            Metric::NumericAbsolute => "numeric",
            Metric::ExplicitMatrix(_) => "explicit",
        }
    }

    pub fn distance<T: Scalar>(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::zero();
        }
        match &self.metric {
            Metric::Indicator => T::one(),
            Metric::NumericAbsolute => {
                let a = self.support.get(i).as_rational().expect("validated numeric");
                let b = self.support.get(j).as_rational().expect("validated numeric");
                T::from_ratio(&(a - b).abs())
            }
            Metric::ExplicitMatrix(d) => T::from_ratio(&d[i][j]),
        }
    }

    pub fn cost_matrix<T: Scalar>(&self) -> Vec<Vec<T>> {
        let n = self.support.len();
        (0..n).map(|i| (0..n).map(|j| self.distance(i, j)).collect()).collect()
    }

    /// `max d(u, v)` over the support.
    pub fn diameter<T: Scalar>(&self) -> T {
        let n = self.support.len();
        let mut best = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                let d: T = self.distance(i, j);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }

    /// The same metric on a relabelled support; `f` must be injective.
    /// Numeric metrics recompute distances from the new labels.
    pub fn relabelled(&self, f: impl Fn(&Label) -> Label) -> Result<Self> {
        let labels: Vec<Label> = self.support.iter().map(&f).collect();
        match &self.metric {
            Metric::Indicator => Ok(MetricSupport::indicator(Support::new(labels)?)),
            Metric::NumericAbsolute => MetricSupport::numeric(Support::new(labels)?),
            Metric::ExplicitMatrix(d) => MetricSupport::explicit(labels, d.clone()),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct MetricFile {
    labels: Vec<Label>,
    d: Vec<Vec<MatrixEntry>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum MatrixEntry {
    Int(i64),
    Float(f64),
    Text(String),
}

impl MatrixEntry {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            MatrixEntry::Int(v) => Ok(Rational::from(*v)),
            MatrixEntry::Float(v) => parse_rational(&v.to_string()),
            MatrixEntry::Text(s) => parse_rational(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_matrix_is_reindexed_and_validated() {
        let json = r#"{"labels":["b","a","c"],"d":[[0,1,2],[1,0,"3/2"],[2,1.5,0]]}"#;
        let ms = MetricSupport::from_json(json).unwrap();
        let a = ms.support().index_of(&Label::text("a")).unwrap();
        let c = ms.support().index_of(&Label::text("c")).unwrap();
        assert_eq!(ms.distance::<Rational>(a, c), Rational::from_frac(3, 2));
        assert_eq!(ms.diameter::<f64>(), 2.0);
    }

    #[test]
    fn triangle_violation_is_rejected() {
        let json = r#"{"labels":["a","b","c"],"d":[[0,1,5],[1,0,1],[5,1,0]]}"#;
        assert!(matches!(MetricSupport::from_json(json), Err(AuditError::InvalidMetric(_))));
    }

    #[test]
    fn asymmetric_or_degenerate_matrix_is_rejected() {
        let asym = r#"{"labels":["a","b"],"d":[[0,1],[2,0]]}"#;
        assert!(MetricSupport::from_json(asym).is_err());
        let zero = r#"{"labels":["a","b"],"d":[[0,0],[0,0]]}"#;
        assert!(MetricSupport::from_json(zero).is_err());
    }

    #[test]
    fn numeric_metric_needs_numbers() {
        let s = Support::new([Label::int(1), Label::text("x")]).unwrap();
        assert!(matches!(MetricSupport::numeric(s), Err(AuditError::NotNumeric(_))));
    }
}
