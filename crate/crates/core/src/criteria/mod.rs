//! Construct-space criteria: disparity amplification, construct accuracy, worldviews.

mod accuracy;
mod worldview;

pub use accuracy::{construct_accuracy, max_accuracy_under_alpha_disparity, max_accuracy_under_dem_parity};
pub use worldview::{impose_worldview, worldview_holds, Worldview, WorldviewReport};

use serde::Serialize;

use crate::distances::{emd_cost, lipschitz_constant, tv_distance, MetricSupport};
pub use crate::empirical::{observed_disparity, output_disparity};
use crate::error::{AuditError, Result};
use crate::probability::{JointDistribution, Label, Support, Variable};
use crate::scalar::{self, Scalar, FLOAT_TOL};

/// Both sides of a disparity-amplification inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct CriterionReport<T: Scalar> {
    pub criterion: String,
    /// Output disparity.
    #[serde(serialize_with = "scalar::serialize")]
    pub left: T,
    /// Disparity the construct space accounts for.
    #[serde(serialize_with = "scalar::serialize")]
    pub right: T,
    pub amplification: bool,
    #[serde(serialize_with = "scalar::serialize_named")]
    pub components: Vec<(String, T)>,
    pub notes: Vec<String>,
    /// The same criterion evaluated on the likelihood-transformed construct space.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transformed: Option<Box<CriterionReport<T>>>,
}

impl<T: Scalar> CriterionReport<T> {
    fn new(criterion: &str, left: T, right: T) -> Self {
        CriterionReport {
            criterion: criterion.into(),
            amplification: scalar::gt_tol(&left, &right, FLOAT_TOL),
            left,
            right,
            components: Vec::new(),
            notes: Vec::new(),
            transformed: None,
        }
    }
}

/// `tv(Yc | Z=0, Yc | Z=1)`.
pub fn construct_disparity<T: Scalar>(dist: &JointDistribution<T>) -> Result<T> {
    dist.require_construct()?;
    Ok(tv_distance(&dist.group_law(Variable::Yc, 0), &dist.group_law(Variable::Yc, 1)))
}

/// Amplification iff output disparity exceeds construct disparity.
pub fn disparity_amplification_categorical<T: Scalar>(dist: &JointDistribution<T>) -> Result<CriterionReport<T>> {
    let right = construct_disparity(dist)?;
    Ok(CriterionReport::new("categorical", output_disparity(dist), right))
}

/// `ℓ(yc) = Pr[Yp = 1 | Yc = yc]` on the construct labels that carry mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Likelihood<T> {
    pub values: Vec<(Label, T)>,
    /// Construct labels with zero mass, where `ℓ` is undefined.
    pub dropped: Vec<Label>,
}

impl<T: Scalar> Likelihood<T> {
    pub fn at(&self, label: &Label) -> Result<T> {
        if let Some((_, v)) = self.values.iter().find(|(l, _)| l == label) {
            return Ok(v.clone());
        }
        if self.dropped.contains(label) {
            return Err(AuditError::ZeroMassConstructLabel(label.to_string()));
        }
        Err(AuditError::UnknownLabel { variable: "Yc".into(), label: label.to_string() })
    }

    fn notes(&self) -> Vec<String> {
        self.dropped
            .iter()
            .map(|l| format!("construct label `{l}` has zero mass; likelihood undefined and dropped"))
            .collect()
    }
}

/// Index of `Yp = 1`, or `None` if 1 is not in the support. Errors on labels other than 0 and 1.
fn positive_index<T: Scalar>(dist: &JointDistribution<T>) -> Result<Option<usize>> {
    let yp = dist.support(Variable::Yp);
    if let Some(l) = yp.iter().find(|l| !l.is_int(0) && !l.is_int(1)) {
        return Err(AuditError::NonBinaryPrediction(l.to_string()));
    }
    Ok(yp.index_of(&Label::int(1)))
}

pub fn likelihood<T: Scalar>(dist: &JointDistribution<T>) -> Result<Likelihood<T>> {
    dist.require_construct()?;
    let one = positive_index(dist)?;
    let yc = dist.support(Variable::Yc);
    let mut values = Vec::new();
    let mut dropped = Vec::new();
    for (c, label) in yc.iter().enumerate() {
        let mass = dist.mass_where_idx(&[(Variable::Yc, c)]);
        if mass.is_zero() {
            dropped.push(label.clone());
            continue;
        }
        let hit = match one {
            Some(p) => dist.mass_where_idx(&[(Variable::Yc, c), (Variable::Yp, p)]),
            None => T::zero(),
        };
        values.push((label.clone(), hit / mass));
    }
    Ok(Likelihood { values, dropped })
}

/// Amplification iff output disparity exceeds `ρ* · EMD(Yc | Z=0, Yc | Z=1)`,
/// where `ρ*` is the Lipschitz constant of `ℓ` under `ms`.
pub fn disparity_amplification_general<T: Scalar>(
    dist: &JointDistribution<T>,
    ms: &MetricSupport,
) -> Result<CriterionReport<T>> {
    let ell = likelihood(dist)?;
    let rho = lipschitz_constant(&ell.values, ms)?;
    let emd = emd_cost(&dist.group_law(Variable::Yc, 0), &dist.group_law(Variable::Yc, 1), ms)?;
    let mut report = CriterionReport::new("general", output_disparity(dist), rho.clone() * emd.clone());
    report.components.push(("rho_star".into(), rho));
    report.components.push(("emd".into(), emd));
    report.components.extend(ell.values.iter().map(|(l, v)| (format!("likelihood[{l}]"), v.clone())));
    report.notes = ell.notes();
    Ok(report)
}

/// The general criterion on the raw construct space, with the verdict on the
/// `ℓ`-transformed space attached.
pub fn disparity_amplification_general_with_transform<T: Scalar>(
    dist: &JointDistribution<T>,
    ms: &MetricSupport,
) -> Result<CriterionReport<T>> {
    let mut raw = disparity_amplification_general(dist, ms)?;
    let transformed = transform_construct(dist)?;
    let numeric = MetricSupport::numeric(transformed.support(Variable::Yc))?;
    let mut inner = disparity_amplification_general(&transformed, &numeric)?;
    inner.criterion = "general_transformed".into();
    raw.transformed = Some(Box::new(inner));
    Ok(raw)
}

/// Replaces each construct label `yc` by the number `ℓ(yc)`.
///
/// Labels with equal likelihood merge. Zero-mass construct labels are folded
/// into the first defined value so they add no support points.
pub fn transform_construct<T: Scalar>(dist: &JointDistribution<T>) -> Result<JointDistribution<T>> {
    let ell = likelihood(dist)?;
    let fallback = ell.values[0].1.to_ratio();
    let mapped: Vec<(Label, Label)> = dist
        .support(Variable::Yc)
        .iter()
        .map(|l| {
            let r = ell.at(l).map(|v| v.to_ratio()).unwrap_or_else(|_| fallback.clone());
            (l.clone(), Label::Num(r))
        })
        .collect();
    dist.relabel(Variable::Yc, |l| {
        mapped.iter().find(|(k, _)| k == l).map(|(_, v)| v.clone()).expect("label in support")
    })
}

/// Metric on the construct support chosen by name: `indicator` or `numeric`.
pub fn construct_metric<T: Scalar>(dist: &JointDistribution<T>, kind: &str) -> Result<MetricSupport> {
    dist.require_construct()?;
    let support: Support = dist.support(Variable::Yc);
    match kind {
        "indicator" => Ok(MetricSupport::indicator(support)),
        "numeric" => MetricSupport::numeric(support),
        other => Err(AuditError::InvalidMetric(format!("unknown metric `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Assignment, Supports};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    /// Yc uniform and independent of Z; Yo := Yc; Yp given by `f(z, yc)`.
    fn model(f: impl Fn(u8, i64) -> i64) -> JointDistribution<Rational> {
        let supports = Supports::new(Some(Support::binary()), Support::binary(), Support::binary());
        let cells = (0..2u8)
            .flat_map(|z| (0..2i64).map(move |c| (z, c)))
            .map(|(z, c)| (Assignment::new(z, Some(Label::int(c)), Label::int(c), Label::int(f(z, c))), q(1, 4)));
        JointDistribution::from_cells(supports, cells).unwrap()
    }

    #[test]
    fn construct_optimal_model_is_on_the_boundary() {
        let d = model(|_, c| c);
        let r = disparity_amplification_categorical(&d).unwrap();
        assert_eq!(r.left, r.right);
        assert!(!r.amplification);
    }

    #[test]
    fn group_indicator_model_amplifies_under_both_criteria() {
        let d = model(|z, _| z as i64);
        assert!(disparity_amplification_categorical(&d).unwrap().amplification);
        let ms = MetricSupport::indicator(Support::binary());
        let g = disparity_amplification_general(&d, &ms).unwrap();
        assert!(g.amplification);
        assert_eq!(g.right, q(0, 1));
    }

    #[test]
    fn transform_gives_unit_slope() {
        let supports = Supports::new(
            Some(Support::new([Label::text("a"), Label::text("b")]).unwrap()),
            Support::ints([0]),
            Support::binary(),
        );
        let a = |z: u8, c: &str, p: i64| Assignment::new(z, Some(Label::text(c)), Label::int(0), Label::int(p));
        // ℓ(a) = 1/5, ℓ(b) = 4/5
        let d = JointDistribution::from_cells(
            supports,
            [(a(0, "a", 1), q(1, 10)), (a(0, "a", 0), q(4, 10)), (a(1, "b", 1), q(4, 10)), (a(1, "b", 0), q(1, 10))],
        )
        .unwrap();
        let t = transform_construct(&d).unwrap();
        let yc = t.support(Variable::Yc);
        assert_eq!(yc.labels(), &[Label::Num(q(1, 5)), Label::Num(q(4, 5))]);
        let ell = likelihood(&t).unwrap();
        let ms = MetricSupport::numeric(yc).unwrap();
        assert_eq!(lipschitz_constant(&ell.values, &ms).unwrap(), q(1, 1));
        for (l, v) in &ell.values {
            assert_eq!(l.as_rational().unwrap(), v);
        }
        let full =
            disparity_amplification_general_with_transform(&d, &MetricSupport::indicator(d.support(Variable::Yc)))
                .unwrap();
        assert!(full.transformed.is_some());
    }

    #[test]
    fn non_binary_prediction_is_rejected() {
        let supports = Supports::new(Some(Support::binary()), Support::binary(), Support::range(3));
        let d = crate::probability::random_joint::<Rational>(&supports, 3);
        assert!(matches!(likelihood(&d), Err(AuditError::NonBinaryPrediction(_))));
    }
}
