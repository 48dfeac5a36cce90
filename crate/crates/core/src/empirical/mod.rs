//! Tests that compare the observed and prediction spaces across the two groups.

use serde::Serialize;

use crate::distances::tv_distance;
use crate::error::{AuditError, Result};
use crate::probability::{JointDistribution, Label, Variable};
use crate::scalar::{self, Scalar, Total, FLOAT_TOL};

/// Outcome of one empirical test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TestReport<T: Scalar> {
    pub test: String,
    /// Per-slice disparities, keyed by the conditioning label.
    #[serde(serialize_with = "scalar::serialize_named")]
    pub slices: Vec<(String, T)>,
    #[serde(serialize_with = "scalar::serialize")]
    pub statistic: T,
    #[serde(serialize_with = "scalar::serialize")]
    pub threshold: T,
    pub pass: bool,
    /// Positive when passing with room to spare.
    #[serde(serialize_with = "scalar::serialize")]
    pub margin: T,
    #[serde(serialize_with = "scalar::serialize_named")]
    pub components: Vec<(String, T)>,
    pub notes: Vec<String>,
}

impl<T: Scalar> TestReport<T> {
    /// Report for an upper-bound test: pass iff `statistic <= threshold`.
    fn upper(test: &str, statistic: T, threshold: T) -> Self {
        let pass = scalar::le_tol(&statistic, &threshold, FLOAT_TOL);
        TestReport {
            test: test.into(),
            slices: Vec::new(),
            margin: threshold.clone() - statistic.clone(),
            statistic,
            threshold,
            pass,
            components: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn check_tau<T: Scalar>(tau: &T) -> Result<()> {
    if *tau < T::zero() {
        return Err(AuditError::InvalidParameter(format!("tolerance {} is negative", tau.render())));
    }
    Ok(())
}

fn check_unit<T: Scalar>(name: &str, x: &T) -> Result<()> {
    if *x < T::zero() || *x > T::one() {
        return Err(AuditError::InvalidParameter(format!("{name} = {} is outside [0, 1]", x.render())));
    }
    Ok(())
}

/// `tv(Yp | Z=0, Yp | Z=1)`.
pub fn output_disparity<T: Scalar>(dist: &JointDistribution<T>) -> T {
    tv_distance(&dist.group_law(Variable::Yp, 0), &dist.group_law(Variable::Yp, 1))
}

/// `tv(Yo | Z=0, Yo | Z=1)`.
pub fn observed_disparity<T: Scalar>(dist: &JointDistribution<T>) -> T {
    tv_distance(&dist.group_law(Variable::Yo, 0), &dist.group_law(Variable::Yo, 1))
}

pub fn demographic_parity<T: Scalar>(dist: &JointDistribution<T>, tau: &T) -> Result<TestReport<T>> {
    check_tau(tau)?;
    Ok(TestReport::upper("demographic_parity", output_disparity(dist), tau.clone()))
}

/// Slice-wise comparison of `target | slice_var = s, Z = z` across groups.
fn sliced<T: Scalar>(
    test: &str,
    dist: &JointDistribution<T>,
    slice_var: Variable,
    target: Variable,
    tau: &T,
) -> Result<TestReport<T>> {
    check_tau(tau)?;
    let support = dist.support(slice_var);
    let mut slices = Vec::new();
    let mut notes = Vec::new();
    for (s, label) in support.iter().enumerate() {
        let mass = |z: usize| dist.mass_where_idx(&[(Variable::Z, z), (slice_var, s)]);
        match (mass(0).is_positive(), mass(1).is_positive()) {
            (true, true) => {
                let a = dist.condition_idx(target, &[(Variable::Z, 0), (slice_var, s)])?;
                let b = dist.condition_idx(target, &[(Variable::Z, 1), (slice_var, s)])?;
                slices.push((label.to_string(), tv_distance(&a, &b)));
            }
            (true, false) | (false, true) => {
                let z = if mass(0).is_positive() { 1 } else { 0 };
                notes.push(format!("slice {slice_var}={label} skipped: zero mass in group Z={z}"));
            }
            (false, false) => {}
        }
    }
    let statistic = scalar::max_of(slices.iter().map(|(_, d)| d.clone())).ok_or(AuditError::NoComparableSlice)?;
    let mut report = TestReport::upper(test, statistic, tau.clone());
    report.slices = slices;
    report.notes = notes;
    Ok(report)
}

/// Max over `yo` of `tv(Yp | Yo=yo, Z=0, Yp | Yo=yo, Z=1)`.
pub fn equalized_odds<T: Scalar>(dist: &JointDistribution<T>, tau: &T) -> Result<TestReport<T>> {
    sliced("equalized_odds", dist, Variable::Yo, Variable::Yp, tau)
}

/// Max over `yp` of `tv(Yo | Yp=yp, Z=0, Yo | Yp=yp, Z=1)`.
pub fn predictive_parity<T: Scalar>(dist: &JointDistribution<T>, tau: &T) -> Result<TestReport<T>> {
    sliced("predictive_parity", dist, Variable::Yp, Variable::Yo, tau)
}

/// `tv(Yp..) - α·tv(Yo..)`.
pub fn alpha_disparity<T: Scalar>(dist: &JointDistribution<T>, alpha: &T, tau: &T) -> Result<TestReport<T>> {
    check_tau(tau)?;
    check_unit("alpha", alpha)?;
    let out = output_disparity(dist);
    let obs = observed_disparity(dist);
    let statistic = out.clone() - alpha.clone() * obs.clone();
    let mut report = TestReport::upper("alpha_disparity", statistic, tau.clone());
    report.components =
        vec![("alpha".into(), alpha.clone()), ("output_disparity".into(), out), ("observed_disparity".into(), obs)];
    Ok(report)
}

/// `Pr[Yc != Yp | Z = z]`.
pub fn misclassification_rate<T: Scalar>(dist: &JointDistribution<T>, z: u8) -> Result<T> {
    dist.require_construct()?;
    let yc = dist.support(Variable::Yc);
    let yp = dist.support(Variable::Yp);
    let wrong: T = dist
        .cells()
        .filter(|([zz, c, _, p], _)| *zz == z as usize && yc.get(*c) != yp.get(*p))
        .map(|(_, m)| m.clone())
        .total();
    Ok(wrong / dist.z_mass(z))
}

/// `|Pr[Yc != Yp | Z=0] - Pr[Yc != Yp | Z=1]|`.
pub fn misclassification_parity<T: Scalar>(dist: &JointDistribution<T>, tau: &T) -> Result<TestReport<T>> {
    check_tau(tau)?;
    let r0 = misclassification_rate(dist, 0)?;
    let r1 = misclassification_rate(dist, 1)?;
    let mut report = TestReport::upper("misclassification_parity", (r0.clone() - r1.clone()).abs(), tau.clone());
    report.components = vec![("error_rate_z0".into(), r0), ("error_rate_z1".into(), r1)];
    Ok(report)
}

/// Ratio form of the four-fifths rule: `min(r0/r1, r1/r0) >= p`.
pub fn p_percent_rule<T: Scalar>(dist: &JointDistribution<T>, favorable: &Label, p: &T) -> Result<TestReport<T>> {
    if *p <= T::zero() || *p > T::one() {
        return Err(AuditError::InvalidParameter(format!("p = {} is outside (0, 1]", p.render())));
    }
    let fav = dist.label_index(Variable::Yp, favorable)?;
    let rate = |z: u8| dist.group_law(Variable::Yp, z).probs()[fav].clone();
    let (r0, r1) = (rate(0), rate(1));
    let mut notes = Vec::new();
    let statistic = match (r0.is_zero(), r1.is_zero()) {
        (true, true) => return Err(AuditError::ZeroRate),
        (true, false) | (false, true) => {
            let z = if r0.is_zero() { 0 } else { 1 };
            notes.push(format!("group Z={z} never receives `{favorable}`"));
            T::zero()
        }
        (false, false) => {
            let (a, b) = (r0.clone() / r1.clone(), r1.clone() / r0.clone());
            if a <= b {
                a
            } else {
                b
            }
        }
    };
    let pass = !scalar::gt_tol(p, &statistic, FLOAT_TOL);
    Ok(TestReport {
        test: "p_percent_rule".into(),
        slices: Vec::new(),
        margin: statistic.clone() - p.clone(),
        statistic,
        threshold: p.clone(),
        pass,
        components: vec![("rate_z0".into(), r0), ("rate_z1".into(), r1)],
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{Assignment, Support, Supports};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    /// Groups of equal size; `yp1[z]` is Pr[Yp=1 | Z=z], Yo is a constant 0.
    fn rates(yp1: [Rational; 2]) -> JointDistribution<Rational> {
        let supports = Supports::new(None, Support::ints([0]), Support::binary());
        let cells = (0..2u8).flat_map(|z| {
            let r = yp1[z as usize].clone();
            [
                (Assignment::new(z, None, Label::int(0), Label::int(1)), r.clone() / q(2, 1)),
                (Assignment::new(z, None, Label::int(0), Label::int(0)), (q(1, 1) - r) / q(2, 1)),
            ]
        });
        JointDistribution::from_cells(supports, cells).unwrap()
    }

    #[test]
    fn demographic_parity_statistic() {
        let d = rates([q(1, 2), q(1, 5)]);
        let r = demographic_parity(&d, &q(0, 1)).unwrap();
        assert_eq!(r.statistic, q(3, 10));
        assert!(!r.pass);
        assert_eq!(r.margin, q(-3, 10));
    }

    #[test]
    fn p_percent_examples() {
        let r = p_percent_rule(&rates([q(2, 5), q(1, 2)]), &Label::int(1), &q(4, 5)).unwrap();
        assert_eq!(r.statistic, q(4, 5));
        assert!(r.pass);
        let r = p_percent_rule(&rates([q(3, 10), q(1, 2)]), &Label::int(1), &q(4, 5)).unwrap();
        assert_eq!(r.statistic, q(3, 5));
        assert!(!r.pass);
        let r = p_percent_rule(&rates([q(0, 1), q(1, 2)]), &Label::int(1), &q(4, 5)).unwrap();
        assert!(!r.pass && r.notes.len() == 1);
        assert_eq!(
            p_percent_rule(&rates([q(0, 1), q(0, 1)]), &Label::int(1), &q(4, 5)).unwrap_err(),
            AuditError::ZeroRate
        );
    }

    #[test]
    fn eq_odds_skips_one_sided_slices_with_note() {
        let supports = Supports::new(None, Support::binary(), Support::binary());
        let a = |z, o, p| Assignment::new(z, None, Label::int(o), Label::int(p));
        let d = JointDistribution::from_cells(
            supports,
            [(a(0, 0, 0), q(1, 4)), (a(0, 1, 1), q(1, 4)), (a(1, 0, 0), q(1, 2))],
        )
        .unwrap();
        let r = equalized_odds(&d, &q(0, 1)).unwrap();
        assert!(r.pass);
        assert_eq!(r.slices.len(), 1);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn no_comparable_slice() {
        let supports = Supports::new(None, Support::binary(), Support::binary());
        let a = |z, o, p| Assignment::new(z, None, Label::int(o), Label::int(p));
        let d = JointDistribution::from_cells(supports, [(a(0, 0, 0), q(1, 2)), (a(1, 1, 0), q(1, 2))]).unwrap();
        assert_eq!(equalized_odds(&d, &q(0, 1)).unwrap_err(), AuditError::NoComparableSlice);
    }

    #[test]
    fn alpha_arithmetic() {
        // Yo disparity 0.4, output disparity 0.15 or 0.25
        for (out, expect, pass) in [(q(3, 20), q(-1, 20), true), (q(1, 4), q(1, 20), false)] {
            let supports = Supports::new(None, Support::binary(), Support::binary());
            let o0 = q(1, 2);
            let o1 = q(9, 10);
            let p0 = q(1, 2);
            let p1 = p0.clone() + out.clone();
            // independent Yo and Yp within each group
            let d = JointDistribution::from_fn(supports, |z, _, o, p| {
                let po = if z == 0 { o0.clone() } else { o1.clone() };
                let pp = if z == 0 { p0.clone() } else { p1.clone() };
                let wo = if o == 1 { po } else { q(1, 1) - po };
                let wp = if p == 1 { pp } else { q(1, 1) - pp };
                wo * wp / q(2, 1)
            })
            .unwrap();
            let r = alpha_disparity(&d, &q(1, 2), &q(0, 1)).unwrap();
            assert_eq!(r.statistic, expect);
            assert_eq!(r.pass, pass);
        }
    }

    #[test]
    fn misclassification_needs_construct() {
        let d = rates([q(1, 2), q(1, 2)]);
        assert_eq!(misclassification_parity(&d, &q(0, 1)).unwrap_err(), AuditError::ConstructUnavailable);
    }
}
