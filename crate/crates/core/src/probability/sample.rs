use std::collections::BTreeMap;

use dashu_int::UBig;
use num_integer::Integer;

use super::joint::{Assignment, JointDistribution, Supports, Variable};
use super::label::{Label, Support};
use crate::error::{AuditError, Result};
use crate::scalar::{Rational, Scalar};

/// One dataset row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SampleRecord {
    pub z: u8,
    pub y_obs: Label,
    pub y_pred: Label,
    pub y_construct: Option<Label>,
}

impl SampleRecord {
    pub fn new(z: u8, y_obs: Label, y_pred: Label, y_construct: Option<Label>) -> Self {
        SampleRecord { z, y_obs, y_pred, y_construct }
    }
}

/// Optional declared supports; `None` entries are inferred from the records.
#[derive(Debug, Clone, Default)]
pub struct DeclaredSupports {
    pub construct: Option<Support>,
    pub observed: Option<Support>,
    pub predicted: Option<Support>,
}

/// Plug-in (maximum-likelihood) estimate of the joint table.
pub fn from_samples<T: Scalar>(records: &[SampleRecord], declared: &DeclaredSupports) -> Result<JointDistribution<T>> {
    for z in 0..2u8 {
        if !records.iter().any(|r| r.z == z) {
            return Err(AuditError::EmptyGroup(z));
        }
    }
    if let Some(r) = records.iter().find(|r| r.z > 1) {
        return Err(AuditError::UnknownLabel { variable: "Z".into(), label: r.z.to_string() });
    }
    let with_construct = records.iter().filter(|r| r.y_construct.is_some()).count();
    if with_construct != 0 && with_construct != records.len() {
        return Err(AuditError::MixedConstructPresence);
    }
    let has_construct = with_construct > 0;

    let resolve = |declared: &Option<Support>, var: Variable, labels: Vec<&Label>| -> Result<Support> {
        match declared {
            Some(s) => {
                if let Some(l) = labels.iter().find(|l| !s.contains(l)) {
                    return Err(AuditError::UnknownLabel { variable: var.to_string(), label: l.to_string() });
                }
                Ok(s.clone())
            }
            None => Support::collect(labels.into_iter().cloned()),
        }
    };
    let observed = resolve(&declared.observed, Variable::Yo, records.iter().map(|r| &r.y_obs).collect())?;
    let predicted = resolve(&declared.predicted, Variable::Yp, records.iter().map(|r| &r.y_pred).collect())?;
    let construct = if has_construct {
        let labels = records.iter().filter_map(|r| r.y_construct.as_ref()).collect();
        Some(resolve(&declared.construct, Variable::Yc, labels)?)
    } else {
        None
    };

    let mut counts: BTreeMap<Assignment, u64> = BTreeMap::new();
    for r in records {
        let a = Assignment::new(r.z, r.y_construct.clone(), r.y_obs.clone(), r.y_pred.clone());
        *counts.entry(a).or_default() += 1;
    }
    let n = records.len() as u64;
    let cells = counts.into_iter().map(|(a, k)| (a, T::from_count(k, n)));
    JointDistribution::from_cells(Supports::new(construct, observed, predicted), cells)
}

/// The smallest dataset whose empirical table is exactly `dist`.
pub fn replicate(dist: &JointDistribution<Rational>) -> Result<Vec<SampleRecord>> {
    let scale = dist.table().iter().fold(UBig::ONE, |acc, p| acc.lcm(p.denominator()));
    let size = u64::try_from(&scale)
        .ok()
        .filter(|s| *s <= 50_000_000)
        .ok_or_else(|| AuditError::InvalidParameter(format!("replication needs {scale} rows")))?;
    let mut rows = Vec::with_capacity(size as usize);
    for (a, p) in dist.assignments() {
        let count = (p * Rational::from(scale.clone())).floor();
        let count = u64::try_from(count).expect("count bounded by scale");
        for _ in 0..count {
            rows.push(SampleRecord::new(a.z, a.yo.clone(), a.yp.clone(), a.yc.clone()));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(z: u8, o: i64, p: i64) -> SampleRecord {
        SampleRecord::new(z, Label::int(o), Label::int(p), None)
    }

    #[test]
    fn equal_counts_give_uniform_cells() {
        let rows = vec![rec(0, 1, 0), rec(0, 1, 1), rec(1, 1, 0), rec(1, 1, 1)];
        let d: JointDistribution<Rational> = from_samples(&rows, &DeclaredSupports::default()).unwrap();
        for (_, p) in d.assignments() {
            assert_eq!(*p, Rational::from_frac(1, 4));
        }
        assert!(!d.has_construct());
    }

    #[test]
    fn missing_group_is_rejected() {
        let rows = vec![rec(0, 1, 0), rec(0, 0, 1)];
        assert_eq!(from_samples::<f64>(&rows, &DeclaredSupports::default()).unwrap_err(), AuditError::EmptyGroup(1));
    }

    #[test]
    fn duplication_does_not_change_the_estimate() {
        let once = vec![rec(0, 1, 0), rec(1, 0, 1)];
        let tenfold: Vec<SampleRecord> = once.iter().flat_map(|r| std::iter::repeat_n(r.clone(), 10)).collect();
        let a: JointDistribution<Rational> = from_samples(&once, &DeclaredSupports::default()).unwrap();
        let b: JointDistribution<Rational> = from_samples(&tenfold, &DeclaredSupports::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_construct_presence_is_rejected() {
        let mut rows = vec![rec(0, 1, 0), rec(1, 0, 1)];
        rows[0].y_construct = Some(Label::int(1));
        assert_eq!(
            from_samples::<f64>(&rows, &DeclaredSupports::default()).unwrap_err(),
            AuditError::MixedConstructPresence
        );
    }

    #[test]
    fn declared_support_rejects_unknown_labels() {
        let rows = vec![rec(0, 5, 0), rec(1, 0, 1)];
        let declared = DeclaredSupports { observed: Some(Support::binary()), ..Default::default() };
        assert!(matches!(from_samples::<f64>(&rows, &declared), Err(AuditError::UnknownLabel { .. })));
    }

    #[test]
    fn replication_round_trips() {
        let rows = vec![rec(0, 1, 0), rec(0, 1, 0), rec(0, 0, 1), rec(1, 0, 1), rec(1, 1, 1), rec(1, 1, 1)];
        let d: JointDistribution<Rational> = from_samples(&rows, &DeclaredSupports::default()).unwrap();
        let again = replicate(&d).unwrap();
        assert_eq!(again.len(), 6);
        let d2: JointDistribution<Rational> = from_samples(&again, &DeclaredSupports::default()).unwrap();
        assert_eq!(d, d2);
    }
}
