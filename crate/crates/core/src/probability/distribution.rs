use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::label::{Label, Support};
use crate::error::{AuditError, Result};
use crate::scalar::{approx_eq, Scalar, Total, FLOAT_TOL};

/// A probability law over a finite [`Support`], stored aligned with the
/// support's canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    support: Support,
    probs: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    pub fn new(support: Support, probs: Vec<T>) -> Result<Self> {
        if probs.len() != support.len() {
            return Err(AuditError::InvalidParameter(format!(
                "{} probabilities for a support of {} labels",
                probs.len(),
                support.len()
            )));
        }
        check_simplex(support.labels(), &probs)?;
        Ok(Distribution { support, probs })
    }

    /// Builds from `(label, probability)` pairs; the support is the set of labels given.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, T)>) -> Result<Self> {
        let mut pairs: Vec<(Label, T)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let support = Support::new(pairs.iter().map(|(l, _)| l.clone()))?;
        Distribution::new(support, pairs.into_iter().map(|(_, p)| p).collect())
    }

    /// Point mass on `label` within `support`.
    pub fn point(support: Support, label: &Label) -> Result<Self> {
        let i = support
            .index_of(label)
            .ok_or_else(|| AuditError::UnknownLabel { variable: "distribution".into(), label: label.to_string() })?;
        let mut probs = vec![T::zero(); support.len()];
        probs[i] = T::one();
        Ok(Distribution { support, probs })
    }

    pub fn uniform(support: Support) -> Self {
        let n = support.len() as u64;
        let probs = (0..n).map(|_| T::from_count(1, n)).collect();
        Distribution { support, probs }
    }

    /// Skips validation; callers guarantee a valid simplex point.
    pub(crate) fn from_parts(support: Support, probs: Vec<T>) -> Self {
        debug_assert_eq!(support.len(), probs.len());
        Distribution { support, probs }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    /// Probability of `label`; zero for labels outside the support.
    pub fn prob(&self, label: &Label) -> T {
        self.support.index_of(label).map(|i| self.probs[i].clone()).unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &T)> {
        self.support.iter().zip(self.probs.iter())
    }

    pub fn total(&self) -> T {
        self.probs.iter().cloned().total()
    }

    /// Re-expresses this law over a larger support.
    pub fn extend_to(&self, support: &Support) -> Result<Self> {
        let mut probs = vec![T::zero(); support.len()];
        for (label, p) in self.iter() {
            let i = support.index_of(label).ok_or_else(|| AuditError::MetricMismatch(label.to_string()))?;
            probs[i] = p.clone();
        }
        Ok(Distribution { support: support.clone(), probs })
    }

    /// Mean of a numeric law.
    pub fn mean(&self) -> Result<T> {
        let terms = self
            .iter()
            .map(|(l, p)| {
                let x = l.as_rational().ok_or_else(|| AuditError::NotNumeric(l.to_string()))?;
                Ok(T::from_ratio(x) * p.clone())
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(terms.into_iter().total())
    }

    /// Convex combination `w·self + (1-w)·other` over the union support.
    pub fn mix(&self, other: &Self, w: &T) -> Self {
        let (support, a, b) = align(self, other);
        let probs = a.into_iter().zip(b).map(|(x, y)| w.clone() * x + (T::one() - w.clone()) * y).collect();
        Distribution { support, probs }
    }

    pub fn map_probs<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Distribution<U> {
        Distribution { support: self.support.clone(), probs: self.probs.iter().map(f).collect() }
    }
}

/// Aligns two laws on the union of their supports.
pub fn align<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> (Support, Vec<T>, Vec<T>) {
    if p.support == q.support {
        return (p.support.clone(), p.probs.clone(), q.probs.clone());
    }
    let support = p.support.union(&q.support);
    let a = support.iter().map(|l| p.prob(l)).collect();
    let b = support.iter().map(|l| q.prob(l)).collect();
    (support, a, b)
}

pub(crate) fn check_simplex<T: Scalar>(labels: &[Label], probs: &[T]) -> Result<()> {
    for (l, p) in labels.iter().zip(probs) {
        if *p < T::zero() {
            return Err(AuditError::NegativeProbability { cell: l.to_string(), value: p.render() });
        }
    }
    let total: T = probs.iter().cloned().total();
    if !approx_eq(&total, &T::one(), FLOAT_TOL) {
        return Err(AuditError::MassNotOne { total: total.render() });
    }
    Ok(())
}

impl<T: Scalar> Serialize for Distribution<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.probs.len()))?;
        for (label, p) in self.iter() {
            map.serialize_entry(&label.to_string(), &ScalarRef(p))?;
        }
        map.end()
    }
}

pub(crate) struct ScalarRef<'a, T>(pub &'a T);

impl<T: Scalar> Serialize for ScalarRef<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::scalar::serialize(self.0, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn validates_mass_and_sign() {
        let s = Support::binary();
        assert!(Distribution::new(s.clone(), vec![q(1, 2), q(1, 2)]).is_ok());
        assert!(matches!(Distribution::new(s.clone(), vec![q(1, 2), q(2, 5)]), Err(AuditError::MassNotOne { .. })));
        assert!(matches!(Distribution::new(s, vec![q(3, 2), q(-1, 2)]), Err(AuditError::NegativeProbability { .. })));
    }

    #[test]
    fn prob_outside_support_is_zero() {
        let d = Distribution::<f64>::uniform(Support::binary());
        assert_eq!(d.prob(&Label::text("z")), 0.0);
        assert_eq!(d.prob(&Label::int(1)), 0.5);
    }

    #[test]
    fn mixing_is_linear() {
        let a = Distribution::point(Support::binary(), &Label::int(0)).unwrap();
        let b = Distribution::point(Support::binary(), &Label::int(1)).unwrap();
        let m = a.mix(&b, &q(1, 4));
        assert_eq!(m.probs(), &[q(1, 4), q(3, 4)]);
    }
}
