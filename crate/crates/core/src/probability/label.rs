use std::cmp::Ordering;
use std::fmt;

use dashu_int::{IBig, UBig};
use num_traits::Signed;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{AuditError, Result};
use crate::scalar::{parse_rational, render_ratio, Rational};

/// A category label: either an exact number or free text.
///
/// Numbers sort before text; numbers compare by value, text lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Num(Rational),
    Text(String),
}

impl Label {
    /// Tokens that read as a rational (`2`, `0.5`, `1/3`) become numeric labels.
    pub fn parse(token: &str) -> Label {
        let t = token.trim();
        match parse_rational(t) {
            Ok(r) => Label::Num(r),
            Err(_) => Label::Text(t.to_string()),
        }
    }

    pub fn int(v: i64) -> Label {
        Label::Num(Rational::from(v))
    }

    pub fn text(s: impl Into<String>) -> Label {
        Label::Text(s.into())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Label::Num(r) => Some(r),
            Label::Text(_) => None,
        }
    }

    pub fn is_int(&self, v: i64) -> bool {
        matches!(self, Label::Num(r) if *r == Rational::from(v))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Label::Num(a), Label::Num(b)) => a.cmp(b),
            (Label::Num(_), Label::Text(_)) => Ordering::Less,
            (Label::Text(_), Label::Num(_)) => Ordering::Greater,
            (Label::Text(a), Label::Text(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Num(r) => f.write_str(&render_number(r)),
            Label::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::parse(s)
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::int(v)
    }
}

/// Terminating decimals render as decimals, everything else as `num/den`.
pub fn render_number(r: &Rational) -> String {
    if *r.denominator() == UBig::ONE {
        return r.numerator().to_string();
    }
    let mut den = r.denominator().clone();
    let twos = den.trailing_zeros().unwrap_or(0);
    den >>= twos;
    let five = UBig::from(5u8);
    let mut fives = 0usize;
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != UBig::ONE {
        return render_ratio(r);
    }
    let digits = twos.max(fives);
    let scaled = r * Rational::from(IBig::from(10u8).pow(digits));
    let int = scaled.floor();
    let sign = if int.is_negative() { "-" } else { "" };
    let s = int.abs().to_string();
    let padded = format!("{s:0>width$}", width = digits + 1);
    let (whole, frac) = padded.split_at(padded.len() - digits);
    format!("{sign}{whole}.{frac}")
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Label::Num(r) if r.is_int() => match i64::try_from(r.numerator().clone()) {
                Ok(v) => s.serialize_i64(v),
                Err(_) => s.serialize_str(&r.numerator().to_string()),
            },
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct LabelVisitor;

        impl Visitor<'_> for LabelVisitor {
            type Value = Label;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a string label")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Label, E> {
                Ok(Label::int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Label, E> {
                Ok(Label::Num(Rational::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Label, E> {
                // shortest round-trip text of the float, read back exactly
                parse_rational(&v.to_string()).map(Label::Num).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Label, E> {
                Ok(Label::parse(v))
            }
        }

        d.deserialize_any(LabelVisitor)
    }
}

/// Ordered set of distinct labels. The order is the canonical sort order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Support {
    labels: Vec<Label>,
}

impl Support {
    /// Sorts `labels`; rejects empty input and duplicates.
    pub fn new(labels: impl IntoIterator<Item = Label>) -> Result<Support> {
        let mut labels: Vec<Label> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(AuditError::EmptySupport);
        }
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(AuditError::DuplicateLabel(w[0].to_string()));
        }
        Ok(Support { labels })
    }

    /// Like [`Support::new`] but silently merges duplicates.
    pub fn collect(labels: impl IntoIterator<Item = Label>) -> Result<Support> {
        let mut labels: Vec<Label> = labels.into_iter().collect();
        labels.sort();
        labels.dedup();
        Support::new(labels)
    }

    pub fn ints(values: impl IntoIterator<Item = i64>) -> Support {
        Support::collect(values.into_iter().map(Label::int)).expect("non-empty integer support")
    }

    pub fn range(n: usize) -> Support {
        Support::ints(0..n as i64)
    }

    pub fn binary() -> Support {
        Support::range(2)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.labels.iter()
    }

    pub fn get(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.index_of(label).is_some()
    }

    pub fn union(&self, other: &Support) -> Support {
        Support::collect(self.labels.iter().chain(other.labels.iter()).cloned()).expect("union of non-empty supports")
    }

    pub fn is_numeric(&self) -> bool {
        self.labels.iter().all(|l| l.as_rational().is_some())
    }
}

impl<'a> IntoIterator for &'a Support {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;

    fn into_iter(self) -> Self::IntoIter {
        self.labels.iter()
    }
}
