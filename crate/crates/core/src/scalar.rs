//! Arithmetic backends.
//!
//! Every distribution, distance and criterion is generic over [`Scalar`], which
//! is implemented for `f64` (dataset audits) and [`Rational`] (exact checks of
//! identities such as `Σ min(p, q) = 1 - tv(p, q)`).

use std::fmt;
use std::ops::AddAssign;
use std::str::FromStr;

use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use num_traits::{Signed, Zero};
use serde::Serializer;

use crate::error::{AuditError, Result};

/// Arbitrary-precision rational number.
pub type Rational = RBig;

/// Absolute slack used for float-mode equality and inequality checks.
pub const FLOAT_TOL: f64 = 1e-12;

/// Arithmetic mode selected at the API boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub const ENV_VAR: &'static str = "CONSTRUCT_AUDIT_MODE";

    /// Reads `CONSTRUCT_AUDIT_MODE`; `None` when unset or empty.
    pub fn from_env() -> Result<Option<Mode>> {
        match std::env::var(Self::ENV_VAR) {
            Ok(v) if !v.trim().is_empty() => v.trim().parse().map(Some),
            _ => Ok(None),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rational" | "exact" => Ok(Mode::Rational),
            "float" | "f64" => Ok(Mode::Float),
            other => Err(AuditError::Parse(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Field operations plus the conversions the audit stack needs.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Signed
    + for<'a> AddAssign<&'a Self>
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic is exact and tolerances collapse to zero.
    const EXACT: bool;
    const MODE: Mode;

    fn from_ratio(r: &Rational) -> Self;
    fn to_ratio(&self) -> Rational;
    fn to_f64(&self) -> f64;

    fn from_frac(num: i64, den: i64) -> Self {
        Self::from_ratio(&Rational::from_parts_signed(IBig::from(num), IBig::from(den)))
    }

    fn from_count(num: u64, den: u64) -> Self {
        Self::from_ratio(&Rational::from_parts(IBig::from(num), UBig::from(den)))
    }

    /// The slack to apply in comparisons: `tol` in float mode, zero when exact.
    fn slack(tol: f64) -> Self;

    /// Human-readable rendering: `num/den` when exact, shortest round-trip float otherwise.
    fn render(&self) -> String;

    fn half() -> Self {
        Self::from_frac(1, 2)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: Mode = Mode::Float;

    fn from_ratio(r: &Rational) -> Self {
        r.to_f64().value()
    }

    fn to_ratio(&self) -> Rational {
        Rational::try_from(*self).unwrap_or(Rational::ZERO)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_count(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn slack(tol: f64) -> Self {
        tol
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const MODE: Mode = Mode::Rational;

    fn from_ratio(r: &Rational) -> Self {
        r.clone()
    }

    fn to_ratio(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        Rational::to_f64(self).value()
    }

    fn slack(_tol: f64) -> Self {
        Rational::zero()
    }

    fn render(&self) -> String {
        render_ratio(self)
    }
}

/// Exact-or-float summation of an iterator of scalars.
pub trait Total<T> {
    fn total(self) -> T;
}

impl<T: Scalar, I: Iterator<Item = T>> Total<T> for I {
    fn total(self) -> T {
        self.fold(T::zero(), |mut acc, x| {
            if !x.is_zero() {
                acc += &x;
            }
            acc
        })
    }
}

/// `a <= b` up to float slack.
pub fn le_tol<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    *a <= b.clone() + T::slack(tol)
}

/// `a > b` beyond float slack.
pub fn gt_tol<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    *a > b.clone() + T::slack(tol)
}

pub fn approx_eq<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    (a.clone() - b.clone()).abs() <= T::slack(tol)
}

pub fn max_of<T: Scalar>(items: impl IntoIterator<Item = T>) -> Option<T> {
    items.into_iter().fold(None, |acc, x| match acc {
        Some(m) if m >= x => Some(m),
        _ => Some(x),
    })
}

pub fn min2<T: Scalar>(a: &T, b: &T) -> T {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Renders `n` or `n/d`.
pub fn render_ratio(r: &Rational) -> String {
    if *r.denominator() == UBig::ONE {
        r.numerator().to_string()
    } else {
        format!("{}/{}", r.numerator(), r.denominator())
    }
}

/// Parses an exact rational from `"3"`, `"-0.125"`, `"2.5e-3"` or `"7/9"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || AuditError::Parse(format!("`{text}` is not a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num = parse_decimal(n.trim()).ok_or_else(bad)?;
        let den = parse_decimal(d.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(AuditError::Parse(format!("`{text}` has a zero denominator")));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = Rational::from(all.parse::<IBig>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let power = Rational::from(IBig::from(10u8).pow(scale.unsigned_abs() as usize));
    if scale >= 0 {
        value *= power;
    } else {
        value /= power;
    }
    Some(if negative { -value } else { value })
}

/// serde adapter: exact scalars as strings, floats as JSON numbers.
pub fn serialize<T: Scalar, S: Serializer>(value: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    if T::EXACT {
        s.serialize_str(&value.render())
    } else {
        let x = value.to_f64();
        if x.is_finite() {
            s.serialize_f64(x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }
}

pub fn serialize_opt<T: Scalar, S: Serializer>(value: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => serialize(v, s),
        None => s.serialize_none(),
    }
}

/// serde adapter: named scalars as an ordered JSON object.
pub fn serialize_named<T: Scalar, S: Serializer>(pairs: &[(String, T)], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(k, &Named(v))?;
    }
    map.end()
}

struct Named<'a, T>(&'a T);

impl<T: Scalar> serde::Serialize for Named<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize(self.0, s)
    }
}
