use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::empirical::observed_disparity;
use crate::error::{AuditError, Result};
use crate::probability::random::{random_simplex, rng_from_seed};
use crate::probability::{JointDistribution, Support, Variable};
use crate::scalar::{self, parse_rational, render_ratio, Rational, Scalar, Total, FLOAT_TOL};

use super::construct_disparity;

/// Assumption linking the construct and observed spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Worldview {
    /// The construct is independent of the group.
    Wae,
    /// The construct equals the observation.
    Wysiwyg,
    /// Construct disparity is exactly `alpha` times observed disparity.
    AlphaHybrid(Rational),
}

impl Worldview {
    pub fn alpha_hybrid(alpha: Rational) -> Result<Self> {
        if alpha < Rational::from_frac(0, 1) || alpha > Rational::from_frac(1, 1) {
            return Err(AuditError::InvalidParameter(format!("alpha = {} is outside [0, 1]", render_ratio(&alpha))));
        }
        Ok(Worldview::AlphaHybrid(alpha))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Worldview::Wae => "WAE",
            Worldview::Wysiwyg => "WYSIWYG",
            Worldview::AlphaHybrid(_) => "AlphaHybrid",
        }
    }
}

impl fmt::Display for Worldview {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Worldview::AlphaHybrid(a) => write!(f, "AlphaHybrid({})", render_ratio(a)),
            other => f.write_str(other.tag()),
        }
    }
}

/// Accepts `wae`, `wysiwyg`, `alpha:<a>` and `AlphaHybrid(<a>)`.
impl FromStr for Worldview {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "wae" => return Ok(Worldview::Wae),
            "wysiwyg" => return Ok(Worldview::Wysiwyg),
            _ => {}
        }
        let alpha = lower
            .strip_prefix("alpha:")
            .or_else(|| lower.strip_prefix("alpha-hybrid:"))
            .or_else(|| lower.strip_prefix("alphahybrid(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| AuditError::Parse(format!("unknown worldview `{t}`")))?;
        Worldview::alpha_hybrid(parse_rational(alpha)?)
    }
}

impl Serialize for Worldview {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("tag", self.tag())?;
        if let Worldview::AlphaHybrid(a) = self {
            map.serialize_entry("alpha", &render_ratio(a))?;
        }
        map.end()
    }
}

/// Whether a worldview holds, with the measured quantity behind the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct WorldviewReport<T: Scalar> {
    pub worldview: Worldview,
    pub holds: bool,
    /// WAE: construct disparity. WYSIWYG: `Pr[Yc != Yo]`.
    /// AlphaHybrid: `|construct disparity - α·observed disparity|`.
    #[serde(serialize_with = "scalar::serialize")]
    pub statistic: T,
    #[serde(serialize_with = "scalar::serialize")]
    pub tolerance: T,
}

pub fn worldview_holds<T: Scalar>(dist: &JointDistribution<T>, wv: &Worldview, tau: &T) -> Result<WorldviewReport<T>> {
    dist.require_construct()?;
    let statistic = match wv {
        Worldview::Wae => construct_disparity(dist)?,
        Worldview::Wysiwyg => {
            let yc = dist.support(Variable::Yc);
            let yo = dist.support(Variable::Yo);
            dist.cells().filter(|([_, c, o, _], _)| yc.get(*c) != yo.get(*o)).map(|(_, m)| m.clone()).total()
        }
        Worldview::AlphaHybrid(a) => (construct_disparity(dist)? - T::from_ratio(a) * observed_disparity(dist)).abs(),
    };
    Ok(WorldviewReport {
        worldview: wv.clone(),
        holds: scalar::le_tol(&statistic, tau, FLOAT_TOL),
        statistic,
        tolerance: tau.clone(),
    })
}

/// Attaches a construct column consistent with `wv`, replacing any existing one.
///
/// WAE draws one random construct law shared by both groups. WYSIWYG copies
/// the observation. AlphaHybrid draws per-group laws and mixes them toward
/// their average until the construct disparity is exactly `α·tv(Yo..)`.
/// Within a group the construct is drawn independently of `(Yo, Yp)` except
/// under WYSIWYG. `construct` defaults to the observed support.
pub fn impose_worldview<T: Scalar>(
    dist: &JointDistribution<T>,
    wv: &Worldview,
    construct: Option<&Support>,
    seed: u64,
) -> Result<JointDistribution<T>> {
    let yo = dist.support(Variable::Yo);
    let support = construct.cloned().unwrap_or_else(|| yo.clone());
    let mut rng = rng_from_seed(seed);
    match wv {
        Worldview::Wae => {
            let law: Vec<T> = random_simplex(&mut rng, support.len());
            dist.with_construct(support, |_, _, _| law.clone())
        }
        Worldview::Wysiwyg => {
            let idx: Vec<usize> = yo.iter().map(|l| support.index_of(l)).collect::<Option<_>>().ok_or_else(|| {
                AuditError::InfeasibleTarget("construct support must contain every observed label".into())
            })?;
            dist.with_construct(support.clone(), |_, o, _| {
                let mut row = vec![T::zero(); support.len()];
                row[idx[o]] = T::one();
                row
            })
        }
        Worldview::AlphaHybrid(a) => {
            let target = T::from_ratio(a) * observed_disparity(dist);
            let [c0, c1] = alpha_margins(&support, &target, &mut rng)?;
            dist.with_construct(support, |z, _, _| if z == 0 { c0.clone() } else { c1.clone() })
        }
    }
}

/// Two construct laws at total variation distance exactly `target`:
/// `c0 = t·v + (1-t)·r` and `c1 = t·u + (1-t)·r` with `u`, `v` supported on
/// disjoint label sets. Every pair at distance `t` has this form, with `r`
/// their normalised overlap.
fn alpha_margins<T: Scalar, R: rand::Rng>(support: &Support, target: &T, rng: &mut R) -> Result<[Vec<T>; 2]> {
    let n = support.len();
    if target.is_zero() {
        let law: Vec<T> = random_simplex(rng, n);
        return Ok([law.clone(), law]);
    }
    if n < 2 || *target > T::one() {
        return Err(AuditError::InfeasibleTarget(format!(
            "construct disparity {} on {n} construct labels",
            target.render()
        )));
    }
    let r: Vec<T> = random_simplex(rng, n);
    // a random split of the labels into two non-empty sides
    let mut side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    if side.iter().all(|s| *s) || side.iter().all(|s| !*s) {
        let i = rng.gen_range(0..n);
        side[i] = !side[i];
    }
    let part = |rng: &mut R, keep: bool| -> Vec<T> {
        let idx: Vec<usize> = (0..n).filter(|&i| side[i] == keep).collect();
        let w: Vec<T> = random_simplex(rng, idx.len());
        let mut out = vec![T::zero(); n];
        for (i, v) in idx.into_iter().zip(w) {
            out[i] = v;
        }
        out
    };
    let v = part(rng, false);
    let u = part(rng, true);
    let mix = |e: &[T]| -> Vec<T> {
        e.iter().zip(&r).map(|(a, b)| target.clone() * a.clone() + (T::one() - target.clone()) * b.clone()).collect()
    };
    Ok([mix(&v), mix(&u)])
}
