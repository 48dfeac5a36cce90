#![allow(dead_code)]

use construct_audit::distances::MetricSupport;
use construct_audit::probability::random::random_simplex;
use construct_audit::probability::{Distribution, Label, Support};
use construct_audit::scalar::{Rational, Scalar};
use rand::Rng;

/// `n` distinct integer labels from `0..=20`.
pub fn int_support<R: Rng>(rng: &mut R, n: usize) -> Support {
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < n {
        picked.insert(rng.gen_range(0..=20i64));
    }
    Support::ints(picked)
}

/// `n` text labels `a`, `b`, ...
pub fn text_support(n: usize) -> Support {
    Support::new((0..n).map(|i| Label::text(((b'a' + i as u8) as char).to_string()))).unwrap()
}

/// A random law with some coordinates forced to zero.
pub fn sparse_law<T: Scalar, R: Rng>(rng: &mut R, support: &Support) -> Distribution<T> {
    let mut probs: Vec<T> = random_simplex(rng, support.len());
    let keep = rng.gen_range(0..support.len());
    for (i, p) in probs.iter_mut().enumerate() {
        if i != keep && rng.gen_bool(0.25) {
            *p = T::zero();
        }
    }
    let total = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
    Distribution::new(support.clone(), probs.into_iter().map(|p| p / total.clone()).collect()).unwrap()
}

/// Shortest-path closure of random integer weights in `1..=10`.
pub fn explicit_metric<R: Rng>(rng: &mut R, support: &Support) -> MetricSupport {
    let n = support.len();
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=10);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    let m = d.iter().map(|row| row.iter().map(|&v| Rational::from_frac(v, 1)).collect()).collect();
    MetricSupport::explicit(support.labels().to_vec(), m).unwrap()
}

/// Indicator, numeric (for numeric supports) or explicit, uniformly.
pub fn any_metric<R: Rng>(rng: &mut R, support: &Support) -> MetricSupport {
    match rng.gen_range(0..3) {
        0 => MetricSupport::indicator(support.clone()),
        1 if support.is_numeric() => MetricSupport::numeric(support.clone()).unwrap(),
        _ => explicit_metric(rng, support),
    }
}
