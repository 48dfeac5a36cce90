//! Premise samplers. Each one produces instances that satisfy its premise by
//! construction; the suites re-audit them before checking a conclusion.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::constructions::maximal_coupling;
use crate::criteria::{impose_worldview, Worldview};
use crate::distances::MetricSupport;
use crate::error::Result;
use crate::probability::random::random_grid;
use crate::probability::{
    random_joint, Distribution, JointDistribution, Label, ModelKernel, Support, Supports, Variable,
};
use crate::scalar::{Rational, Scalar, Total};

pub type Rng64 = ChaCha8Rng;

pub fn size(rng: &mut Rng64, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}

/// Between `lo` and `hi` distinct integer labels drawn from `0..=20`.
pub fn numeric_support(rng: &mut Rng64, lo: usize, hi: usize) -> Support {
    let n = size(rng, lo, hi);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < n {
        picked.insert(rng.gen_range(0..=20i64));
    }
    Support::ints(picked)
}

/// Random table with a construct column.
pub fn base_with_construct<T: Scalar>(rng: &mut Rng64, yc: Support, yo: Support, yp: Support) -> JointDistribution<T> {
    random_joint(&Supports::new(Some(yc), yo, yp), rng.gen())
}

/// Random `(Z, Yo, Yp)` table.
pub fn base_observed<T: Scalar>(rng: &mut Rng64, yo: Support, yp: Support) -> JointDistribution<T> {
    random_joint(&Supports::new(None, yo, yp), rng.gen())
}

/// Kernel rows and prediction laws live on this grid. A shared denominator
/// keeps exact sums of kernel-weighted cells cheap.
pub const ROW_GRID: u64 = 1024;

/// Random point of the simplex grid with denominator [`ROW_GRID`]; the gaps
/// between sorted uniform cut points, so empty coordinates occur too.
pub fn grid_simplex<T: Scalar>(rng: &mut Rng64, n: usize) -> Vec<T> {
    let mut cuts: Vec<u64> = (1..n).map(|_| rng.gen_range(0..=ROW_GRID)).collect();
    cuts.push(0);
    cuts.push(ROW_GRID);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| T::from_count(w[1] - w[0], ROW_GRID)).collect()
}

/// A grid weight in `[0, 1]`, hitting both endpoints with positive probability.
pub fn weight<T: Scalar>(rng: &mut Rng64) -> T {
    random_grid(rng, 8)
}

/// Any of the worldviews, or none (an unconstrained random construct).
pub fn random_worldview(rng: &mut Rng64) -> Option<Worldview> {
    match rng.gen_range(0..4) {
        0 => Some(Worldview::Wae),
        1 => Some(Worldview::Wysiwyg),
        2 => Some(Worldview::AlphaHybrid(Rational::from_frac(rng.gen_range(0..=10), 10))),
        _ => None,
    }
}

/// Re-draws the construct column of `base` (a table that has one) under `wv`.
pub fn with_worldview<T: Scalar>(
    rng: &mut Rng64,
    base: JointDistribution<T>,
    wv: Option<&Worldview>,
) -> Result<JointDistribution<T>> {
    match wv {
        None => Ok(base),
        Some(Worldview::Wysiwyg) => impose_worldview(&base, &Worldview::Wysiwyg, None, rng.gen()),
        Some(wv) => {
            let yc = base.support(Variable::Yc);
            impose_worldview(&base, wv, Some(&yc), rng.gen())
        }
    }
}

/// A base table with the per-group input laws the kernel samplers need,
/// computed once.
pub struct Prepared<'a, T: Scalar> {
    pub base: &'a JointDistribution<T>,
    yo: [Distribution<T>; 2],
    yc: Option<[Distribution<T>; 2]>,
    pub observed_disparity: T,
}

impl<'a, T: Scalar> Prepared<'a, T> {
    pub fn new(base: &'a JointDistribution<T>) -> Self {
        let laws = |v| [base.group_law(v, 0), base.group_law(v, 1)];
        Prepared {
            base,
            yo: laws(Variable::Yo),
            yc: base.has_construct().then(|| laws(Variable::Yc)),
            observed_disparity: crate::empirical::observed_disparity(base),
        }
    }

    pub fn laws(&self, input: Variable) -> &[Distribution<T>; 2] {
        match input {
            Variable::Yc => self.yc.as_ref().expect("base has a construct column"),
            _ => &self.yo,
        }
    }
}

/// Kernel rows `π_z(x, ·) / Pr[x | z]` from a joint matrix over `input × output`.
fn kernel_from_joints<T: Scalar>(
    input: Variable,
    input_support: &Support,
    output: &Support,
    laws: [&Distribution<T>; 2],
    joints: [Vec<Vec<T>>; 2],
    fallback: &[T],
) -> Result<ModelKernel<T>> {
    ModelKernel::from_fn(input, input_support.clone(), output.clone(), |z, x| {
        let m = laws[z].probs()[x].clone();
        if m.is_zero() {
            fallback.to_vec()
        } else {
            joints[z][x].iter().map(|v| v.clone() / m.clone()).collect()
        }
    })
}

/// A model passing demographic parity exactly: in each group the pair
/// (input, Yp) is a mixture of a maximal coupling and the independent
/// coupling between the group's input law and one shared prediction law.
pub fn dp_kernel<T: Scalar>(
    rng: &mut Rng64,
    prepared: &Prepared<T>,
    input: Variable,
    output: &Support,
) -> Result<ModelKernel<T>> {
    let input_support = prepared.base.support(input);
    let target = Distribution::new(output.clone(), grid_simplex(rng, output.len()))?;
    let laws = prepared.laws(input);
    let joints = [0, 1].map(|z| {
        let w: T = weight(rng);
        let law = &laws[z];
        let c = maximal_coupling(law, &target);
        input_support
            .iter()
            .map(|xl| {
                let i = c.support.index_of(xl).expect("in union");
                output
                    .iter()
                    .map(|yl| {
                        let j = c.support.index_of(yl).expect("in union");
                        w.clone() * c.joint[i][j].clone() + (T::one() - w.clone()) * law.prob(xl) * target.prob(yl)
                    })
                    .collect()
            })
            .collect()
    });
    kernel_from_joints(input, &input_support, output, [&laws[0], &laws[1]], joints, target.probs())
}

/// Random kernel; when the output support equals the input support it is
/// mixed with the identity so near-optimal models are sampled too.
pub fn mixed_kernel<T: Scalar>(
    rng: &mut Rng64,
    input: Variable,
    input_support: &Support,
    output: &Support,
    blind: bool,
) -> Result<ModelKernel<T>> {
    let n = input_support.len();
    let rows: Vec<Vec<T>> = (0..2 * n).map(|_| grid_simplex(rng, output.len())).collect();
    let identity = input_support == output;
    let w: T = if identity { weight(rng) } else { T::zero() };
    let rest = T::one() - w.clone();
    ModelKernel::from_fn(input, input_support.clone(), output.clone(), |z, x| {
        let r = if blind { &rows[x] } else { &rows[z * n + x] };
        if !identity {
            return r.clone();
        }
        let mut row: Vec<T> = r.iter().map(|a| rest.clone() * a.clone()).collect();
        row[x] += &w;
        row
    })
}

/// A model passing equalized odds exactly: rows depend on `Yo` only.
pub fn eo_kernel<T: Scalar>(rng: &mut Rng64, yo: &Support, output: &Support) -> Result<ModelKernel<T>> {
    mixed_kernel(rng, Variable::Yo, yo, output, true)
}

/// Shrinkage toward the constant row: exactly onto the test boundary, or the
/// largest multiple of `2^-16` below it (much smaller exact denominators).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Exact,
    Dyadic,
}

/// A model whose output disparity is at most `alpha · tv(Yo..)`: a random
/// kernel shrunk toward a constant row, which scales output disparity linearly.
/// Half of the draws sit on the boundary.
pub fn alpha_kernel<T: Scalar>(
    rng: &mut Rng64,
    prepared: &Prepared<T>,
    alpha: &T,
    input: Variable,
    output: &Support,
    boundary: Boundary,
) -> Result<ModelKernel<T>> {
    let input_support = prepared.base.support(input);
    let k0: ModelKernel<T> = mixed_kernel(rng, input, &input_support, output, false)?;
    let d0 = prediction_gap(prepared.laws(input), &k0);
    let budget = alpha.clone() * prepared.observed_disparity.clone();
    let mut lambda = if d0 <= budget { T::one() } else { budget / d0 };
    if boundary == Boundary::Dyadic {
        let scale = Rational::from(65536);
        lambda = T::from_ratio(&(Rational::from((lambda.to_ratio() * &scale).floor()) / scale));
    }
    if rng.gen_bool(0.5) {
        lambda = lambda * weight::<T>(rng);
    }
    let rest = T::one() - lambda.clone();
    let c: Vec<T> = grid_simplex(rng, output.len()).into_iter().map(|b: T| rest.clone() * b).collect();
    ModelKernel::from_fn(input, input_support.clone(), output.clone(), |z, x| {
        let row = k0.row(z, x).expect("all rows defined");
        row.iter().zip(&c).map(|(a, b)| lambda.clone() * a.clone() + b.clone()).collect()
    })
}

/// `tv(Yp | Z=0, Yp | Z=1)` for `kernel`, from the group laws of its input.
pub fn prediction_gap<T: Scalar>(input_laws: &[Distribution<T>; 2], kernel: &ModelKernel<T>) -> T {
    let laws = [0usize, 1].map(|z| {
        let input = &input_laws[z];
        let mut out = vec![T::zero(); kernel.output().len()];
        for (x, px) in input.probs().iter().enumerate() {
            if px.is_zero() {
                continue;
            }
            let row = kernel.row(z, x).expect("rows defined");
            for (slot, w) in out.iter_mut().zip(row) {
                *slot += &(px.clone() * w.clone());
            }
        }
        out
    });
    laws[0].iter().zip(&laws[1]).map(|(a, b)| (a.clone() - b.clone()).abs()).total() * T::half()
}

/// Indicator, numeric, or a random explicit metric (shortest-path closure of
/// random positive weights).
pub fn random_metric(rng: &mut Rng64, support: &Support) -> Result<MetricSupport> {
    match rng.gen_range(0..3) {
        0 => Ok(MetricSupport::indicator(support.clone())),
        1 if support.is_numeric() => MetricSupport::numeric(support.clone()),
        _ => {
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
            MetricSupport::explicit(support.labels().to_vec(), m)
        }
    }
}

/// Random label set drawn from a pool of six labels, mixing numbers and text.
pub fn random_labels(rng: &mut Rng64) -> Support {
    let pool = [Label::int(0), Label::int(1), Label::int(2), Label::text("a"), Label::text("b"), Label::text("c")];
    loop {
        let picked: Vec<Label> = pool.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if !picked.is_empty() {
            return Support::new(picked).expect("distinct");
        }
    }
}
