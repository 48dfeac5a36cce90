//! Executable versions of the constructive proofs and counterexamples.

mod coupling;

pub use coupling::{maximal_coupling, Coupling};

use rand::Rng;

use crate::criteria::{impose_worldview, Worldview};
use crate::empirical::{observed_disparity, output_disparity};
use crate::error::{AuditError, Result};
use crate::probability::random::{derive_seed, random_grid, random_group_blind_kernel, random_simplex, sub_rng};
use crate::probability::{
    apply_model, deterministic_kernel, random_joint, Assignment, Distribution, JointDistribution, Label, ModelKernel,
    Support, Supports, Variable,
};
use crate::scalar::{Rational, Scalar};

/// Minimum observed disparity of generated counterexample bases.
pub const MIN_OBSERVED_GAP: (i64, i64) = (1, 5);
/// Minimum output disparity of the equalized-odds counterexample.
pub const MIN_OUTPUT_GAP: (i64, i64) = (1, 10);

const MAX_ATTEMPTS: u64 = 256;

/// A model together with the distribution it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct Constructed<T> {
    pub kernel: ModelKernel<T>,
    pub dist: JointDistribution<T>,
}

/// Demographic-parity model of maximal construct accuracy.
///
/// In group 0 the model predicts the construct. In group 1 it couples the
/// group's construct law maximally with the group-0 construct law, so both
/// groups receive the same prediction law. The prediction support is the
/// construct support.
pub fn optimal_dem_parity_model<T: Scalar>(base: &JointDistribution<T>) -> Result<Constructed<T>> {
    base.require_construct()?;
    let yc = base.support(Variable::Yc);
    let n = yc.len();
    let c0 = base.group_law(Variable::Yc, 0);
    let c1 = base.group_law(Variable::Yc, 1);
    let coupling = maximal_coupling(&c1, &c0);
    let idx: Vec<usize> = yc.iter().map(|l| coupling.support.index_of(l).expect("union contains yc")).collect();
    let mut rows: [Vec<Option<Vec<T>>>; 2] = [Vec::new(), Vec::new()];
    for x in 0..n {
        rows[0].push(Some((0..n).map(|j| if j == x { T::one() } else { T::zero() }).collect()));
        let mass = c1.probs()[x].clone();
        rows[1].push(
            (!mass.is_zero()).then(|| idx.iter().map(|&j| coupling.joint[idx[x]][j].clone() / mass.clone()).collect()),
        );
    }
    let kernel = ModelKernel::new(Variable::Yc, yc.clone(), yc, rows)?;
    let dist = apply_model(base, &kernel)?;
    Ok(Constructed { kernel, dist })
}

/// Posteriors `p[yo][yp] = Pr[Yo = yo | Yp = yp]` solving
/// `[[1-ε/2, ε/2], [ε/2, 1-ε/2]] · (p0, p1) = (m0, m1)` for every `yo`.
pub fn pp_posteriors<T: Scalar>(margins: &[Distribution<T>; 2], epsilon: &T) -> Result<(Support, Vec<[T; 2]>)> {
    if *epsilon <= T::zero() || *epsilon >= T::one() {
        return Err(AuditError::InvalidParameter(format!("epsilon = {} is outside (0, 1)", epsilon.render())));
    }
    let support = margins[0].support().union(margins[1].support());
    let big = T::one() - epsilon.clone() * T::half();
    let small = epsilon.clone() * T::half();
    let det = T::one() - epsilon.clone();
    let mut out = Vec::with_capacity(support.len());
    for label in support.iter() {
        let (m0, m1) = (margins[0].prob(label), margins[1].prob(label));
        if m0.is_zero() || m1.is_zero() {
            return Err(AuditError::InvalidParameter(format!(
                "observed label `{label}` needs positive probability in both groups"
            )));
        }
        let p0 = (big.clone() * m0.clone() - small.clone() * m1.clone()) / det.clone();
        let p1 = (big.clone() * m1 - small.clone() * m0) / det.clone();
        for p in [&p0, &p1] {
            if *p <= T::zero() {
                return Err(AuditError::EpsilonTooLarge(format!("{} at Yo={label}", p.render())));
            }
        }
        out.push([p0, p1]);
    }
    Ok((support, out))
}

/// A model that nearly outputs `Z` yet passes predictive parity.
///
/// `Pr[Yp = z | Z = z] = 1 - ε/2`, groups are equally likely, and the
/// construct is set equal to the observation.
pub fn pp_adversarial_model<T: Scalar>(margins: &[Distribution<T>; 2], epsilon: &T) -> Result<Constructed<T>> {
    let (yo, post) = pp_posteriors(margins, epsilon)?;
    let rate = |z: usize, yp: usize| -> T {
        if yp == z {
            T::one() - epsilon.clone() * T::half()
        } else {
            epsilon.clone() * T::half()
        }
    };
    let kernel = ModelKernel::from_fn(Variable::Yo, yo.clone(), Support::binary(), |z, o| {
        let m = margins[z].prob(yo.get(o));
        (0..2).map(|yp| post[o][yp].clone() * rate(z, yp) / m.clone()).collect()
    })?;
    let supports = Supports::new(Some(yo.clone()), yo.clone(), Support::binary());
    let base = JointDistribution::from_fn(supports, |z, c, o, p| {
        if c == o && p == 0 {
            margins[z].prob(yo.get(o)) * T::half()
        } else {
            T::zero()
        }
    })?;
    let dist = apply_model(&base, &kernel)?;
    Ok(Constructed { kernel, dist })
}

/// Random `(Z, Yo)` table whose observed disparity is at least 1/5.
fn gapped_base<T: Scalar>(yo: &Support, seed: u64) -> JointDistribution<T> {
    let supports = Supports::new(None, yo.clone(), Support::binary());
    let floor = T::from_frac(MIN_OBSERVED_GAP.0, MIN_OBSERVED_GAP.1);
    for attempt in 0..MAX_ATTEMPTS {
        let d: JointDistribution<T> = random_joint(&supports, derive_seed(seed, attempt));
        if observed_disparity(&d) >= floor {
            return d;
        }
    }
    // Point masses on distinct labels in the two groups.
    let n = yo.len();
    JointDistribution::from_fn(supports, |z, _, o, p| {
        let target = if z == 0 { 0 } else { n - 1 };
        if o == target && p == 0 {
            T::half()
        } else {
            T::zero()
        }
    })
    .expect("valid point-mass table")
}

fn observed_support<R: Rng>(rng: &mut R) -> Support {
    Support::range(rng.gen_range(2..=4))
}

/// Equalized odds holds, the construct is independent of `Z`, and output
/// disparity exceeds 1/10: categorical amplification without WYSIWYG.
pub fn eqodds_amplifying_counterexample<T: Scalar>(seed: u64) -> Result<JointDistribution<T>> {
    let mut rng = sub_rng(seed, 0);
    let yo = observed_support(&mut rng);
    let base: JointDistribution<T> = gapped_base(&yo, derive_seed(seed, 1));
    let floor = T::from_frac(MIN_OUTPUT_GAP.0, MIN_OUTPUT_GAP.1);
    let mut model = None;
    for attempt in 0..MAX_ATTEMPTS {
        let kernel = random_group_blind_kernel(Variable::Yo, &yo, &Support::binary(), derive_seed(seed, 2 + attempt));
        let out = apply_model(&base, &kernel)?;
        if output_disparity(&out) > floor {
            model = Some(out);
            break;
        }
    }
    // The identity kernel is group-blind and keeps the full observed gap.
    let model = match model {
        Some(m) => m,
        None => apply_model(&base, &ModelKernel::identity(Variable::Yo, yo.clone())?)?,
    };
    impose_worldview(&model, &Worldview::Wae, Some(&yo), derive_seed(seed, u64::MAX))
}

/// α-Hybrid holds and output disparity equals `α'·tv(Yo..)` for `α < α'`.
pub fn alpha_counterexample<T: Scalar>(
    alpha: &Rational,
    alpha_prime: &Rational,
    seed: u64,
) -> Result<JointDistribution<T>> {
    let zero = Rational::from_frac(0, 1);
    let one = Rational::from_frac(1, 1);
    if !(zero <= *alpha && alpha < alpha_prime && *alpha_prime <= one) {
        return Err(AuditError::WrongOrder(format!(
            "0 <= alpha ({}) < alpha' ({}) <= 1",
            crate::scalar::render_ratio(alpha),
            crate::scalar::render_ratio(alpha_prime)
        )));
    }
    let mut rng = sub_rng(seed, 0);
    let yo = observed_support(&mut rng);
    let base: JointDistribution<T> = gapped_base(&yo, derive_seed(seed, 1));
    let gap = T::from_ratio(alpha_prime) * observed_disparity(&base);
    // rates r and r + gap, with r on a grid in [0, 1 - gap]
    let low = random_grid::<T, _>(&mut rng, 64) * (T::one() - gap.clone());
    let high = low.clone() + gap;
    let flip = rng.gen_bool(0.5);
    let kernel = ModelKernel::from_fn(Variable::Yo, yo.clone(), Support::binary(), |z, _| {
        let r = if (z == 0) ^ flip { low.clone() } else { high.clone() };
        vec![T::one() - r.clone(), r]
    })?;
    let model = apply_model(&base, &kernel)?;
    impose_worldview(&model, &Worldview::AlphaHybrid(alpha.clone()), Some(&yo), derive_seed(seed, 2))
}

/// `Yc, Z` independent fair bits, `Yo = Yc`, and `Yp = f(Yc, Z)`.
fn bit_model<T: Scalar>(f: impl Fn(i64, i64) -> i64) -> JointDistribution<T> {
    let supports = Supports::new(Some(Support::binary()), Support::binary(), Support::binary());
    let cells = (0..2i64).flat_map(|z| (0..2i64).map(move |c| (z, c))).map(|(z, c)| {
        (Assignment::new(z as u8, Some(Label::int(c)), Label::int(c), Label::int(f(c, z))), T::from_frac(1, 4))
    });
    JointDistribution::from_cells(supports, cells).expect("fixed table is valid")
}

/// `Yp = Yc XOR Z`.
pub fn xor_example<T: Scalar>() -> JointDistribution<T> {
    bit_model(|c, z| c ^ z)
}

/// `Yp = Z`.
pub fn ypz_example<T: Scalar>() -> JointDistribution<T> {
    bit_model(|_, z| z)
}

/// `Yp := 1(Yc >= threshold)` on a numeric construct, as a kernel on `Yc`.
pub fn threshold_kernel<T: Scalar>(construct: &Support, threshold: &Rational) -> Result<ModelKernel<T>> {
    deterministic_kernel(Variable::Yc, construct.clone(), Support::binary(), |_, l| {
        let above = l.as_rational().is_some_and(|v| v >= threshold);
        Label::int(above as i64)
    })
}

/// Random observed margins for the predictive-parity construction: every
/// label has mass at least `1/(4n)` in both groups.
pub fn random_pp_margins<T: Scalar, R: Rng>(rng: &mut R, n: usize) -> [Distribution<T>; 2] {
    let support = Support::range(n);
    [0, 1].map(|_| {
        let w: Vec<T> = random_simplex(rng, n);
        let floor = T::from_count(1, 4 * n as u64);
        // mix with uniform so no label is too rare
        let probs = w.into_iter().map(|p| p * T::from_frac(3, 4) + floor.clone()).collect();
        Distribution::new(support.clone(), probs).expect("mixture stays on the simplex")
    })
}
