use rand::Rng;

use super::samplers::*;
use super::{Failure, Outcome, HARNESS_TOL};
use crate::constructions::{
    alpha_counterexample, eqodds_amplifying_counterexample, maximal_coupling, optimal_dem_parity_model,
    pp_adversarial_model, random_pp_margins,
};
use crate::criteria::{
    construct_accuracy, disparity_amplification_categorical, disparity_amplification_general, impose_worldview,
    likelihood, max_accuracy_under_alpha_disparity, max_accuracy_under_dem_parity, worldview_holds, Worldview,
};
use crate::distances::{emd_cost, kantorovich_dual_bound, lipschitz_constant, overlap, tv_distance, MetricSupport};
use crate::empirical::{alpha_disparity, demographic_parity, equalized_odds, output_disparity, predictive_parity};
use crate::error::AuditError;
use crate::probability::random::{random_simplex, rng_from_seed};
use crate::probability::{apply_model, Distribution, JointDistribution, Label, ModelKernel, Support, Variable};
use crate::scalar::{approx_eq, le_tol, Rational, Scalar};

pub(super) fn le<T: Scalar>(a: &T, b: &T) -> bool {
    le_tol(a, b, HARNESS_TOL)
}

pub(super) fn eq<T: Scalar>(a: &T, b: &T) -> bool {
    approx_eq(a, b, HARNESS_TOL)
}

pub(super) fn ensure<T: Scalar>(cond: bool, dist: &JointDistribution<T>, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(Failure::new(msg(), dist))
    }
}

pub(super) fn either(rng: &mut Rng64) -> Variable {
    if rng.gen_bool(0.5) {
        Variable::Yc
    } else {
        Variable::Yo
    }
}

pub(super) fn ranged(rng: &mut Rng64) -> Support {
    Support::range(size(rng, 2, 4))
}

/// A base with a construct column, optionally re-drawn under a random worldview.
fn any_worldview_base<T: Scalar>(rng: &mut Rng64) -> Result<JointDistribution<T>, Failure> {
    let (yc, yo, yp) = (ranged(rng), ranged(rng), ranged(rng));
    let base = base_with_construct::<T>(rng, yc, yo, yp);
    let wv = random_worldview(rng);
    let base = with_worldview(rng, base, wv.as_ref())?;
    if let Some(wv) = &wv {
        let holds = worldview_holds(&base, wv, &T::zero())?;
        ensure(holds.holds, &base, || format!("imposed {wv} does not hold"))?;
    }
    Ok(base)
}

pub(super) fn check_dp<T: Scalar>(dist: &JointDistribution<T>) -> Outcome {
    let dp = demographic_parity(dist, &T::zero())?;
    ensure(dp.pass, dist, || format!("premise: sampled model fails demographic parity ({})", dp.statistic.render()))
}

pub(super) fn check_eo<T: Scalar>(dist: &JointDistribution<T>) -> Outcome {
    let eo = equalized_odds(dist, &T::zero())?;
    ensure(eo.pass, dist, || format!("premise: sampled model fails equalized odds ({})", eo.statistic.render()))
}

pub(super) fn check_no_amplification<T: Scalar>(dist: &JointDistribution<T>) -> Outcome {
    let r = disparity_amplification_categorical(dist)?;
    ensure(!r.amplification, dist, || {
        format!("amplification: output disparity {} > construct disparity {}", r.left.render(), r.right.render())
    })
}

fn check_no_general_amplification<T: Scalar>(dist: &JointDistribution<T>, ms: &MetricSupport) -> Outcome {
    let r = disparity_amplification_general(dist, ms)?;
    ensure(le(&r.left, &r.right), dist, || {
        format!("general amplification ({} metric): {} > {}", ms.kind(), r.left.render(), r.right.render())
    })
}

/// Demographic parity implies no amplification, under any worldview; and under
/// WAE the construct-optimal predictor passes demographic parity.
pub fn t1<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let base = any_worldview_base::<T>(&mut rng)?;
    let input = either(&mut rng);
    let out = base.support(Variable::Yp);
    let dist = apply_model(&base, &dp_kernel(&mut rng, &Prepared::new(&base), input, &out)?)?;
    check_dp(&dist)?;
    check_no_amplification(&dist)?;

    let yc = base.support(Variable::Yc);
    let wae = impose_worldview(&base, &Worldview::Wae, Some(&yc), rng.gen())?;
    let optimal = apply_model(&wae, &ModelKernel::identity(Variable::Yc, yc)?)?;
    let dp = demographic_parity(&optimal, &T::zero())?;
    ensure(dp.pass, &optimal, || format!("Yp := Yc under WAE fails demographic parity ({})", dp.statistic.render()))?;
    let acc = construct_accuracy(&optimal)?;
    ensure(eq(&acc, &T::one()), &optimal, || format!("Yp := Yc has accuracy {}", acc.render()))
}

/// Demographic-parity accuracy ceiling, over `kernels` models per base, and its attainment.
pub fn t2<T: Scalar>(seed: u64, kernels: usize) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let base = any_worldview_base::<T>(&mut rng)?;
    let bound = max_accuracy_under_dem_parity(&base)?;
    let yc = base.support(Variable::Yc);
    let prepared = Prepared::new(&base);
    for k in 0..kernels {
        let input = either(&mut rng);
        let dist = apply_model(&base, &dp_kernel(&mut rng, &prepared, input, &yc)?)?;
        check_dp(&dist)?;
        let acc = construct_accuracy(&dist)?;
        ensure(le(&acc, &bound), &dist, || {
            format!("kernel {k}: accuracy {} exceeds bound {}", acc.render(), bound.render())
        })?;
    }
    let optimal = optimal_dem_parity_model(&base)?.dist;
    check_dp(&optimal)?;
    let acc = construct_accuracy(&optimal)?;
    ensure(eq(&acc, &bound), &optimal, || {
        format!("optimal model accuracy {} differs from bound {}", acc.render(), bound.render())
    })
}

/// `Σ min(p, q) = 1 - tv(p, q)`, and the maximal coupling puts exactly that mass on the diagonal.
pub fn l1<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let law = |rng: &mut Rng64| {
        let s = random_labels(rng);
        let n = s.len();
        Distribution::<T>::new(s, random_simplex(rng, n))
    };
    let p = law(&mut rng)?;
    let q = law(&mut rng)?;
    let failure = |msg: String| Failure { message: format!("{msg}; p = {p:?}, q = {q:?}"), distribution: None };
    let m = overlap(&p, &q);
    let tv = tv_distance(&p, &q);
    if !eq(&m, &(T::one() - tv.clone())) {
        return Err(failure(format!("overlap {} != 1 - tv {}", m.render(), tv.render())));
    }
    let c = maximal_coupling(&p, &q);
    if !eq(&c.agreement(), &m) {
        return Err(failure(format!("coupling agreement {} != overlap {}", c.agreement().render(), m.render())));
    }
    let union = c.support.clone();
    let expect = |d: &Distribution<T>| union.iter().map(|l| d.prob(l)).collect::<Vec<T>>();
    let close = |a: &[T], b: &[T]| a.iter().zip(b).all(|(x, y)| eq(x, y));
    if !close(&c.left_marginal(), &expect(&p)) || !close(&c.right_marginal(), &expect(&q)) {
        return Err(failure("coupling marginals differ from the inputs".into()));
    }
    Ok(())
}

/// WYSIWYG plus equalized odds implies no amplification; `Yp := Yo` passes equalized odds.
pub fn t3<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let yo = ranged(&mut rng);
    let out = if rng.gen_bool(0.5) { yo.clone() } else { ranged(&mut rng) };
    let base = base_observed::<T>(&mut rng, yo.clone(), out.clone());
    let base = impose_worldview(&base, &Worldview::Wysiwyg, None, rng.gen())?;
    let wv = worldview_holds(&base, &Worldview::Wysiwyg, &T::zero())?;
    ensure(wv.holds, &base, || "premise: WYSIWYG does not hold".into())?;
    let dist = apply_model(&base, &eo_kernel(&mut rng, &yo, &out)?)?;
    check_eo(&dist)?;
    check_no_amplification(&dist)?;

    let optimal = apply_model(&base, &ModelKernel::identity(Variable::Yo, yo)?)?;
    check_eo(&optimal)?;
    let acc = construct_accuracy(&optimal)?;
    ensure(eq(&acc, &T::one()), &optimal, || format!("Yp := Yo has accuracy {} under WYSIWYG", acc.render()))
}

/// The equalized-odds counterexample passes the test and amplifies.
pub fn t4<T: Scalar>(seed: u64) -> Outcome {
    let dist: JointDistribution<T> = eqodds_amplifying_counterexample(seed)?;
    check_eo(&dist)?;
    let wysiwyg = worldview_holds(&dist, &Worldview::Wysiwyg, &T::zero())?;
    ensure(!wysiwyg.holds, &dist, || "counterexample satisfies WYSIWYG".into())?;
    let r = disparity_amplification_categorical(&dist)?;
    ensure(r.amplification, &dist, || format!("no amplification: {} <= {}", r.left.render(), r.right.render()))
}

/// An adversarial predictive-parity model with `ε` halved from 1/50 until feasible.
pub(super) fn pp_instance<T: Scalar>(rng: &mut Rng64) -> Result<(JointDistribution<T>, T), Failure> {
    let n = size(rng, 2, 4);
    let margins: [Distribution<T>; 2] = random_pp_margins(rng, n);
    let mut eps = T::from_frac(1, 50);
    let built = loop {
        match pp_adversarial_model(&margins, &eps) {
            Err(AuditError::EpsilonTooLarge(_)) => eps = eps * T::half(),
            other => break other?,
        }
    };
    let dist = built.dist;
    let pp = predictive_parity(&dist, &T::zero())?;
    ensure(pp.pass, &dist, || format!("fails predictive parity ({})", pp.statistic.render()))?;
    let out = output_disparity(&dist);
    let target = T::one() - eps.clone();
    ensure(eq(&out, &target), &dist, || {
        format!("output disparity {} != 1 - epsilon = {}", out.render(), target.render())
    })?;
    Ok((dist, eps))
}

/// The predictive-parity adversary amplifies under the given worldview.
pub(super) fn pp_amplifies<T: Scalar>(rng: &mut Rng64, dist: &JointDistribution<T>, wv: &Worldview) -> Outcome {
    let dist = match wv {
        Worldview::Wysiwyg => {
            let holds = worldview_holds(dist, wv, &T::zero())?;
            ensure(holds.holds, dist, || "construction should copy Yo into Yc".into())?;
            dist.clone()
        }
        _ => {
            let yo = dist.support(Variable::Yo);
            impose_worldview(dist, wv, Some(&yo), rng.gen())?
        }
    };
    let r = disparity_amplification_categorical(&dist)?;
    ensure(r.amplification, &dist, || {
        format!("no amplification under {wv}: {} <= {}", r.left.render(), r.right.render())
    })
}

/// The predictive-parity adversary: passes the test, output disparity `1 - ε`,
/// amplification under WYSIWYG and under WAE.
pub fn t5<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let (dist, _) = pp_instance::<T>(&mut rng)?;
    pp_amplifies(&mut rng, &dist, &Worldview::Wysiwyg)?;
    pp_amplifies(&mut rng, &dist, &Worldview::Wae)
}

fn alpha_grid<T: Scalar>(rng: &mut Rng64) -> (Rational, T) {
    let a = Rational::from_frac(rng.gen_range(0..=10), 10);
    let t = T::from_ratio(&a);
    (a, t)
}

/// An α-Hybrid base with construct support equal to the observed support.
fn hybrid_base<T: Scalar>(rng: &mut Rng64, alpha: &Rational, yp: Support) -> Result<JointDistribution<T>, Failure> {
    let yo = ranged(rng);
    let base = base_observed::<T>(rng, yo.clone(), yp);
    let wv = Worldview::AlphaHybrid(alpha.clone());
    let base = impose_worldview(&base, &wv, Some(&yo), rng.gen())?;
    let holds = worldview_holds(&base, &wv, &T::zero())?;
    ensure(holds.holds, &base, || format!("premise: {wv} does not hold"))?;
    Ok(base)
}

/// α-Hybrid plus the α-disparity test implies no amplification.
pub fn t6<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let (a, alpha) = alpha_grid::<T>(&mut rng);
    let base = hybrid_base::<T>(&mut rng, &a, Support::binary())?;
    let input = either(&mut rng);
    let out = if rng.gen_bool(0.5) { base.support(Variable::Yc) } else { ranged(&mut rng) };
    let dist =
        apply_model(&base, &alpha_kernel(&mut rng, &Prepared::new(&base), &alpha, input, &out, Boundary::Exact)?)?;
    let test = alpha_disparity(&dist, &alpha, &T::zero())?;
    ensure(test.pass, &dist, || format!("premise: fails the alpha-disparity test ({})", test.statistic.render()))?;
    check_no_amplification(&dist)?;

    let yc = base.support(Variable::Yc);
    let optimal = apply_model(&base, &ModelKernel::identity(Variable::Yc, yc)?)?;
    let test = alpha_disparity(&optimal, &alpha, &T::zero())?;
    ensure(test.pass, &optimal, || "Yp := Yc fails the alpha-disparity test".into())
}

/// The α'-test accuracy ceiling for α' < α, over `kernels` models per base.
pub fn t7<T: Scalar>(seed: u64, kernels: usize) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let hi = rng.gen_range(1..=10);
    let lo = rng.gen_range(0..hi);
    let (a, alpha) = (Rational::from_frac(hi, 10), T::from_frac(hi, 10));
    let alpha_prime = T::from_frac(lo, 10);
    let base = hybrid_base::<T>(&mut rng, &a, Support::binary())?;
    let bound = max_accuracy_under_alpha_disparity(&base, &alpha, &alpha_prime)?;
    let yc = base.support(Variable::Yc);
    let prepared = Prepared::new(&base);
    for k in 0..kernels {
        let input = either(&mut rng);
        let dist = apply_model(&base, &alpha_kernel(&mut rng, &prepared, &alpha_prime, input, &yc, Boundary::Dyadic)?)?;
        let test = alpha_disparity(&dist, &alpha_prime, &T::zero())?;
        ensure(test.pass, &dist, || format!("premise: kernel {k} fails the alpha'-test"))?;
        let acc = construct_accuracy(&dist)?;
        ensure(le(&acc, &bound), &dist, || {
            format!("kernel {k}: accuracy {} exceeds bound {}", acc.render(), bound.render())
        })?;
    }
    Ok(())
}

/// The α < α' counterexample passes the α'-test and amplifies.
pub fn t8<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let hi = rng.gen_range(1..=10);
    let lo = rng.gen_range(0..hi);
    let (a, ap) = (Rational::from_frac(lo, 10), Rational::from_frac(hi, 10));
    let dist: JointDistribution<T> = alpha_counterexample(&a, &ap, rng.gen())?;
    let wv = worldview_holds(&dist, &Worldview::AlphaHybrid(a.clone()), &T::zero())?;
    ensure(wv.holds, &dist, || "counterexample violates alpha-Hybrid".into())?;
    let test = alpha_disparity(&dist, &T::from_ratio(&ap), &T::zero())?;
    ensure(test.pass, &dist, || format!("counterexample fails the alpha'-test ({})", test.statistic.render()))?;
    let r = disparity_amplification_categorical(&dist)?;
    ensure(r.amplification, &dist, || format!("no amplification: {} <= {}", r.left.render(), r.right.render()))
}

/// Categorical amplification implies general amplification under the
/// indicator metric; `ρ*·EMD <= tv` always.
pub fn t9<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let (yc, yo) = (ranged(&mut rng), ranged(&mut rng));
    let base = base_with_construct::<T>(&mut rng, yc.clone(), yo.clone(), Support::binary());
    let input = either(&mut rng);
    let input_support = base.support(input);
    // half the kernels see Z directly, which makes amplification common
    let kernel = if rng.gen_bool(0.5) {
        mixed_kernel(&mut rng, input, &input_support, &Support::binary(), false)?
    } else {
        let flip: T = weight(&mut rng);
        let base_rows = mixed_kernel::<T>(&mut rng, input, &input_support, &Support::binary(), false)?;
        ModelKernel::from_fn(input, input_support.clone(), Support::binary(), |z, x| {
            let r = base_rows.row(z, x).expect("defined");
            let zr = if z == 1 { [T::zero(), T::one()] } else { [T::one(), T::zero()] };
            (0..2).map(|j| flip.clone() * zr[j].clone() + (T::one() - flip.clone()) * r[j].clone()).collect()
        })?
    };
    let dist = apply_model(&base, &kernel)?;
    let cat = disparity_amplification_categorical(&dist)?;
    let ms = MetricSupport::indicator(yc);
    let gen = disparity_amplification_general(&dist, &ms)?;
    ensure(le(&gen.right, &cat.right), &dist, || {
        format!("rho*·EMD = {} exceeds tv = {}", gen.right.render(), cat.right.render())
    })?;
    ensure(!cat.amplification || gen.amplification, &dist, || {
        format!(
            "categorical amplification without general amplification: {} <= {}",
            gen.left.render(),
            gen.right.render()
        )
    })
}

/// Demographic parity implies no general amplification, for any metric.
pub fn t10<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let yc = if rng.gen_bool(0.5) { numeric_support(&mut rng, 2, 5) } else { ranged(&mut rng) };
    let yo = ranged(&mut rng);
    let base = base_with_construct::<T>(&mut rng, yc.clone(), yo, Support::binary());
    let input = either(&mut rng);
    let dist = apply_model(&base, &dp_kernel(&mut rng, &Prepared::new(&base), input, &Support::binary())?)?;
    check_dp(&dist)?;
    let ms = random_metric(&mut rng, &yc)?;
    check_no_general_amplification(&dist, &ms)
}

/// WYSIWYG plus equalized odds implies no general amplification under a
/// numeric metric; the Kantorovich witness `ℓ/ρ*` certifies the slack.
pub fn t11<T: Scalar>(seed: u64) -> Outcome {
    let mut rng = rng_from_seed(seed);
    let yo = numeric_support(&mut rng, 2, 5);
    let base = base_observed::<T>(&mut rng, yo.clone(), Support::binary());
    let base = impose_worldview(&base, &Worldview::Wysiwyg, None, rng.gen())?;
    let dist = apply_model(&base, &eo_kernel(&mut rng, &yo, &Support::binary())?)?;
    check_eo(&dist)?;
    let ms = MetricSupport::numeric(yo.clone())?;
    check_no_general_amplification(&dist, &ms)?;

    // Pr[Yp=1 | Z=z] = Σ ℓ(y) Pr[Yc=y | Z=z] under WYSIWYG + equalized odds
    let l = likelihood(&dist)?;
    let pairs: Vec<(Label, T)> = l.values.clone();
    let rho = lipschitz_constant(&pairs, &ms)?;
    if rho.is_zero() {
        return Ok(());
    }
    let phi: Vec<(Label, T)> = pairs.iter().map(|(y, v)| (y.clone(), v.clone() / rho.clone())).collect();
    let (c0, c1) = (dist.group_law(Variable::Yc, 0), dist.group_law(Variable::Yc, 1));
    let dual = kantorovich_dual_bound(&c0, &c1, &ms, &phi)?;
    let emd = emd_cost(&c0, &c1, &ms)?;
    ensure(le(&dual, &emd), &dist, || format!("dual value {} exceeds EMD {}", dual.render(), emd.render()))?;
    let rate = |z: u8| dist.group_law(Variable::Yp, z).prob(&Label::int(1));
    let gap = rate(1) - rate(0);
    ensure(eq(&(rho * dual.clone()), &gap), &dist, || {
        format!("rho*·dual {} differs from the rate gap {}", dual.render(), gap.render())
    })?;
    Ok(())
}
