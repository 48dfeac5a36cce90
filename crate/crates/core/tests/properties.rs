mod common;

use construct_audit::criteria::{impose_worldview, worldview_holds, Worldview};
use construct_audit::distances::{emd_cost, overlap, tv_distance, MetricSupport};
use construct_audit::empirical::{observed_disparity, output_disparity};
use construct_audit::io::{joint_from_json, joint_to_json};
use construct_audit::probability::random::rng_from_seed;
use construct_audit::probability::{
    apply_model, from_samples, random_joint, random_kernel, replicate, Distribution, JointDistribution, Support,
    Supports, Variable,
};
use construct_audit::scalar::{Rational, Scalar};
use proptest::prelude::*;
use rand::Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_frac(n, d)
}

fn laws(seed: u64, n: usize) -> (Support, [Distribution<Rational>; 3]) {
    let mut rng = rng_from_seed(seed);
    let s = common::int_support(&mut rng, n);
    let l = [0, 1, 2].map(|_| common::sparse_law(&mut rng, &s));
    (s, l)
}

fn joint(seed: u64, nc: usize, no: usize) -> JointDistribution<Rational> {
    random_joint(&Supports::new(Some(Support::range(nc)), Support::range(no), Support::binary()), seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric(seed in any::<u64>(), n in 1usize..6) {
        let (_, [a, b, c]) = laws(seed, n);
        let ab = tv_distance(&a, &b);
        prop_assert_eq!(ab.clone(), tv_distance(&b, &a));
        prop_assert!(ab >= q(0, 1) && ab <= q(1, 1));
        prop_assert_eq!(tv_distance(&a, &a), q(0, 1));
        prop_assert!(tv_distance(&a, &c) <= ab + tv_distance(&b, &c));
    }

    #[test]
    fn overlap_complements_tv(seed in any::<u64>(), n in 1usize..8) {
        let (_, [a, b, _]) = laws(seed, n);
        prop_assert_eq!(overlap(&a, &b) + tv_distance(&a, &b), q(1, 1));
    }

    #[test]
    fn indicator_emd_is_tv(seed in any::<u64>(), n in 1usize..6) {
        let (s, [a, b, _]) = laws(seed, n);
        prop_assert_eq!(emd_cost(&a, &b, &MetricSupport::indicator(s)).unwrap(), tv_distance(&a, &b));
    }

    #[test]
    fn emd_is_bounded_by_diameter_times_tv(seed in any::<u64>(), n in 1usize..6) {
        let (s, [a, b, c]) = laws(seed, n);
        let mut rng = rng_from_seed(seed ^ 1);
        let ms = common::any_metric(&mut rng, &s);
        let ab: Rational = emd_cost(&a, &b, &ms).unwrap();
        prop_assert_eq!(ab.clone(), emd_cost(&b, &a, &ms).unwrap());
        prop_assert!(ab <= ms.diameter::<Rational>() * tv_distance(&a, &b));
        prop_assert!(emd_cost(&a, &c, &ms).unwrap() <= ab + emd_cost(&b, &c, &ms).unwrap());
    }

    #[test]
    fn models_leave_the_base_marginals_alone(seed in any::<u64>(), nc in 1usize..4, no in 1usize..4, from_yc in any::<bool>()) {
        let base = joint(seed, nc, no);
        let (var, support) = if from_yc { (Variable::Yc, Support::range(nc)) } else { (Variable::Yo, Support::range(no)) };
        let kernel = random_kernel(var, &support, &Support::range(3), seed ^ 2);
        let model = apply_model(&base, &kernel).unwrap();
        for z in 0..2 {
            prop_assert_eq!(model.pair_law(Variable::Yc, Variable::Yo, z), base.pair_law(Variable::Yc, Variable::Yo, z));
        }
        prop_assert_eq!(observed_disparity(&model), observed_disparity(&base));
        let one = model.table().iter().cloned().fold(q(0, 1), |a, b| a + b);
        prop_assert_eq!(one, q(1, 1));
    }

    #[test]
    fn imposed_worldviews_hold(seed in any::<u64>(), no in 2usize..4, k in 0i64..=8) {
        let base = joint(seed, 1, no).forget_construct();
        for wv in [Worldview::Wae, Worldview::Wysiwyg, Worldview::AlphaHybrid(q(k, 8))] {
            let d = impose_worldview(&base, &wv, None, seed).unwrap();
            prop_assert!(worldview_holds(&d, &wv, &q(0, 1)).unwrap().holds, "{:?}", wv);
            prop_assert_eq!(output_disparity(&d), output_disparity(&base));
        }
    }

    #[test]
    fn swapping_groups_keeps_disparities(seed in any::<u64>()) {
        let d = joint(seed, 2, 3);
        let s = d.swap_groups();
        prop_assert_eq!(output_disparity(&s), output_disparity(&d));
        prop_assert_eq!(observed_disparity(&s), observed_disparity(&d));
        prop_assert_eq!(s.swap_groups(), d);
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), nc in 1usize..4) {
        let d = joint(seed, nc, 2);
        prop_assert_eq!(joint_from_json::<Rational>(&joint_to_json(&d)).unwrap(), d.clone());
        let f = d.convert::<f64>();
        prop_assert_eq!(joint_from_json::<f64>(&joint_to_json(&f)).unwrap(), f);
    }

    #[test]
    fn replicated_samples_rebuild_the_table(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let s = Supports::new(Some(Support::binary()), Support::range(3), Support::binary());
        let weights: Vec<i64> = (0..24).map(|_| rng.gen_range(0..=3)).collect();
        let total: i64 = weights.iter().sum::<i64>().max(1);
        prop_assume!(weights.iter().any(|w| *w > 0));
        let d = JointDistribution::from_dense(s, weights.iter().map(|w| q(*w, total)).collect()).unwrap();
        let rows = replicate(&d).unwrap();
        prop_assert_eq!(rows.len() as i64 % total, 0);
        let back: JointDistribution<Rational> = from_samples(&rows, &Default::default()).unwrap();
        prop_assert_eq!(output_disparity(&back), output_disparity(&d));
        prop_assert_eq!(back.marginal(Variable::Yc), d.marginal(Variable::Yc).extend_to(&back.support(Variable::Yc)).unwrap());
    }
}

#[test]
fn float_and_rational_tables_coincide() {
    let r = joint(5, 3, 3);
    let f: JointDistribution<f64> =
        random_joint(&Supports::new(Some(Support::range(3)), Support::range(3), Support::binary()), 5);
    assert_eq!(r.convert::<f64>(), f);
    assert!((Scalar::to_f64(&output_disparity(&r)) - output_disparity(&f)).abs() < 1e-15);
}
