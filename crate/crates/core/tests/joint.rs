use hll_core::estimation::{ml_estimate, MlEstimator, MlOptions};
use hll_core::joint::{
    estimate_joint, estimate_joint_from_statistic, extract_joint_statistic, inclusion_exclusion_estimates,
    joint_log_likelihood, Dominance, JointMethod, JointOptions, JointStatistic, PhiPoint,
};
use hll_core::{HllSketch, SketchConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

fn random_sketch(config: SketchConfig, n: u64, rng: &mut Pcg64Mcg) -> HllSketch {
    let mut s = HllSketch::new(config);
    for _ in 0..n {
        s.insert_hash(rng.next_u64());
    }
    s
}

/// Sketches of `A ∪ X` and `B ∪ X` for disjoint random sets.
fn pair(config: SketchConfig, a: u64, b: u64, x: u64, seed: u64) -> (HllSketch, HllSketch) {
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let sa = random_sketch(config, a, &mut rng);
    let sb = random_sketch(config, b, &mut rng);
    let sx = random_sketch(config, x, &mut rng);
    (sa.merge(&sx).unwrap(), sb.merge(&sx).unwrap())
}

fn check_invariants(st: &JointStatistic) {
    let q = st.config().q() as usize;
    let m = st.config().num_registers() as u32;
    assert_eq!(st.c1_greater[0], 0);
    assert_eq!(st.c2_greater[0], 0);
    assert_eq!(st.c1_less[q + 1], 0);
    assert_eq!(st.c2_less[q + 1], 0);
    let sum = |v: &[u32]| v.iter().sum::<u32>();
    assert_eq!(sum(&st.c1_less), sum(&st.c2_greater));
    assert_eq!(sum(&st.c2_less), sum(&st.c1_greater));
    assert_eq!(sum(&st.c1_less) + sum(&st.c_equal) + sum(&st.c2_less), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistic_invariants(p in 2u8..=10, q in 0u8..=20, a in 0u64..3000, b in 0u64..3000, x in 0u64..3000, seed in any::<u64>()) {
        let c = SketchConfig::new(p, q).unwrap();
        let (s1, s2) = pair(c, a, b, x, seed);
        let st = extract_joint_statistic(&s1, &s2).unwrap();
        check_invariants(&st);
        prop_assert_eq!(st.first_counts(), s1.counts());
        prop_assert_eq!(st.second_counts(), s2.counts());
        prop_assert_eq!(st.union_counts(), s1.merge(&s2).unwrap().counts());
        prop_assert_eq!(st.swapped(), extract_joint_statistic(&s2, &s1).unwrap());
    }

    #[test]
    fn relabeling_symmetry(seed in any::<u64>(), pa in -2.0f64..12.0, pb in -2.0f64..12.0, px in -2.0f64..12.0) {
        let c = SketchConfig::new(8, 16).unwrap();
        let (s1, s2) = pair(c, 500, 2000, 1000, seed);
        let st = extract_joint_statistic(&s1, &s2).unwrap();
        let (f, g) = joint_log_likelihood(&PhiPoint { phi_a: pa, phi_b: pb, phi_x: px }, &st).unwrap();
        let (fs, gs) = joint_log_likelihood(&PhiPoint { phi_a: pb, phi_b: pa, phi_x: px }, &st.swapped()).unwrap();
        prop_assert!((f - fs).abs() <= 1e-12 * f.abs());
        prop_assert!((g[0] - gs[1]).abs() <= 1e-12 * g[0].abs().max(1.0));
        prop_assert!((g[1] - gs[0]).abs() <= 1e-12 * g[1].abs().max(1.0));
        prop_assert!((g[2] - gs[2]).abs() <= 1e-12 * g[2].abs().max(1.0));
    }
}

/// Largest deviation between the analytic gradient and central differences,
/// relative to the gradient's largest component.
fn gradient_mismatch(point: &PhiPoint, st: &JointStatistic) -> f64 {
    let h = 1e-5;
    let (_, g) = joint_log_likelihood(point, st).unwrap();
    let base = point.as_array();
    let scale = g.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    (0..3)
        .map(|i| {
            let mut up = base;
            let mut down = base;
            up[i] += h;
            down[i] -= h;
            let (fu, _) = joint_log_likelihood(&PhiPoint::from_array(up), st).unwrap();
            let (fd, _) = joint_log_likelihood(&PhiPoint::from_array(down), st).unwrap();
            ((fu - fd) / (2.0 * h) - g[i]).abs() / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = Pcg64Mcg::seed_from_u64(99);
    let c = SketchConfig::new(10, 20).unwrap();
    for i in 0..100u64 {
        let draw = |rng: &mut Pcg64Mcg| rng.next_u64() % 20_000;
        let (a, b, x) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (s1, s2) = pair(c, a, b, x, i);
        let st = extract_joint_statistic(&s1, &s2).unwrap();
        let u = |rng: &mut Pcg64Mcg| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let point = PhiPoint::from_array([0; 3].map(|_| 12.0 * u(&mut rng)));
        let err = gradient_mismatch(&point, &st);
        assert!(err <= 1e-5, "case {i}: ({a}, {b}, {x}) at {point:?}: {err:e}");
    }
}

#[test]
fn disjoint_limit_of_intersection_gradient() {
    let c = SketchConfig::new(10, 20).unwrap();
    let (s1, s2) = pair(c, 5000, 5000, 0, 3);
    let st = extract_joint_statistic(&s1, &s2).unwrap();
    let p = PhiPoint { phi_a: 5000f64.ln(), phi_b: 5000f64.ln(), phi_x: -30.0 };
    let (_, g) = joint_log_likelihood(&p, &st).unwrap();
    assert!(g[2].abs() < 1e-6, "{g:?}");
    let p2 = PhiPoint { phi_x: -20.0, ..p };
    let (_, g2) = joint_log_likelihood(&p2, &st).unwrap();
    assert!(g[2].abs() < g2[2].abs());
}

#[test]
fn identical_sketches() {
    let c = SketchConfig::new(12, 20).unwrap();
    let mut rng = Pcg64Mcg::seed_from_u64(17);
    let s = random_sketch(c, 10_000, &mut rng);
    let ie = inclusion_exclusion_estimates(&s, &s, &MlEstimator::default()).unwrap();
    let single = ml_estimate(&s.counts(), &MlOptions::default());
    assert_eq!((ie.a, ie.b, ie.x), (0.0, 0.0, single));

    let r = estimate_joint(&s, &s, &JointOptions::default()).unwrap();
    let e = r.estimates;
    assert!(e.lambda_a < 0.01 * e.lambda_x && e.lambda_b < 0.01 * e.lambda_x, "{e:?}");
    assert!((e.lambda_x / single - 1.0).abs() < 1e-3, "{e:?} vs {single}");
    assert!(r.log_likelihood >= r.initial_log_likelihood);
}

#[test]
fn disjoint_shortcut() {
    let c = SketchConfig::new(6, 20).unwrap();
    // register sets with no overlap: first sketch only fills even registers
    let regs1: Vec<u8> = (0..64).map(|i| if i % 2 == 0 { 3 } else { 0 }).collect();
    let regs2: Vec<u8> = (0..64).map(|i| if i % 2 == 1 { 5 } else { 0 }).collect();
    let s1 = HllSketch::from_registers(c, regs1).unwrap();
    let s2 = HllSketch::from_registers(c, regs2).unwrap();
    let r = estimate_joint(&s1, &s2, &JointOptions::default()).unwrap();
    assert_eq!(r.method, JointMethod::Disjoint);
    assert_eq!(r.estimates.lambda_x, 0.0);
    let opts = MlOptions::default();
    assert_eq!(r.estimates.lambda_a, ml_estimate(&s1.counts(), &opts));
    assert_eq!(r.estimates.lambda_b, ml_estimate(&s2.counts(), &opts));
}

#[test]
fn dominance_flag() {
    let c = SketchConfig::new(4, 10).unwrap();
    let s1 = HllSketch::from_registers(c, vec![4; 16]).unwrap();
    let s2 = HllSketch::from_registers(c, (0..16).map(|i| 1 + (i % 3) as u8).collect()).unwrap();
    let r = estimate_joint(&s1, &s2, &JointOptions::default()).unwrap();
    assert_eq!(r.dominance, Some(Dominance::First));
    assert!(r.log_likelihood >= r.initial_log_likelihood);
    let r2 = estimate_joint(&s2, &s1, &JointOptions::default()).unwrap();
    assert_eq!(r2.dominance, Some(Dominance::Second));
}

#[test]
fn likelihood_improves_and_swap_symmetry() {
    let c = SketchConfig::new(12, 20).unwrap();
    let opts = JointOptions::default();
    let delta = opts.ml.delta(4096);
    for (i, (a, b, x)) in [(10_000, 10_000, 10_000), (100_000, 1000, 1000), (100, 100, 1000), (1000, 20_000, 50)]
        .into_iter()
        .enumerate()
    {
        let (s1, s2) = pair(c, a, b, x, i as u64);
        let r = estimate_joint(&s1, &s2, &opts).unwrap();
        assert!(r.log_likelihood >= r.initial_log_likelihood, "{r:?}");
        let rs = estimate_joint(&s2, &s1, &opts).unwrap();
        let (e, es) = (r.estimates, rs.estimates.swapped());
        for (u, v) in [(e.lambda_a, es.lambda_a), (e.lambda_b, es.lambda_b), (e.lambda_x, es.lambda_x)] {
            assert!((u.ln() - v.ln()).abs() <= 10.0 * delta, "{e:?} vs {es:?}");
        }
        let union = ml_estimate(&s1.merge(&s2).unwrap().counts(), &opts.ml);
        assert!((e.union() / union - 1.0).abs() < 0.05, "{} vs {union}", e.union());
    }
}

#[test]
fn statistic_round_trip_through_estimate() {
    let c = SketchConfig::new(10, 20).unwrap();
    let (s1, s2) = pair(c, 3000, 1000, 2000, 5);
    let st = JointStatistic::from_sketches(&s1, &s2).unwrap();
    assert_eq!(
        estimate_joint_from_statistic(&st, &JointOptions::default()).unwrap(),
        estimate_joint(&s1, &s2, &JointOptions::default()).unwrap()
    );
}
