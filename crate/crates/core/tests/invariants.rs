use fkest::estimator::{forbidden_family, quantized_signatures};
use fkest::graph::fixtures::{complete, complete_bipartite, gnp, random_equipartition};
use fkest::graph::{canonical_equipartition, edit_count};
use fkest::rng::seeded;
use fkest::rounding::flip_probabilities;
use fkest::signature::{grid_levels, property_grid_size, GridMode};
use fkest::{
    d1, dist_oracle, estimate_hereditary, fk_irregularity, fk_star_irregularity, randomized_round, run_suite,
    zero_signature, EstimatorParams, Graph, PartitionOracle, PartitionProperty, PropertySpec, SampledOracle, Scenario,
    Signature, SuiteConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let m = n * (n - 1) / 2;
        (0..1u64 << m).prop_map(move |mask| Graph::from_pair_mask(n, mask))
    })
}

fn signature_strategy(t: usize) -> impl Strategy<Value = Signature> {
    prop::collection::vec(0.0..=1.0f64, t * (t - 1) / 2).prop_map(move |eta| Signature::new(t, eta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equipartition_parts_are_balanced(n in 1usize..40, t in 1usize..8, seed: u64) {
        prop_assume!(t <= n);
        let a = random_equipartition(n, t, &mut seeded(seed));
        let sizes = a.sizes();
        prop_assert!(sizes.iter().all(|&s| s > 0));
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
    }

    #[test]
    fn d1_is_a_bounded_symmetric_metric(a in signature_strategy(4), b in signature_strategy(4), c in signature_strategy(4)) {
        let (ab, ba) = (d1(&a, &b).unwrap(), d1(&b, &a).unwrap());
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=0.5).contains(&ab));
        prop_assert_eq!(d1(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= d1(&a, &c).unwrap() + d1(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn flip_probabilities_hit_the_target_in_expectation(d in 0.0..=1.0f64, eta in 0.0..=1.0f64) {
        let (rm, add) = flip_probabilities(d, eta);
        prop_assert!((0.0..=1.0).contains(&rm) && (0.0..=1.0).contains(&add));
        prop_assert!(rm == 0.0 || add == 0.0);
        prop_assert!((d * (1.0 - rm) + (1.0 - d) * add - eta).abs() < 1e-12);
    }

    #[test]
    fn rounding_only_touches_cross_pairs(g in graph_strategy(9), target in signature_strategy(3), seed: u64) {
        prop_assume!(g.n() >= 3);
        let a = canonical_equipartition(g.n(), 3).unwrap();
        let r = randomized_round(&g, &a, &target, seed).unwrap();
        prop_assert_eq!(r.edits, edit_count(&g, &r.result).unwrap());
        prop_assert_eq!(&r.realized, &zero_signature(&r.result, &a));
        for u in 0..g.n() {
            for v in u + 1..g.n() {
                if a.part_of(u) == a.part_of(v) {
                    prop_assert_eq!(g.has_edge(u, v), r.result.has_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn oracle_distance_is_zero_on_members_and_one_lipschitz(g in graph_strategy(6), u in 0usize..6, v in 0usize..6) {
        let n = g.n();
        prop_assume!(u < n && v < n && u != v);
        for p in [PropertySpec::triangle_free(), PropertySpec::bipartite(), PropertySpec::p4_free()] {
            let d = dist_oracle(&g, &p).unwrap();
            prop_assert_eq!(d == 0.0, p.holds(&g));
            let mut h = g.clone();
            h.toggle_edge(u, v);
            prop_assert!((dist_oracle(&h, &p).unwrap() - d).abs() <= 1.0 / (n * n) as f64 + 1e-15);
        }
    }

    #[test]
    fn close_verdicts_carry_valid_witnesses(s in signature_strategy(2), alpha in 0.1..=0.5f64, eps_frac in 0.1..=1.0f64) {
        let params = EstimatorParams {
            alpha,
            eps: alpha * eps_frac,
            delta: 0.1,
            beta: 0.25,
            cap: 3,
            gamma: 0.25,
            removal_m: 3,
            removal_delta: 0.1,
            removal_n0: 0,
        };
        let family = forbidden_family(&PropertySpec::triangle_free(), 3).unwrap();
        let v = estimate_hereditary(&s, &family, &params).unwrap();
        match &v.witness {
            Some(w) => {
                prop_assert!(v.is_close());
                prop_assert!(w.d1 <= params.threshold() + 1e-12);
                prop_assert!((d1(&w.extension, &w.certificate).unwrap() - w.d1).abs() < 1e-12);
                prop_assert!(quantized_signatures(w.certificate.t(), 0.25).unwrap().any(|c| c == w.certificate));
            }
            None => prop_assert!(!v.is_close()),
        }
    }
}

/// A partition that is exactly γ-regular (γ its starred irregularity) stays
/// within 6γ of regular after rounding in at least 90% of runs.
#[test]
fn rounding_transfers_regularity() {
    let mut rng = seeded(61);
    let (mut ok, mut total) = (0, 0);
    for k in 0..20 {
        let n = 9 + k % 4;
        let g = gnp(n, rng.gen_range(0.2..0.8), &mut rng);
        let a = canonical_equipartition(n, 3).unwrap();
        let star = fk_star_irregularity(&g, &a).unwrap();
        assert!(star.exact);
        let gamma = star.value.max(1e-3);
        let target = Signature::new(3, (0..3).map(|_| rng.gen()).collect()).unwrap();
        for seed in 0..10 {
            let r = randomized_round(&g, &a, &target, seed).unwrap();
            let after = fk_irregularity(&r.result, &a).unwrap();
            assert!(after.exact);
            total += 1;
            ok += (after.value <= 6.0 * gamma + 1e-12) as usize;
        }
    }
    assert!(ok * 10 >= total * 9, "{ok}/{total} runs within 6γ");
}

/// Majority amplification keeps per-property error below 1/(3b).
#[test]
fn sampled_oracle_calibration() {
    let (mu, s, q_prime) = (0.25, 2, 8);
    let b = property_grid_size(s, grid_levels(mu).unwrap(), GridMode::Slab) as usize;
    let reps = SampledOracle::default_reps(b);
    // K_{20,20} matches full cross density exactly; K_40 is μ-far from an empty cross block
    let close = (complete_bipartite(20, 20), PartitionProperty::new(s, vec![1.0], vec![1.0]).unwrap(), true);
    let far = (complete(40), PartitionProperty::new(s, vec![0.0], vec![0.0]).unwrap(), false);
    for (g, pi, expect) in [close, far] {
        let errors = (0..1000u64)
            .filter(|&seed| {
                let mut o = SampledOracle::new(mu, q_prime, reps, seed).unwrap();
                o.accepts(&g, &pi).unwrap() != expect
            })
            .count();
        assert!((errors as f64 / 1000.0) < 1.0 / (3.0 * b as f64), "{errors}/1000 errors with b = {b}");
    }
}

#[test]
fn suite_records_are_determined_by_the_seed() {
    for scenario in [Scenario::RoundingStats, Scenario::EstimateVsOracle, Scenario::TesterPower] {
        let config = SuiteConfig {
            scenario,
            seed: 17,
            instances: Some(4),
        };
        let strip = |mut v: Vec<fkest::ExperimentRecord>| {
            v.iter_mut().for_each(|r| r.wall_ms = 0.0);
            v
        };
        let a = strip(run_suite(&config).unwrap());
        let b = strip(run_suite(&config).unwrap());
        assert_eq!(a, b, "{}", scenario.name());
        let other = strip(run_suite(&SuiteConfig { seed: 18, ..config }).unwrap());
        assert_ne!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), other.iter().map(|r| r.seed).collect::<Vec<_>>());
    }
}
