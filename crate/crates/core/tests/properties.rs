use aligntilt::bon::{bon_exact_pmf, bon_type_law, BonConfig, PolicyTag, TypeLaw};
use aligntilt::dist::{log_sequence_prob, type_of};
use aligntilt::ldp::{aligned_mean, rate_function, scaled_cumulant};
use aligntilt::metrics::{cross_entropy, entropy, kl_divergence, renyi_cross_entropy};
use aligntilt::tilt::{max_achievable_kl, mismatched_tilt, reward_target_range, solve_alpha_for_kl};
use aligntilt::{CategoricalDistribution, SeedSpec, Sequence};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

fn weights(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    k.prop_flat_map(|k| prop::collection::vec(0.01f64..1.0, k))
}

fn pair(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (CategoricalDistribution, CategoricalDistribution)> {
    k.prop_flat_map(|k| {
        (
            prop::collection::vec(0.01f64..1.0, k),
            prop::collection::vec(0.01f64..1.0, k),
        )
    })
    .prop_map(|(p, q)| {
        (
            CategoricalDistribution::from_weights(&p).unwrap(),
            CategoricalDistribution::from_weights(&q).unwrap(),
        )
    })
}

fn random_simplex<R: Rng>(k: usize, rng: &mut R) -> CategoricalDistribution {
    let w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
    CategoricalDistribution::from_weights(&w).unwrap()
}

fn figure() -> (CategoricalDistribution, CategoricalDistribution) {
    (
        CategoricalDistribution::from_weights(&[0.2, 0.3, 0.5]).unwrap(),
        CategoricalDistribution::from_weights(&[6.0, 1.0, 2.0]).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn type_is_permutation_invariant(mut symbols in prop::collection::vec(0usize..4, 1..30), seed in any::<u64>()) {
        let before = type_of(&Sequence::new(symbols.clone(), 4).unwrap(), 4).unwrap();
        let mut rng = SeedSpec::new(seed).rng();
        for i in (1..symbols.len()).rev() {
            symbols.swap(i, rng.random_range(0..=i));
        }
        let after = type_of(&Sequence::new(symbols, 4).unwrap(), 4).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn sequence_prob_is_count_weighted(w in weights(2..=5), raw in prop::collection::vec(0usize..100, 1..20)) {
        let d = CategoricalDistribution::from_weights(&w).unwrap();
        let k = d.len();
        let seq = Sequence::new(raw.iter().map(|s| s % k).collect(), k).unwrap();
        let tau = type_of(&seq, k).unwrap();
        let direct: f64 = seq.symbols().iter().map(|&y| d.log_prob(y)).sum();
        let by_counts = tau.dot(d.log_probs());
        prop_assert_eq!(log_sequence_prob(&d, &seq).unwrap(), by_counts);
        assert_abs_diff_eq!(direct, by_counts, epsilon = 1e-12);
    }

    #[test]
    fn kl_is_cross_entropy_minus_entropy((p, q) in pair(2..=8)) {
        let kl = kl_divergence(&p, &q).unwrap();
        assert_abs_diff_eq!(kl, cross_entropy(&p, &q).unwrap() - entropy(&p), epsilon = 1e-12);
        prop_assert!(kl >= 0.0);
    }

    #[test]
    fn renyi_is_continuous_at_one((p, q) in pair(3..=3)) {
        let h = cross_entropy(&p, &q).unwrap();
        for t in [1.0 - 1e-4, 1.0 + 1e-4] {
            prop_assert!((renyi_cross_entropy(&p, &q, t).unwrap() - h).abs() < 1e-3);
        }
    }

    #[test]
    fn tilt_kl_and_reward_are_monotone((p, q) in pair(2..=10), a in 0.0f64..5.0, gap in 0.01f64..5.0) {
        prop_assume!(q.probs().iter().any(|x| (x - q.prob(0)).abs() > 1e-6));
        let lo = mismatched_tilt(&q, &p, a).unwrap();
        let hi = mismatched_tilt(&q, &p, a + gap).unwrap();
        prop_assert!(kl_divergence(&hi, &p).unwrap() > kl_divergence(&lo, &p).unwrap());
        prop_assert!(cross_entropy(&hi, &q).unwrap() < cross_entropy(&lo, &q).unwrap());
    }

    #[test]
    fn alpha_round_trips((p, q) in pair(2..=10), frac in 0.0f64..0.99) {
        prop_assume!(q.probs().iter().any(|x| (x - q.prob(0)).abs() > 1e-6));
        let delta = frac * max_achievable_kl(&q, &p).unwrap();
        let sol = solve_alpha_for_kl(&q, &p, delta).unwrap();
        prop_assert!(sol.alpha >= 0.0);
        prop_assert!((kl_divergence(&sol.phi, &p).unwrap() - delta).abs() <= 1e-10);
    }

    #[test]
    fn bon_m2_is_exchangeable_and_normalised((p, q) in pair(2..=4), n in 1u64..20) {
        let law = bon_type_law(&p, &q, 2, &BonConfig::with_n(n).unwrap()).unwrap();
        let k = p.len();
        let joint = law.sequence_pmf().unwrap();
        for a in 0..k {
            for b in 0..k {
                assert_abs_diff_eq!(joint[a * k + b], joint[b * k + a], epsilon = 1e-15);
            }
        }
        prop_assert!((joint.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((law.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bon_kl_within_log_n((p, q) in pair(2..=12), n in 1u64..100_000) {
        let pi = bon_exact_pmf(&p, q.log_probs(), n).unwrap();
        prop_assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(kl_divergence(&pi, &p).unwrap() <= (n as f64).ln() + 1e-9);
    }

    #[test]
    fn bon_sequence_kl_within_log_n((p, q) in pair(2..=3), m in 1u32..7, log_n in 0.0f64..8.0) {
        let law = bon_type_law(&p, &q, m, &BonConfig::with_log_n(log_n).unwrap()).unwrap();
        prop_assert!(law.kl_to_product(&p).unwrap() <= log_n + 1e-9);
    }

    #[test]
    fn rate_is_nonnegative_and_grows_away_from_mean((p, q) in pair(3..=3), frac in 0.0f64..0.9) {
        let (lo, hi) = reward_target_range(&q);
        prop_assume!(hi - lo > 1e-3);
        let delta = frac * max_achievable_kl(&q, &p).unwrap();
        let mean = aligned_mean(&p, &q, delta).unwrap();
        prop_assert!(rate_function(&p, &q, delta, mean).unwrap().rate <= 1e-10);
        // Stay clear of the excluded edges; a side narrower than 1e-3 is
        // too short to resolve strict growth.
        let inset = 1e-5 * (hi - lo);
        for edge in [lo + inset, hi - inset] {
            if (edge - mean).abs() < 1e-3 {
                continue;
            }
            let mut prev = 0.0;
            for i in 1..10 {
                let t = mean + (edge - mean) * i as f64 / 9.0;
                let j = rate_function(&p, &q, delta, t).unwrap().rate;
                prop_assert!(j >= 0.0 && j > prev);
                prev = j;
            }
        }
    }

    #[test]
    fn cumulant_is_continuous_at_zero((p, q) in pair(2..=5), frac in 0.0f64..0.9) {
        let delta = frac * max_achievable_kl(&q, &p).unwrap();
        let at0 = scaled_cumulant(&p, &q, delta, 0.0).unwrap().value;
        let near = scaled_cumulant(&p, &q, delta, 1e-4).unwrap().value;
        prop_assert!((at0 - near).abs() < 1e-3);
    }

    #[test]
    fn rate_reanchors_at_phi((p, q) in pair(3..=5), frac in 0.05f64..0.9, s in 0.05f64..0.95) {
        let delta = frac * max_achievable_kl(&q, &p).unwrap();
        let phi = solve_alpha_for_kl(&q, &p, delta).unwrap().phi;
        let (lo, hi) = reward_target_range(&q);
        let t = lo + s * (hi - lo);
        let from_p = rate_function(&p, &q, delta, t).unwrap().rate;
        let from_phi = rate_function(&phi, &q, 0.0, t).unwrap().rate;
        prop_assert!((from_p - from_phi).abs() < 1e-8 * from_p.abs().max(1.0), "{} vs {}", from_p, from_phi);
    }
}

#[test]
fn optimizer_beats_every_feasible_perturbation() {
    let mut rng = SeedSpec::new(21).rng();
    for k in [3, 10] {
        for _ in 0..5 {
            let p = random_simplex(k, &mut rng);
            let q = random_simplex(k, &mut rng);
            let delta = 0.5 * max_achievable_kl(&q, &p).unwrap();
            let sol = solve_alpha_for_kl(&q, &p, delta).unwrap();
            let h_phi = cross_entropy(&sol.phi, &q).unwrap();
            let mut tested = 0;
            while tested < 200 {
                let target = random_simplex(k, &mut rng);
                let s: f64 = rng.random_range(0.0..1.0);
                let w: Vec<f64> = sol
                    .phi
                    .probs()
                    .iter()
                    .zip(target.probs())
                    .map(|(a, b)| (1.0 - s) * a + s * b)
                    .collect();
                let psi = CategoricalDistribution::from_weights(&w).unwrap();
                if kl_divergence(&psi, &p).unwrap() > delta {
                    continue;
                }
                assert!(cross_entropy(&psi, &q).unwrap() >= h_phi - 1e-9);
                tested += 1;
            }
        }
    }
}

#[test]
fn cross_entropy_is_additive_over_products() {
    let (p, q) = figure();
    let h = cross_entropy(&p, &q).unwrap();
    for m in 1..=6 {
        let law = TypeLaw::product(&p, m, PolicyTag::Reference).unwrap();
        let neg_log_q: Vec<f64> = q.log_probs().iter().map(|l| -l).collect();
        assert_abs_diff_eq!(law.expected_additive(&neg_log_q), m as f64 * h, epsilon = 1e-12);
    }
}

#[test]
fn bon_type_and_reward_converge() {
    let p = CategoricalDistribution::from_weights(&[0.2, 0.3, 0.5]).unwrap();
    let q = CategoricalDistribution::from_weights(&[6.0, 1.0, 2.0]).unwrap();
    let delta = 0.11;
    let sol = solve_alpha_for_kl(&q, &p, delta).unwrap();
    let optimal = -cross_entropy(&sol.phi, &q).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for m in [5u32, 10, 20, 40, 80] {
        let law = bon_type_law(&p, &q, m, &BonConfig::with_log_n(m as f64 * delta).unwrap()).unwrap();
        let l1: f64 = law
            .expected_type()
            .iter()
            .zip(sol.phi.probs())
            .map(|(a, b)| (a - b).abs())
            .sum();
        let gap = (law.expected_additive(q.log_probs()) / m as f64 - optimal).abs();
        assert!(l1 < last.0 && gap < last.1, "m = {m}: {l1} {gap}");
        last = (l1, gap);
    }
}
