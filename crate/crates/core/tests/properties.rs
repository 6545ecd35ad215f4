//! Randomized invariant checks over the core algorithms.

use proptest::prelude::*;

use gyrodial::{
    find_top_peaks, gaussian_smooth, improvement_factor, integrate_displacement,
    key_to_transitions, monte_carlo_topr, paired_t_test, rank_keys_exhaustive, rank_keys_lazy,
    success_at_r, transitions_to_key, AttackProfile, CombinationKey, DisplacementFeatures,
    GyroTrace, KeySet, KeySetProvenance, KeySpace, LockSpec, TransitionVector,
};

fn specs() -> impl Strategy<Value = LockSpec> {
    prop_oneof![Just(LockSpec::padlock()), Just(LockSpec::safe())]
}

/// Raw entropy that tests fold into per-phase ranges themselves, so one
/// strategy serves both lock layouts.
fn raw_digits() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..1_000_000, 4)
}

fn key_from_raw(raw: &[u32], spec: &LockSpec) -> CombinationKey {
    CombinationKey::new(
        raw.iter()
            .take(spec.phase_count())
            .map(|r| r % spec.dial_size)
            .collect(),
    )
}

fn transitions_from_raw(raw: &[u32], spec: &LockSpec) -> TransitionVector {
    TransitionVector::new(
        spec.phases
            .iter()
            .zip(raw)
            .map(|(ph, r)| ph.transition_min + r % ph.width())
            .collect(),
    )
}

/// Score values on a 1/8 grid so sums and shifts are exact in doubles and
/// order comparisons cannot be perturbed by rounding.
fn dyadic_scores(phase_widths: &[usize]) -> impl Strategy<Value = Vec<Vec<f64>>> {
    let per_phase: Vec<_> = phase_widths
        .iter()
        .map(|&w| prop::collection::vec((-8000i32..8000).prop_map(|v| v as f64 / 8.0), w))
        .collect();
    per_phase
}

fn trace_from_samples(x: Vec<f64>, rate: f64) -> GyroTrace {
    let t = (0..x.len()).map(|i| i as f64 / rate).collect();
    GyroTrace {
        sample_rate_hz: rate,
        t,
        x,
        y: vec![],
        z: vec![],
    }
}

proptest! {
    #[test]
    fn key_to_transitions_round_trips(spec in specs(), raw in raw_digits(), start_raw in 0u32..1_000_000) {
        let start = start_raw % spec.dial_size;
        let key = key_from_raw(&raw, &spec);
        let tv = key_to_transitions(&key, start, &spec).unwrap();
        tv.validate(&spec).unwrap();
        let back = transitions_to_key(&tv, start, &spec).unwrap();
        prop_assert_eq!(back, key);
    }

    #[test]
    fn transitions_to_key_round_trips(spec in specs(), raw in raw_digits(), start_raw in 0u32..1_000_000) {
        let start = start_raw % spec.dial_size;
        let tv = transitions_from_raw(&raw, &spec);
        let key = transitions_to_key(&tv, start, &spec).unwrap();
        key.validate(&spec).unwrap();
        let back = key_to_transitions(&key, start, &spec).unwrap();
        prop_assert_eq!(back, tv);
    }

    #[test]
    fn combination_length_stays_within_phase_bounds(spec in specs(), raw in raw_digits(), start_raw in 0u32..1_000_000) {
        let start = start_raw % spec.dial_size;
        let key = key_from_raw(&raw, &spec);
        let len = gyrodial::combination_length(&key, start, &spec).unwrap();
        let lo: u32 = spec.phases.iter().map(|p| p.transition_min).sum();
        let hi: u32 = spec.phases.iter().map(|p| p.transition_max).sum();
        prop_assert!((lo..=hi).contains(&len));
    }

    #[test]
    fn displacement_feature_identities(pos in 0.0f64..1e3, neg in -1e3f64..0.0) {
        let f = DisplacementFeatures::from_pos_neg(pos, neg);
        prop_assert_eq!(f.summed, pos + neg);
        prop_assert_eq!(f.total, pos - neg);
        prop_assert!(f.total >= f.summed.abs() - 1e-12);
    }

    #[test]
    fn integration_is_additive_across_a_shared_boundary(
        x in prop::collection::vec(-10.0f64..10.0, 5..200),
        split_raw in 1usize..1000,
    ) {
        let n = x.len();
        let k = 1 + split_raw % (n - 2);
        let trace = trace_from_samples(x, 50.0);
        let whole = integrate_displacement(&trace, 0..n);
        let left = integrate_displacement(&trace, 0..k + 1);
        let right = integrate_displacement(&trace, k..n);
        prop_assert!((whole.pos - (left.pos + right.pos)).abs() < 1e-9);
        prop_assert!((whole.neg - (left.neg + right.neg)).abs() < 1e-9);
        prop_assert!((whole.summed - (left.summed + right.summed)).abs() < 1e-9);
        prop_assert!((whole.total - (left.total + right.total)).abs() < 1e-9);
    }

    #[test]
    fn smoothing_preserves_constants(c in -50.0f64..50.0, n in 1usize..100, half in 1usize..15) {
        let window = 2 * half + 1;
        let smoothed = gaussian_smooth(&vec![c; n], window).unwrap();
        for v in smoothed {
            prop_assert!((v - c).abs() < 1e-9);
        }
    }

    #[test]
    fn smoothing_never_leaves_the_input_range(
        x in prop::collection::vec(-50.0f64..50.0, 1..150),
        half in 1usize..15,
    ) {
        let window = 2 * half + 1;
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in gaussian_smooth(&x, window).unwrap() {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }

    #[test]
    fn peaks_are_separated_interior_local_maxima(
        x in prop::collection::vec(-10.0f64..10.0, 10..200),
        k in 1usize..4,
        min_sep in 1usize..20,
    ) {
        let n = x.len();
        if let Ok(peaks) = find_top_peaks(&x, k, min_sep) {
            prop_assert_eq!(peaks.len(), k);
            for &p in &peaks {
                prop_assert!(p > 0 && p + 1 < n);
                prop_assert!(x[p] >= x[p - 1] && x[p] >= x[p + 1]);
            }
            for a in &peaks {
                for b in &peaks {
                    if a != b {
                        prop_assert!(a.abs_diff(*b) >= min_sep);
                    }
                }
            }
            prop_assert_eq!(&find_top_peaks(&x, k, min_sep).unwrap(), &peaks);
        }
    }

    #[test]
    fn success_rate_is_monotone_in_r(
        ranks_raw in prop::collection::vec(prop::option::of(1usize..500), 1..80),
        r1 in 1usize..400,
        extra in 1usize..100,
    ) {
        let r2 = r1 + extra;
        let s1 = success_at_r(&ranks_raw, r1).unwrap();
        let s2 = success_at_r(&ranks_raw, r2).unwrap();
        prop_assert!(s1 <= s2);
    }

    #[test]
    fn t_test_is_antisymmetric(
        a in prop::collection::vec(-100.0f64..100.0, 3..30),
        b_seed in prop::collection::vec(-100.0f64..100.0, 30),
    ) {
        let b: Vec<f64> = a.iter().zip(&b_seed).map(|(x, d)| x + d).collect();
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        prop_assume!(diffs.iter().any(|d| (d - diffs[0]).abs() > 1e-9));
        let (t_ab, p_ab) = paired_t_test(&a, &b).unwrap();
        let (t_ba, p_ba) = paired_t_test(&b, &a).unwrap();
        prop_assert!((t_ab + t_ba).abs() < 1e-9);
        prop_assert!((p_ab - p_ba).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ranking_order_survives_per_phase_score_shifts(
        scores in dyadic_scores(&[40, 40, 40]),
        shifts in prop::collection::vec((-4000i32..4000).prop_map(|v| v as f64 / 8.0), 3),
    ) {
        let profile = AttackProfile::padlock_reference();
        let space = KeySpace::Grid { step: 7 };
        let base = rank_keys_exhaustive(&scores, space, &profile).unwrap();
        let shifted_scores: Vec<Vec<f64>> = scores
            .iter()
            .zip(&shifts)
            .map(|(s, c)| s.iter().map(|v| v + c).collect())
            .collect();
        let shifted = rank_keys_exhaustive(&shifted_scores, space, &profile).unwrap();
        let base_keys: Vec<_> = base.entries.iter().map(|(k, _)| k.clone()).collect();
        let shifted_keys: Vec<_> = shifted.entries.iter().map(|(k, _)| k.clone()).collect();
        prop_assert_eq!(base_keys, shifted_keys);
        let total_shift: f64 = shifts.iter().sum();
        for (b, s) in base.entries.iter().zip(&shifted.entries) {
            prop_assert_eq!(b.1 + total_shift, s.1);
        }
    }

    #[test]
    fn lazy_ranking_is_a_prefix_of_exhaustive(
        scores in dyadic_scores(&[40, 40, 40]),
        r_raw in 1usize..10_000,
    ) {
        let profile = AttackProfile::padlock_reference();
        let space = KeySpace::Grid { step: 5 };
        let size = space.size(&profile.spec).unwrap() as usize;
        let r = 1 + r_raw % size;
        let full = rank_keys_exhaustive(&scores, space, &profile).unwrap();
        let lazy = rank_keys_lazy(&scores, space, r, &profile).unwrap();
        prop_assert_eq!(lazy.entries.len(), r);
        prop_assert_eq!(lazy.key_space_size, full.key_space_size);
        prop_assert_eq!(&lazy.entries[..], &full.entries[..r]);
    }

    #[test]
    fn set_ranking_stays_inside_the_set(
        scores in dyadic_scores(&[40, 40, 40]),
        raw_keys in prop::collection::vec((0u32..40, 0u32..40, 0u32..40), 1..60),
    ) {
        let profile = AttackProfile::padlock_reference();
        let keys: Vec<CombinationKey> = raw_keys
            .into_iter()
            .map(|(a, b, c)| CombinationKey::new(vec![a, b, c]))
            .collect();
        let set = KeySet::new(keys, KeySetProvenance::File);
        let ranked = rank_keys_exhaustive(&scores, KeySpace::Set(&set), &profile).unwrap();
        prop_assert_eq!(ranked.entries.len(), set.len());
        prop_assert_eq!(ranked.key_space_size, set.len() as u64);
        let mut seen = std::collections::HashSet::new();
        for window in ranked.entries.windows(2) {
            prop_assert!(window[0].1 >= window[1].1, "scores must be descending");
        }
        for (key, _) in &ranked.entries {
            prop_assert!(set.contains(key));
            prop_assert!(seen.insert(key.clone()), "duplicate key in ranking");
        }
    }

    #[test]
    fn grid_ranking_only_emits_grid_keys(
        scores in dyadic_scores(&[40, 40, 40]),
        step in 3u32..10,
        r_raw in 1usize..500,
    ) {
        let profile = AttackProfile::padlock_reference();
        let space = KeySpace::Grid { step };
        let size = space.size(&profile.spec).unwrap() as usize;
        let r = 1 + r_raw % size;
        let ranked = rank_keys_lazy(&scores, space, r, &profile).unwrap();
        for (key, _) in &ranked.entries {
            let tv = key_to_transitions(key, profile.start, &profile.spec).unwrap();
            for theta in tv.theta {
                prop_assert_eq!(theta % step, 0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curves_report_the_improvement_identity(seed in any::<u64>()) {
        let spec = LockSpec::padlock();
        let sigma = [3.0, 3.0, 3.0];
        let r_list = [1usize, 2, 4, 8, 16, 32];
        let curve = monte_carlo_topr(&spec, &sigma, KeySpace::Grid { step: 10 }, 60, &r_list, seed)
            .unwrap();
        prop_assert_eq!(curve.points.len(), r_list.len());
        let mut prev = 0.0;
        for pt in &curve.points {
            let expected = improvement_factor(pt.success_rate, pt.r, curve.key_space_size).unwrap();
            prop_assert_eq!(pt.improvement_factor, expected);
            prop_assert!(pt.success_rate >= prev, "success must not drop as r grows");
            prev = pt.success_rate;
        }
    }
}
