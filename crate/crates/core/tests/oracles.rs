mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use phasefold_core::guidance::{candidate_factors, suggest, Rational, SuggestOptions};
use phasefold_core::{
    analyze_period, build_ladder, build_phase_histogram, detail_matrix, precompute_grid,
    resultant_of_phases, shannon_entropy, BinAggregation, EventSeries, Measure, PeriodLength,
    PhaseHistogram,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn tau(s: f64) -> PeriodLength {
    PeriodLength::new(s).unwrap()
}

#[test]
fn hand_folded_counts() {
    let s = EventSeries::new(vec![0.0, 0.5, 1.2, 2.7, 3.9], 0.0, 4.0).unwrap();
    let h = build_phase_histogram(&s, tau(4.0), 4, &BinAggregation::Count).unwrap();
    assert_eq!(h.counts(), &[2, 1, 1, 1]);
    assert_eq!(naive_counts(s.events(), 0.0, 4.0, 4), vec![2, 1, 1, 1]);
}

#[test]
fn entropy_of_two_one_one_zero() {
    let e = shannon_entropy(&PhaseHistogram::from_counts(vec![2, 1, 1, 0]).unwrap());
    assert!((e.bits - 1.5).abs() < 1e-12);
    assert!((e.interest - 0.25).abs() < 1e-12);
}

#[test]
fn resultant_of_two_quarter_apart() {
    let r = resultant_of_phases([0.0, FRAC_PI_2]);
    assert!((r.strength - SQRT_2 / 2.0).abs() < 1e-12);
    assert!((r.direction - FRAC_PI_4).abs() < 1e-12);
}

#[test]
fn attribute_mean_and_variance_bins() {
    let s = EventSeries::new(vec![0.0, 1.0, 5.0, 6.0], 0.0, 8.0)
        .unwrap()
        .with_attribute("x", vec![1.0, 3.0, 10.0, 20.0])
        .unwrap();
    let mean = build_phase_histogram(&s, tau(4.0), 2, &BinAggregation::Mean("x".into())).unwrap();
    // t = 0, 1, 5 land in the first half of the period, t = 6 in the second
    assert!((mean.bins()[0].unwrap() - 14.0 / 3.0).abs() < 1e-12);
    assert_eq!(mean.bins()[1], Some(20.0));
    let var =
        build_phase_histogram(&s, tau(4.0), 2, &BinAggregation::Variance("x".into())).unwrap();
    let m: f64 = 14.0 / 3.0;
    let expected = ((1.0f64 - m).powi(2) + (3.0f64 - m).powi(2) + (10.0f64 - m).powi(2)) / 3.0;
    assert!((var.bins()[0].unwrap() - expected).abs() < 1e-12);
    assert_eq!(var.bins()[1], Some(0.0));
    let sparse = build_phase_histogram(&s, tau(8.0), 4, &BinAggregation::Mean("x".into())).unwrap();
    assert_eq!(sparse.bins()[1], None);
}

#[test]
fn detail_rows_by_hand() {
    let s = EventSeries::new(vec![0.5, 1.5, 2.5, 4.5, 9.0], 0.0, 9.0).unwrap();
    let d = detail_matrix(&s, tau(3.0), 3, &BinAggregation::Count, 100).unwrap();
    assert_eq!(d.row_count(), 3);
    assert_eq!(d.counts, vec![vec![1, 1, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    assert_eq!(d.column_counts(), vec![2, 2, 1]);
}

#[test]
fn factor_sets_by_enumeration() {
    for (n_max, m_max) in [(2, 2), (3, 3), (5, 4), (7, 6)] {
        let mut brute: Vec<(u32, u32)> = Vec::new();
        for n in 2..=n_max {
            for k in 1..2 * n {
                brute.push((k, n));
            }
        }
        for m in 2..=m_max {
            brute.push((m, 1));
        }
        let mut values: Vec<f64> = brute
            .iter()
            .map(|&(k, n)| k as f64 / n as f64)
            .filter(|v| (v - 1.0).abs() > 1e-12)
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let got: Vec<f64> = candidate_factors(n_max, m_max)
            .unwrap()
            .factors()
            .iter()
            .map(|f| f.value())
            .collect();
        assert_eq!(got, values, "n_max {n_max}, m_max {m_max}");
    }
    assert_eq!(candidate_factors(5, 4).unwrap().len(), 21);
}

#[test]
fn delta_train_top_ticks_match_brute_force() {
    let s = delta_train(HOUR, 48);
    let ladder = build_ladder(s.extent(), 60.0).unwrap();
    let grid = precompute_grid(&s, &ladder, 25, &BinAggregation::Count).unwrap();
    let mut brute: Vec<(f64, f64)> = ladder
        .samples()
        .iter()
        .map(|&t| (t, naive_vector_strength(s.events(), s.t_start(), t)))
        .collect();
    brute.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    let ticks = grid.top_ticks(Measure::VectorStrength, 5);
    assert_eq!(ticks.len(), 5);
    for (tick, (t, r)) in ticks.iter().zip(&brute) {
        assert!(
            (tick.score - r).abs() < 1e-9,
            "{} vs {r} at {t}",
            tick.score
        );
    }
    // every ladder divisor of an hour also folds the train perfectly
    assert!(ticks
        .iter()
        .all(|t| (t.score - 1.0).abs() < 1e-9 && (HOUR / t.tau).fract().abs() < 1e-9));
}

#[test]
fn random_grid_rows_match_direct_recompute() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let s = random_series(&mut rng, 150);
    let ladder = build_ladder(s.extent(), s.extent() / 500.0).unwrap();
    let grid = precompute_grid(&s, &ladder, 20, &BinAggregation::Count).unwrap();
    for _ in 0..20 {
        let row = &grid.rows()[rng.random_range(0..grid.len())];
        let t = row.tau.seconds();
        assert_eq!(
            row.histogram.counts(),
            naive_counts(s.events(), s.t_start(), t, 20).as_slice()
        );
        let (h, interest) = naive_entropy(row.histogram.counts());
        assert!((row.measures.entropy_bits - h).abs() < 1e-9);
        assert!((row.measures.entropy_interest - interest).abs() < 1e-9);
        let r = naive_vector_strength(s.events(), s.t_start(), t);
        assert!((row.measures.vector_strength - r).abs() < 1e-9);
    }
}

#[test]
fn suggestions_are_deterministic_and_ranked() {
    let s = noisy_hourly_train(9);
    let opts = SuggestOptions {
        max_count: 50,
        ..SuggestOptions::default()
    };
    let current = tau(5.0 * HOUR);
    let a = suggest(&s, current, &opts).unwrap();
    let b = suggest(&s, current, &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].score >= w[1].score));
    for sug in &a {
        assert!((sug.tau.seconds() - current.seconds() * sug.factor.value()).abs() < 1e-9);
        let r = naive_vector_strength(s.events(), s.t_start(), sug.tau.seconds());
        assert!((sug.score - r).abs() < 1e-9);
    }
    let fifth = a
        .iter()
        .find(|x| x.factor == Rational::new(1, 5).unwrap())
        .unwrap();
    assert!((fifth.tau.seconds() - HOUR).abs() < 1e-9);
}

#[test]
fn suggestions_respect_bounds_and_count() {
    let s = noisy_hourly_train(3);
    let near_top = tau(s.extent() * 0.6);
    let out = suggest(
        &s,
        near_top,
        &SuggestOptions {
            max_count: 100,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out
        .iter()
        .all(|x| x.tau.seconds() <= s.extent() && x.tau.seconds() >= 60.0));
    assert!(out.iter().all(|x| x.factor.value() < 1.0 / 0.6 + 1e-12));
    let three = suggest(
        &s,
        tau(2.0 * HOUR),
        &SuggestOptions {
            max_count: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(three.len(), 3);
}

#[test]
fn entropy_guidance_at_true_period_prefers_staying() {
    // at P itself no candidate should improve on the true period by VS
    let s = noisy_hourly_train(11);
    let (_, here) = analyze_period(&s, tau(HOUR), 25, &BinAggregation::Count).unwrap();
    let out = suggest(
        &s,
        tau(HOUR),
        &SuggestOptions {
            max_count: 100,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(out.iter().all(|x| x.score <= here.vector_strength + 1e-12));
}
