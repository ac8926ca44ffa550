//! Shared fixtures and brute-force reference implementations for the
//! integration tests. Nothing here calls into the folding code it checks.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use phasefold_core::ingest::RawTimeSeries;
use phasefold_core::EventSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const HOUR: f64 = 3600.0;
pub const DAY: f64 = 86_400.0;
pub const YEAR: f64 = 365.25 * DAY;

/// Fractional position of `t` in its period via `floor`, a different route
/// than the remainder used by the library.
pub fn naive_fraction(t: f64, tau: f64, t0: f64) -> f64 {
    let x = (t - t0) / tau;
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

pub fn naive_counts(events: &[f64], t0: f64, tau: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    for &t in events {
        let mut b = (naive_fraction(t, tau, t0) * bins as f64).floor() as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
    }
    counts
}

/// `H = −Σ p log2 p` by direct summation, plus `1 − H / log2 N`.
pub fn naive_entropy(counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.ln() / 2f64.ln();
        }
    }
    let interest = 1.0 - h / (counts.len() as f64).ln() * 2f64.ln();
    (h, interest.clamp(0.0, 1.0))
}

/// Length of the mean of unit vectors, summing cosines and sines separately.
pub fn naive_vector_strength(events: &[f64], t0: f64, tau: f64) -> f64 {
    let n = events.len() as f64;
    let cx: f64 = events
        .iter()
        .map(|&t| (2.0 * PI * naive_fraction(t, tau, t0)).cos())
        .sum::<f64>()
        / n;
    let sy: f64 = events
        .iter()
        .map(|&t| (2.0 * PI * naive_fraction(t, tau, t0)).sin())
        .sum::<f64>()
        / n;
    (cx * cx + sy * sy).sqrt()
}

/// Events at `0, P, 2P, …`, extent `[0, count·P]`.
pub fn delta_train(period: f64, count: usize) -> EventSeries {
    let events = (0..count).map(|k| k as f64 * period).collect();
    EventSeries::new(events, 0.0, period * count as f64).unwrap()
}

/// Hourly train over 30 days with Gaussian phase jitter (σ = 0.05·P) and
/// 10 % extra uniform background events.
pub fn noisy_hourly_train(seed: u64) -> EventSeries {
    let period = HOUR;
    let extent = 30.0 * DAY;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.05 * period).unwrap();
    let cycles = (extent / period) as usize;
    let mut events: Vec<f64> = (0..cycles)
        .map(|k| k as f64 * period + jitter.sample(&mut rng))
        .collect();
    for _ in 0..cycles / 10 {
        events.push(rng.random_range(0.0..extent));
    }
    events.retain(|t| (0.0..=extent).contains(t));
    events.sort_by(f64::total_cmp);
    EventSeries::new(events, 0.0, extent).unwrap()
}

/// `sin(2πt / 12.4206 h) · (1 + 0.5·cos(2πt / 13.661 d))` sampled hourly for 10 years.
pub fn tide_like_raw() -> RawTimeSeries {
    let samples = (10.0 * YEAR / HOUR) as usize;
    let timestamps: Vec<f64> = (0..samples).map(|i| i as f64 * HOUR).collect();
    let level: Vec<f64> = timestamps
        .iter()
        .map(|&t| {
            (2.0 * PI * t / (12.4206 * HOUR)).sin()
                * (1.0 + 0.5 * (2.0 * PI * t / (13.661 * DAY)).cos())
        })
        .collect();
    let mut cols = BTreeMap::new();
    cols.insert("level".to_string(), level);
    RawTimeSeries::new("tide-like", "synthetic", timestamps, cols).unwrap()
}

/// 5060 events over 118 years: a 13.66 d pattern with jitter plus noise.
pub fn long_series_5060(seed: u64) -> EventSeries {
    let extent = 118.0 * YEAR;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.5 * DAY).unwrap();
    let period = 13.66 * DAY;
    let mut events = Vec::with_capacity(5060);
    while events.len() < 5060 {
        let t = if rng.random_bool(0.6) {
            let k = rng.random_range(0..(extent / period) as u64);
            k as f64 * period + jitter.sample(&mut rng)
        } else {
            rng.random_range(0.0..extent)
        };
        if (0.0..=extent).contains(&t) {
            events.push(t);
        }
    }
    events.sort_by(f64::total_cmp);
    EventSeries::new(events, 0.0, extent).unwrap()
}

/// Uniformly random series of `n` events that starts at `t0`.
pub fn random_series(rng: &mut impl Rng, n: usize) -> EventSeries {
    let t0 = rng.random_range(-1e4..1e4);
    let extent = rng.random_range(1.0..1e5);
    let mut events: Vec<f64> = (0..n).map(|_| t0 + rng.random_range(0.0..extent)).collect();
    events.sort_by(f64::total_cmp);
    EventSeries::new(events, t0, t0 + extent).unwrap()
}
