//! Spin and unlock-event detection on continuous gyroscope streams.
//!
//! A "spin" is one release-and-regrab wrist motion during dial entry. Windows
//! are classified as spins when all four displacement features fall within
//! one standard deviation of learned means; enough spin windows close
//! together form an unlock event.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{integrate_displacement, DisplacementFeatures, GyroTrace};

/// Mean and standard deviation of one displacement feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: f64,
    pub sigma: f64,
}

impl FeatureStats {
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.sigma
    }
}

/// Learned window statistics plus the detection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinProfile {
    pub pos: FeatureStats,
    pub neg: FeatureStats,
    pub summed: FeatureStats,
    pub total: FeatureStats,
    /// Classification window length; spins span at most about 5 s.
    pub window_seconds: f64,
    pub stride_seconds: f64,
    /// Minimum spin windows for an unlock event (5 for the padlock; 9 for
    /// the safe, scaled by its longer minimum total traversal).
    pub min_spins: usize,
    /// Maximum span of one unlock attempt.
    pub event_window_seconds: f64,
}

impl SpinProfile {
    pub fn is_spin(&self, f: &DisplacementFeatures) -> bool {
        self.pos.contains(f.pos)
            && self.neg.contains(f.neg)
            && self.summed.contains(f.summed)
            && self.total.contains(f.total)
    }
}

/// A window (or merged run of windows) classified as spinning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinWindow {
    pub start_t: f64,
    pub end_t: f64,
}

/// A detected unlock attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnlockEvent {
    pub start_t: f64,
    pub end_t: f64,
    pub spin_count: usize,
}

fn window_features(trace: &GyroTrace, start_t: f64, end_t: f64) -> DisplacementFeatures {
    let a = trace.index_at(start_t);
    let b = trace.t.partition_point(|&t| t <= end_t);
    integrate_displacement(trace, a..b)
}

/// Full stride-aligned windows of `[start, end]`; if the interval is shorter
/// than one window it is used whole.
fn stride_windows(start: f64, end: f64, window: f64, stride: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut w = start;
    while w + window <= end + 1e-9 {
        out.push((w, w + window));
        w += stride;
    }
    if out.is_empty() && end > start {
        out.push((start, end));
    }
    out
}

fn mean_sigma(values: &[f64]) -> FeatureStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sigma = if n < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    FeatureStats { mean, sigma }
}

/// Learns per-feature window statistics from labeled unlock intervals.
pub fn learn_spin_profile(
    labeled: &[(&GyroTrace, &[(f64, f64)])],
    window_seconds: f64,
    stride_seconds: f64,
    min_spins: usize,
    event_window_seconds: f64,
) -> Result<SpinProfile> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut summed = Vec::new();
    let mut total = Vec::new();
    for (trace, intervals) in labeled {
        for &(s, e) in *intervals {
            for (ws, we) in stride_windows(s, e, window_seconds, stride_seconds) {
                let f = window_features(trace, ws, we);
                pos.push(f.pos);
                neg.push(f.neg);
                summed.push(f.summed);
                total.push(f.total);
            }
        }
    }
    if pos.is_empty() {
        return Err(Error::Training("no labeled unlock intervals".into()));
    }
    if pos.len() == 1 {
        log::warn!("spin profile learned from a single window; deviations degenerate to zero");
    }
    Ok(SpinProfile {
        pos: mean_sigma(&pos),
        neg: mean_sigma(&neg),
        summed: mean_sigma(&summed),
        total: mean_sigma(&total),
        window_seconds,
        stride_seconds,
        min_spins,
        event_window_seconds,
    })
}

/// Every stride-aligned window whose four features all fall within one
/// standard deviation of the profile means. These are the raw spin counts
/// used by event detection.
pub fn flag_spin_windows(trace: &GyroTrace, profile: &SpinProfile) -> Vec<SpinWindow> {
    let Some(&t0) = trace.t.first() else {
        return Vec::new();
    };
    let end = *trace.t.last().unwrap();
    stride_windows(t0, end, profile.window_seconds, profile.stride_seconds)
        .into_iter()
        .filter(|&(ws, we)| profile.is_spin(&window_features(trace, ws, we)))
        .map(|(ws, we)| SpinWindow {
            start_t: ws,
            end_t: we,
        })
        .collect()
}

fn merge_spans(spans: impl IntoIterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (s, e) in spans {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

/// Flagged spin windows with overlapping windows merged into maximal spans.
pub fn detect_spins(trace: &GyroTrace, profile: &SpinProfile) -> Vec<SpinWindow> {
    merge_spans(
        flag_spin_windows(trace, profile)
            .into_iter()
            .map(|w| (w.start_t, w.end_t)),
    )
    .into_iter()
    .map(|(s, e)| SpinWindow {
        start_t: s,
        end_t: e,
    })
    .collect()
}

/// Emits maximal unlock events: wherever at least `min_spins` flagged windows
/// start within one `event_window_seconds` span, overlapping candidate spans
/// are merged into one event.
pub fn detect_unlock_events(trace: &GyroTrace, profile: &SpinProfile) -> Vec<UnlockEvent> {
    let flagged = flag_spin_windows(trace, profile);
    let starts: Vec<f64> = flagged.iter().map(|w| w.start_t).collect();
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for (i, w) in flagged.iter().enumerate() {
        let horizon = w.start_t + profile.event_window_seconds;
        let mut last = i;
        for (j, other) in flagged.iter().enumerate().skip(i) {
            if other.start_t <= horizon {
                last = j;
            } else {
                break;
            }
        }
        if last - i + 1 >= profile.min_spins {
            candidates.push((w.start_t, flagged[last].end_t));
        }
    }
    merge_spans(candidates)
        .into_iter()
        .map(|(s, e)| UnlockEvent {
            start_t: s,
            end_t: e,
            spin_count: starts.iter().filter(|&&t| t >= s && t <= e).count(),
        })
        .collect()
}
