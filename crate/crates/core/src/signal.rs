//! Gyroscope time-series substrate: traces, displacement integration,
//! Gaussian smoothing, and peak search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A timestamped angular-velocity recording. Only the x axis participates in
/// the attack; y/z are carried through when present so round-tripping a file
/// is lossless.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GyroTrace {
    pub sample_rate_hz: f64,
    /// Timestamps in seconds, strictly increasing.
    pub t: Vec<f64>,
    /// x-axis angular velocity in rad/s, one entry per timestamp.
    pub x: Vec<f64>,
    /// Optional extra axes; empty when the source had none.
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl GyroTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.t.len() {
            return Err(Error::InvalidArgument(
                "x channel length does not match timestamps".into(),
            ));
        }
        for w in self.t.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(format!(
                    "timestamps not strictly increasing at t={}",
                    w[1]
                )));
            }
        }
        Ok(())
    }

    /// Index of the first sample with `t >= time`, clamped to the trace.
    pub fn index_at(&self, time: f64) -> usize {
        self.t.partition_point(|&t| t < time)
    }

    /// Contiguous sample view covering `[start_t, end_t]`.
    pub fn slice(&self, start_t: f64, end_t: f64) -> GyroTrace {
        let a = self.index_at(start_t);
        let b = self.t.partition_point(|&t| t <= end_t);
        GyroTrace {
            sample_rate_hz: self.sample_rate_hz,
            t: self.t[a..b].to_vec(),
            x: self.x[a..b].to_vec(),
            y: if self.y.is_empty() {
                vec![]
            } else {
                self.y[a..b].to_vec()
            },
            z: if self.z.is_empty() {
                vec![]
            } else {
                self.z[a..b].to_vec()
            },
        }
    }
}

/// Integrated angular displacement over a window, split by sign.
///
/// `pos` collects the area where the signal is positive, `neg` where it is
/// negative (so `neg <= 0`). `summed = pos + neg` is the net displacement and
/// `total = pos - neg` the gross rotation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DisplacementFeatures {
    pub pos: f64,
    pub neg: f64,
    pub summed: f64,
    pub total: f64,
}

impl DisplacementFeatures {
    pub fn from_pos_neg(pos: f64, neg: f64) -> Self {
        DisplacementFeatures {
            pos,
            neg,
            summed: pos + neg,
            total: pos - neg,
        }
    }
}

/// Trapezoidal integration of the x channel over the sample range
/// `window` (half-open, in sample indices), split into positive and negative
/// parts. Intervals that cross zero are split at the linearly interpolated
/// crossing so the two parts partition the integral exactly.
pub fn integrate_displacement(
    trace: &GyroTrace,
    window: std::ops::Range<usize>,
) -> DisplacementFeatures {
    let end = window.end.min(trace.len());
    let start = window.start.min(end);
    let mut pos = 0.0;
    let mut neg = 0.0;
    for i in start..end.saturating_sub(1) {
        let (a, b) = (trace.x[i], trace.x[i + 1]);
        let dt = trace.t[i + 1] - trace.t[i];
        if a >= 0.0 && b >= 0.0 {
            pos += 0.5 * (a + b) * dt;
        } else if a <= 0.0 && b <= 0.0 {
            neg += 0.5 * (a + b) * dt;
        } else {
            // Signs differ: split at the zero crossing.
            let tz = a / (a - b) * dt;
            let first = 0.5 * a * tz;
            let second = 0.5 * b * (dt - tz);
            if a > 0.0 {
                pos += first;
                neg += second;
            } else {
                neg += first;
                pos += second;
            }
        }
    }
    DisplacementFeatures::from_pos_neg(pos, neg)
}

/// Truncated Gaussian kernel of `window` taps with sigma = window/6,
/// normalized to sum 1.
pub fn gaussian_kernel(window: usize) -> Vec<f64> {
    let half = (window / 2) as isize;
    let sigma = window as f64 / 6.0;
    let mut kernel: Vec<f64> = (-half..=half)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

/// Same-length Gaussian smoothing. At the edges the kernel is clamped to the
/// available samples and renormalized, which avoids phantom boundary peaks.
pub fn gaussian_smooth(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "smoothing window must be odd and >= 3, got {window}"
        )));
    }
    let kernel = gaussian_kernel(window);
    let half = window / 2;
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n.saturating_sub(1));
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for j in lo..=hi {
            let w = kernel[j + half - i];
            acc += w * series[j];
            wsum += w;
        }
        out.push(acc / wsum);
    }
    Ok(out)
}

/// Finds the `k` highest local maxima at least `min_separation` samples
/// apart, returned in chronological order.
///
/// Plateaus count as a single maximum anchored at their midpoint; series
/// endpoints are not maxima. Selection is greedy by descending height with
/// equal heights broken by lower index, so the result is deterministic.
pub fn find_top_peaks(series: &[f64], k: usize, min_separation: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let n = series.len();
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    let mut i = 1;
    while i < n {
        // Extend over a plateau of equal values.
        let mut j = i;
        while j + 1 < n && series[j + 1] == series[i] {
            j += 1;
        }
        let left_lower = series[i - 1] < series[i];
        let right_lower = j + 1 < n && series[j + 1] < series[i];
        if left_lower && right_lower {
            candidates.push((series[i], (i + j) / 2));
        }
        i = j + 1;
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for &(_, idx) in &candidates {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&c| c.abs_diff(idx) >= min_separation) {
            chosen.push(idx);
        }
    }
    if chosen.len() < k {
        return Err(Error::InsufficientPeaks {
            found: chosen.len(),
            need: k,
        });
    }
    chosen.sort_unstable();
    Ok(chosen)
}
