//! Splitting one unlock event into its dialing phases.
//!
//! Phase boundaries are the brief stalls where the hand reverses direction.
//! Rectifying and negating the angular velocity turns those stalls into the
//! tallest peaks of an otherwise strongly negative series; smoothing washes
//! out the regrab gaps between individual spins so only the reversals stand
//! out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lock::LockSpec;
use crate::signal::{
    find_top_peaks, gaussian_smooth, integrate_displacement, DisplacementFeatures, GyroTrace,
};

/// Amplifies stall points before peak picking.
const TRANSFORM_GAIN: f64 = 10.0;
/// Smoothing window in samples.
const SMOOTH_WINDOW: usize = 15;
/// Two reversals can never be closer than this.
const MIN_BOUNDARY_SEPARATION_SECONDS: f64 = 2.0;

/// Result of splitting an event into phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSegments {
    /// Sample indices of the detected reversals, ascending; length is
    /// one less than the phase count.
    pub boundaries: Vec<usize>,
    /// Displacement features per phase, in dialing order.
    pub features: Vec<DisplacementFeatures>,
}

/// Intermediate series, kept for inspection and plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationTrace {
    pub transformed: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub peaks: Vec<usize>,
}

fn boundary_transform(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| -TRANSFORM_GAIN * v.abs()).collect()
}

/// Segments an unlock event into `spec.phase_count()` phases and integrates
/// each one. Consecutive segments share their boundary sample, so the phase
/// features add up exactly to the whole-event features.
pub fn segment_phases(trace: &GyroTrace, spec: &LockSpec) -> Result<PhaseSegments> {
    Ok(segment_phases_traced(trace, spec)?.0)
}

/// Same as [`segment_phases`] but also returns the intermediate series.
pub fn segment_phases_traced(
    trace: &GyroTrace,
    spec: &LockSpec,
) -> Result<(PhaseSegments, SegmentationTrace)> {
    trace.validate()?;
    let phases = spec.phase_count();
    if phases < 2 {
        return Err(Error::Configuration(format!(
            "cannot segment a {phases}-phase lock",
        )));
    }
    let n = trace.len();
    if n < SMOOTH_WINDOW {
        return Err(Error::Segmentation(format!(
            "event too short to segment: {n} samples",
        )));
    }
    let transformed = boundary_transform(&trace.x);
    let smoothed = gaussian_smooth(&transformed, SMOOTH_WINDOW)?;
    let min_sep = (MIN_BOUNDARY_SEPARATION_SECONDS * trace.sample_rate_hz).round() as usize;
    let mut peaks = find_top_peaks(&smoothed, phases - 1, min_sep).map_err(|e| match e {
        Error::InsufficientPeaks { found, need } => {
            Error::Segmentation(format!("found {found} phase reversals, need {need}",))
        }
        other => other,
    })?;
    peaks.sort_unstable();

    let mut features = Vec::with_capacity(phases);
    let mut start = 0usize;
    for &b in &peaks {
        features.push(integrate_displacement(trace, start..b + 1));
        start = b;
    }
    features.push(integrate_displacement(trace, start..n));

    Ok((
        PhaseSegments {
            boundaries: peaks.clone(),
            features,
        },
        SegmentationTrace {
            transformed,
            smoothed,
            peaks,
        },
    ))
}
