//! End-to-end drivers chaining detection, segmentation, inference, and
//! ranking over a raw trace.

use crate::attack::{
    infer_key_deterministic, rank_keys_lazy, AttackProfile, KeySpace, RankedKeyList,
    TransitionEstimate,
};
use crate::error::{Error, Result};
use crate::lock::CombinationKey;
use crate::recognition::{detect_unlock_events, UnlockEvent};
use crate::segmentation::{segment_phases, PhaseSegments};
use crate::signal::GyroTrace;

/// Extra context kept around a detected event when slicing it out, so the
/// segmenter sees the quiet shoulders.
const EVENT_PAD_SECONDS: f64 = 1.0;

/// Sustained stillness that marks the end of dial activity when widening a
/// detected event. Intra-event pauses (number dwells, slowdown tails) are
/// well under a second.
const QUIET_RUN_SECONDS: f64 = 1.0;

/// Fraction of the in-event RMS below which a sample counts as still.
const ACTIVITY_RMS_FRACTION: f64 = 0.1;

/// Everything inferred about one detected unlock event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventAttack {
    pub event: UnlockEvent,
    pub segments: PhaseSegments,
    pub estimate: TransitionEstimate,
    pub key: CombinationKey,
}

/// Widens a detected event span to the surrounding activity boundaries.
///
/// A flagged window only proves spinning somewhere inside it, and edge
/// windows straddling the event onset often fall outside the learned bands,
/// so the detector's span can clip the first phase. Walking outward until the
/// signal stays below a tenth of the in-event RMS for a full second recovers
/// the whole gesture without trusting the band statistics.
fn expand_to_activity(trace: &GyroTrace, start_t: f64, end_t: f64) -> (f64, f64) {
    let a = trace.index_at(start_t);
    let b = trace.t.partition_point(|&t| t <= end_t);
    if a >= b {
        return (start_t, end_t);
    }
    let ms = trace.x[a..b].iter().map(|v| v * v).sum::<f64>() / (b - a) as f64;
    let threshold = ACTIVITY_RMS_FRACTION * ms.sqrt();
    if threshold <= 0.0 {
        return (start_t, end_t);
    }
    let quiet_n = ((QUIET_RUN_SECONDS * trace.sample_rate_hz) as usize).max(1);
    let active = |i: usize| trace.x[i].abs() > threshold;

    let mut lo = a;
    let mut run = 0;
    for i in (0..a).rev() {
        if active(i) {
            lo = i;
            run = 0;
        } else {
            run += 1;
            if run >= quiet_n {
                break;
            }
        }
    }
    let mut hi = b - 1;
    run = 0;
    for i in b..trace.len() {
        if active(i) {
            hi = i;
            run = 0;
        } else {
            run += 1;
            if run >= quiet_n {
                break;
            }
        }
    }
    (trace.t[lo].min(start_t), trace.t[hi].max(end_t))
}

/// Detects unlock events and runs the deterministic attack on each. When no
/// event passes the detector the whole trace is attacked as one event, with
/// a warning: a trace known to hold an unlock is still worth inverting.
pub fn attack_trace(trace: &GyroTrace, profile: &AttackProfile) -> Result<Vec<EventAttack>> {
    trace.validate()?;
    profile.validate()?;
    let mut events = detect_unlock_events(trace, &profile.spin_profile);
    if events.is_empty() {
        log::warn!("no unlock event detected; attacking the whole trace");
        events.push(UnlockEvent {
            start_t: trace.t[0],
            end_t: *trace.t.last().unwrap(),
            spin_count: 0,
        });
    }
    events
        .into_iter()
        .map(|event| {
            let (lo, hi) = expand_to_activity(trace, event.start_t, event.end_t);
            let slice = trace.slice(lo - EVENT_PAD_SECONDS, hi + EVENT_PAD_SECONDS);
            let segments = segment_phases(&slice, &profile.spec)?;
            let (key, estimate) = infer_key_deterministic(&segments, profile)?;
            Ok(EventAttack {
                event,
                segments,
                estimate,
                key,
            })
        })
        .collect()
}

/// Attacks the first detected event and ranks the top-r keys around its
/// estimate.
pub fn rank_trace(
    trace: &GyroTrace,
    profile: &AttackProfile,
    space: KeySpace,
    r: usize,
) -> Result<(RankedKeyList, EventAttack)> {
    let attacks = attack_trace(trace, profile)?;
    let first = attacks
        .into_iter()
        .next()
        .ok_or_else(|| Error::Segmentation("trace yielded no attackable event".into()))?;
    let scores = profile.score_phases(&first.estimate)?;
    let ranked = rank_keys_lazy(&scores, space, r, profile)?;
    Ok((ranked, first))
}
