//! Synthetic gyroscope trace generation: single unlock events and day-long
//! streams with confuser bursts, labeled with ground truth.
//!
//! Waveforms are half-sine velocity lobes. Only the integral structure is
//! meaningful for the attack, so every lobe is rescaled on the sample grid
//! to hit its displacement share exactly; spin counts and slowdown tails
//! give the traces the timing structure recognition and segmentation need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::attack::AttackProfile;
use crate::error::{Error, Result};
use crate::lock::{key_to_transitions, CombinationKey, Direction};
use crate::signal::GyroTrace;

/// Gripped advance sweep duration per spin.
const ADVANCE_SECONDS: f64 = 0.7;
/// Fraction of the advance-side displacement carried by the slowdown tail.
const SLOWDOWN_SHARE: f64 = 0.02;
/// Still dwell after a phase's slowdown, as a fraction of slowdown_seconds.
const DWELL_FRACTION: f64 = 0.3;
/// Quiet padding around a standalone unlock event.
const EVENT_PAD_SECONDS: f64 = 1.0;
/// Background wrist jitter of a day-long stream, rad/s.
const NOISE_FLOOR_SIGMA: f64 = 0.02;
/// Minimum distance kept between a confuser and anything else, so detection
/// windows of separate activities can never chain into one event span.
const CONFUSER_CLEARANCE_SECONDS: f64 = 120.0;

/// Generator knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sample_rate_hz: f64,
    /// Dial radians advanced per gripped spin.
    pub spin_advance: f64,
    /// Fraction of each spin's sweep reversed during regrab; also scales the
    /// regrab lobe duration relative to the advance lobe.
    pub regrab_ratio: f64,
    /// Duration of the low-amplitude tail before each phase boundary.
    pub slowdown_seconds: f64,
    /// Per-phase deviation of the transition noise, in dial units; missing
    /// entries mean noise-free.
    pub noise_sigma: Vec<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate_hz: 200.0,
            spin_advance: std::f64::consts::PI,
            regrab_ratio: 0.9,
            slowdown_seconds: 0.6,
            noise_sigma: Vec::new(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        // The positivity checks are written to also reject NaN.
        if !self.sample_rate_hz.is_finite() || self.sample_rate_hz <= 0.0 {
            return Err(Error::InvalidArgument(
                "sample rate must be positive".into(),
            ));
        }
        if !(self.regrab_ratio > 0.0 && self.regrab_ratio < 1.0) {
            return Err(Error::InvalidArgument(
                "regrab ratio must be strictly between 0 and 1".into(),
            ));
        }
        if !self.spin_advance.is_finite()
            || self.spin_advance <= 0.0
            || !self.slowdown_seconds.is_finite()
            || self.slowdown_seconds <= 0.0
        {
            return Err(Error::InvalidArgument(
                "spin advance and slowdown must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What the generator actually emitted, for closed-loop checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub key: CombinationKey,
    pub start: u32,
    /// Reversal times (dwell centers) between phases, seconds; one fewer
    /// than the phase count.
    pub phase_boundaries: Vec<f64>,
    /// Per-phase (positive, negative) displacement targets, radians.
    pub alpha_targets: Vec<(f64, f64)>,
    /// Start and end of the dialing motion within the trace.
    pub event_interval: (f64, f64),
}

/// What an interval of a day trace contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    Unlock,
    Confuser,
}

/// One labeled interval of a day trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLabel {
    pub start_t: f64,
    pub end_t: f64,
    pub kind: LabelKind,
    pub key: Option<CombinationKey>,
}

/// Appends a half-sine lobe whose trapezoid integral is exactly `target`.
/// The caller guarantees the running series currently ends on a zero sample;
/// the lobe ends on one too, so lobes never interact.
fn push_lobe(samples: &mut Vec<f64>, duration: f64, target: f64, rate: f64) {
    let intervals = ((duration * rate).round() as usize).max(2);
    let dt = 1.0 / rate;
    let raw: f64 = (1..intervals)
        .map(|j| (std::f64::consts::PI * j as f64 / intervals as f64).sin())
        .sum::<f64>()
        * dt;
    let amplitude = target / raw;
    for j in 1..intervals {
        samples.push(amplitude * (std::f64::consts::PI * j as f64 / intervals as f64).sin());
    }
    samples.push(0.0);
}

fn push_silence(samples: &mut Vec<f64>, duration: f64, rate: f64) {
    let n = (duration * rate).round() as usize;
    samples.extend(std::iter::repeat(0.0).take(n));
}

struct EventSamples {
    /// Starts and ends on a zero sample.
    samples: Vec<f64>,
    /// Dwell-center offsets from the event start, seconds.
    boundaries: Vec<f64>,
    alpha_targets: Vec<(f64, f64)>,
}

/// Core generator: dialing motion for one key, starting and ending at zero
/// velocity, no padding. Draws transition noise from `rng`.
fn synth_event(
    key: &CombinationKey,
    profile: &AttackProfile,
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EventSamples> {
    profile.validate()?;
    config.validate()?;
    let spec = &profile.spec;
    let rate = config.sample_rate_hz;
    let transitions = key_to_transitions(key, profile.start, spec)?;
    let mut samples = vec![0.0];
    let mut boundaries = Vec::new();
    let mut alpha_targets = Vec::new();

    for (p, (&theta, ph)) in transitions.theta.iter().zip(&spec.phases).enumerate() {
        let sigma = config.noise_sigma.get(p).copied().unwrap_or(0.0);
        let models = &profile.models[p];
        let mut drawn = None;
        let attempts = if sigma > 0.0 { 100 } else { 1 };
        for _ in 0..attempts {
            let noisy = if sigma > 0.0 {
                let normal = Normal::new(0.0, sigma)
                    .map_err(|e| Error::Generation(format!("bad noise sigma: {e}")))?;
                theta as f64 + normal.sample(rng)
            } else {
                theta as f64
            };
            let pos_target = models.pos.alpha(noisy);
            let neg_target = models.neg.alpha(noisy);
            if pos_target > 0.0 && neg_target < 0.0 {
                drawn = Some((noisy, pos_target, neg_target));
                break;
            }
        }
        let Some((noisy, pos_target, neg_target)) = drawn else {
            return Err(Error::Generation(format!(
                "phase {} targets keep the wrong sign (theta {theta}, sigma {sigma})",
                p + 1
            )));
        };
        alpha_targets.push((pos_target, neg_target));

        let wrist_radians = noisy * std::f64::consts::TAU / spec.dial_size as f64;
        let n_spins = ((wrist_radians / config.spin_advance).ceil() as i64).max(1) as usize;
        let (advance_target, regrab_target) = match ph.direction {
            Direction::Clockwise => (neg_target, pos_target),
            Direction::Counterclockwise => (pos_target, neg_target),
        };
        let main_share = advance_target * (1.0 - SLOWDOWN_SHARE) / n_spins as f64;
        let regrab_share = regrab_target / n_spins as f64;
        let regrab_seconds = ADVANCE_SECONDS * config.regrab_ratio;
        for _ in 0..n_spins {
            push_lobe(&mut samples, ADVANCE_SECONDS, main_share, rate);
            push_lobe(&mut samples, regrab_seconds, regrab_share, rate);
        }
        push_lobe(
            &mut samples,
            config.slowdown_seconds,
            advance_target * SLOWDOWN_SHARE,
            rate,
        );
        if p + 1 < spec.phase_count() {
            let dwell = DWELL_FRACTION * config.slowdown_seconds;
            let dwell_start = samples.len() as f64 / rate;
            push_silence(&mut samples, dwell, rate);
            boundaries.push(dwell_start + dwell / 2.0);
        }
    }

    Ok(EventSamples {
        samples,
        boundaries,
        alpha_targets,
    })
}

/// Generates one padded unlock trace with its ground truth.
pub fn synthesize_unlock_trace(
    key: &CombinationKey,
    profile: &AttackProfile,
    config: &SynthConfig,
) -> Result<(GyroTrace, GroundTruth)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let event = synth_event(key, profile, config, &mut rng)?;
    let rate = config.sample_rate_hz;
    let pad = (EVENT_PAD_SECONDS * rate).round() as usize;
    let pad_seconds = pad as f64 / rate;

    let mut x = vec![0.0; pad];
    x.extend_from_slice(&event.samples);
    x.extend(std::iter::repeat(0.0).take(pad));
    let t = (0..x.len()).map(|i| i as f64 / rate).collect();

    let truth = GroundTruth {
        key: key.clone(),
        start: profile.start,
        phase_boundaries: event.boundaries.iter().map(|b| b + pad_seconds).collect(),
        alpha_targets: event.alpha_targets,
        event_interval: (
            pad_seconds,
            pad_seconds + (event.samples.len() - 1) as f64 / rate,
        ),
    };
    Ok((
        GyroTrace {
            sample_rate_hz: rate,
            t,
            x,
            y: Vec::new(),
            z: Vec::new(),
        },
        truth,
    ))
}

/// Generates a long stream: background wrist jitter, unlock events at the
/// given times, and `confuser_count` rotary bursts at random clear spots.
/// Soft confusers span only a couple of detection windows; hard ones pass
/// the event threshold on purpose.
pub fn synthesize_day_trace(
    events: &[(CombinationKey, f64)],
    confuser_count: usize,
    hard_confusers: bool,
    duration_seconds: f64,
    profile: &AttackProfile,
    config: &SynthConfig,
) -> Result<(GyroTrace, Vec<TraceLabel>)> {
    config.validate()?;
    profile.validate()?;
    let rate = config.sample_rate_hz;
    let n = (duration_seconds * rate).round() as usize;
    if n == 0 {
        return Err(Error::InvalidArgument("day trace has zero duration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let noise = Normal::new(0.0, NOISE_FLOOR_SIGMA).expect("constant noise floor sigma is valid");
    let mut x: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();

    let mut labels: Vec<TraceLabel> = Vec::new();
    let mut occupied: Vec<(f64, f64)> = Vec::new();

    for (key, start_t) in events {
        let event = synth_event(key, profile, config, &mut rng)?;
        let start_idx = (start_t * rate).round() as usize;
        let end_t = start_t + (event.samples.len() - 1) as f64 / rate;
        if start_idx + event.samples.len() > n {
            return Err(Error::InvalidArgument(format!(
                "event at {start_t} s runs past the trace end"
            )));
        }
        if occupied.iter().any(|&(s, e)| *start_t <= e && end_t >= s) {
            return Err(Error::InvalidArgument(format!(
                "event at {start_t} s overlaps another event"
            )));
        }
        occupied.push((*start_t, end_t));
        x[start_idx..start_idx + event.samples.len()].copy_from_slice(&event.samples);
        labels.push(TraceLabel {
            start_t: *start_t,
            end_t,
            kind: LabelKind::Unlock,
            key: Some(key.clone()),
        });
    }

    let window = profile.spin_profile.window_seconds;
    let burst_seconds = if hard_confusers {
        window + profile.spin_profile.min_spins as f64 + 1.0
    } else {
        window + 2.5
    };
    for c in 0..confuser_count {
        // Hard confusers reuse the longest dialing pattern so the burst
        // never runs out of spins; soft ones use a random key.
        let key = if hard_confusers {
            let theta = profile
                .spec
                .phases
                .iter()
                .map(|ph| ph.transition_max)
                .collect();
            crate::lock::transitions_to_key(
                &crate::lock::TransitionVector::new(theta),
                profile.start,
                &profile.spec,
            )?
        } else {
            CombinationKey::new(
                (0..profile.spec.phase_count())
                    .map(|_| rng.random_range(0..profile.spec.dial_size))
                    .collect(),
            )
        };
        let event = synth_event(&key, profile, config, &mut rng)?;
        let burst_len = ((burst_seconds * rate).round() as usize).min(event.samples.len());
        let mut placed = false;
        for _ in 0..1000 {
            let start_t = rng.random_range(0.0..duration_seconds - burst_seconds);
            let end_t = start_t + (burst_len - 1) as f64 / rate;
            let clear = occupied.iter().all(|&(s, e)| {
                end_t + CONFUSER_CLEARANCE_SECONDS < s || start_t > e + CONFUSER_CLEARANCE_SECONDS
            });
            if clear {
                let start_idx = (start_t * rate).round() as usize;
                x[start_idx..start_idx + burst_len].copy_from_slice(&event.samples[..burst_len]);
                occupied.push((start_t, end_t));
                labels.push(TraceLabel {
                    start_t,
                    end_t,
                    kind: LabelKind::Confuser,
                    key: None,
                });
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Generation(format!(
                "no clear slot for confuser {} of {confuser_count}",
                c + 1
            )));
        }
    }

    labels.sort_by(|a, b| a.start_t.total_cmp(&b.start_t));
    let t = (0..n).map(|i| i as f64 / rate).collect();
    Ok((
        GyroTrace {
            sample_rate_hz: rate,
            t,
            x,
            y: Vec::new(),
            z: Vec::new(),
        },
        labels,
    ))
}
