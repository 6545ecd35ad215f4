//! Key inference and ranking: deterministic inversion of the per-phase
//! linear models, Gaussian scoring of candidate transitions, and top-r
//! enumeration over the key space (exhaustive or lazy best-first).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lock::{
    key_to_transitions, transitions_to_key, CombinationKey, KeySet, LockSpec, PhaseSpec,
    TransitionVector,
};
use crate::recognition::{learn_spin_profile, SpinProfile};
use crate::regression::{predict_transition, LinearModel};
use crate::segmentation::PhaseSegments;
use crate::signal::DisplacementFeatures;
use crate::synth::{synthesize_unlock_trace, SynthConfig};

/// Lower bound on the scoring deviation. Training residuals can vanish on
/// noise-free data; half a unit is the rounding granularity, so nothing
/// sharper is meaningful.
pub const SIGMA_FLOOR: f64 = 0.5;

/// Largest key space [`rank_keys_exhaustive`] will materialize.
pub const EXHAUSTIVE_GUARD: u64 = 10_000_000;

/// Current on-disk profile schema.
pub const PROFILE_SCHEMA_VERSION: u32 = 1;

/// Which displacement side(s) a phase's inference uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Positive,
    Negative,
    Averaged,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Positive => write!(f, "positive"),
            Strategy::Negative => write!(f, "negative"),
            Strategy::Averaged => write!(f, "averaged"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Strategy::Positive),
            "negative" | "neg" | "-" => Ok(Strategy::Negative),
            "averaged" | "avg" | "average" => Ok(Strategy::Averaged),
            other => Err(Error::InvalidArgument(format!(
                "unknown strategy {other:?}"
            ))),
        }
    }
}

/// The two fitted models of one phase plus the deviation of the averaged
/// inversion (which is not derivable from the single-sign deviations when
/// the two errors are correlated).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseModels {
    pub pos: LinearModel,
    pub neg: LinearModel,
    pub averaged_sigma: f64,
}

/// Everything a trained adversary knows: lock layout, starting number,
/// per-phase models and strategies, and spin-window statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackProfile {
    pub schema_version: u32,
    pub spec: LockSpec,
    pub start: u32,
    pub strategy: Vec<Strategy>,
    pub models: Vec<PhaseModels>,
    pub spin_profile: SpinProfile,
}

/// One phase of a built-in coefficient table: (positive-model slope and
/// intercept, negative-model slope and intercept, inference-error deviation
/// in dial units).
pub type ReferenceRow = ((f64, f64), (f64, f64), f64);

/// Reference padlock coefficients, one row per phase.
pub const PADLOCK_REFERENCE: [ReferenceRow; 3] = [
    ((0.0836, 0.3272), (-0.1269, 0.3714), 12.27),
    ((0.0854, 0.9360), (-0.1163, 0.3301), 8.49),
    ((0.0737, 2.0387), (-0.1173, 0.0061), 4.82),
];

/// Reference safe coefficients, same layout.
pub const SAFE_REFERENCE: [ReferenceRow; 4] = [
    ((0.0153, 19.5492), (-0.0266, -8.8471), 22.99),
    ((0.0010, 7.9046), (-0.0386, -2.3798), 17.86),
    ((0.0170, 3.6319), (-0.0460, 0.4906), 8.66),
    ((0.0305, 1.7663), (-0.0483, -0.1058), 7.23),
];

/// Keys whose transitions sweep each phase range at even fractions; used to
/// learn the built-in spin statistics from the generator itself. The sweeps
/// are staggered per phase (distinct strides modulo a prime count) so the
/// corpus mixes short and long transitions across phases instead of scaling
/// every phase together, which would understate cross-key feature spread.
fn representative_keys(spec: &LockSpec, start: u32) -> Vec<CombinationKey> {
    const COUNT: u32 = 17;
    const STRIDES: [u32; 8] = [1, 7, 5, 3, 11, 13, 2, 6];
    (0..COUNT)
        .map(|i| {
            let theta = spec
                .phases
                .iter()
                .enumerate()
                .map(|(p, ph)| {
                    let f = ((i * STRIDES[p % STRIDES.len()]) % COUNT) as f64 / (COUNT - 1) as f64;
                    let span = (ph.transition_max - ph.transition_min) as f64;
                    ph.transition_min + (f * span).round() as u32
                })
                .collect();
            transitions_to_key(&TransitionVector::new(theta), start, spec)
                .expect("in-range transitions always map to a key")
        })
        .collect()
}

impl AttackProfile {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let p = self.spec.phase_count();
        if self.strategy.len() != p || self.models.len() != p {
            return Err(Error::Configuration(format!(
                "profile has {} strategies and {} model pairs for a {p}-phase lock",
                self.strategy.len(),
                self.models.len()
            )));
        }
        if self.start >= self.spec.dial_size {
            return Err(Error::Configuration(format!(
                "start {} outside dial 0..{}",
                self.start, self.spec.dial_size
            )));
        }
        Ok(())
    }

    /// Deviation used for probabilistic scoring of a phase: the residual of
    /// whichever model(s) the strategy uses, floored at [`SIGMA_FLOOR`].
    pub fn scoring_sigma(&self, phase: usize) -> f64 {
        let m = &self.models[phase];
        let sigma = match self.strategy[phase] {
            Strategy::Positive => m.pos.residual_sigma,
            Strategy::Negative => m.neg.residual_sigma,
            Strategy::Averaged => m.averaged_sigma,
        };
        sigma.max(SIGMA_FLOOR)
    }

    /// Per-phase log score arrays for an estimate, aligned with each phase's
    /// transition range.
    pub fn score_phases(&self, estimate: &TransitionEstimate) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        if estimate.theta_bar.len() != self.spec.phase_count() {
            return Err(Error::InvalidArgument(format!(
                "estimate covers {} phases, lock has {}",
                estimate.theta_bar.len(),
                self.spec.phase_count()
            )));
        }
        Ok(self
            .spec
            .phases
            .iter()
            .enumerate()
            .map(|(p, ph)| {
                score_transition_candidates(estimate.theta_bar[p], self.scoring_sigma(p), ph)
            })
            .collect())
    }

    fn from_reference(
        spec: LockSpec,
        strategy: Vec<Strategy>,
        rows: &[ReferenceRow],
        min_spins: usize,
    ) -> Self {
        let models = rows
            .iter()
            .map(|&((mp, np), (mn, nn), sigma)| PhaseModels {
                pos: LinearModel::new(mp, np, sigma),
                neg: LinearModel::new(mn, nn, sigma),
                averaged_sigma: sigma,
            })
            .collect();
        let start = spec.start_default;
        let mut profile = AttackProfile {
            schema_version: PROFILE_SCHEMA_VERSION,
            spec,
            start,
            strategy,
            models,
            spin_profile: SpinProfile {
                pos: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                neg: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                summed: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                total: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                window_seconds: 5.0,
                stride_seconds: 1.0,
                min_spins,
                event_window_seconds: 90.0,
            },
        };
        profile.spin_profile = synthesized_spin_profile(&profile, min_spins)
            .expect("reference models produce valid targets for in-range keys");
        profile
    }

    /// Padlock profile with the reference coefficients. Strategy follows the
    /// best-performing published combination: averaged inference for the
    /// first two phases, negative displacements for the last.
    pub fn padlock_reference() -> Self {
        AttackProfile::from_reference(
            LockSpec::padlock(),
            vec![Strategy::Averaged, Strategy::Averaged, Strategy::Negative],
            &PADLOCK_REFERENCE,
            5,
        )
    }

    /// Safe profile with the reference coefficients.
    pub fn safe_reference() -> Self {
        AttackProfile::from_reference(
            LockSpec::safe(),
            vec![
                Strategy::Averaged,
                Strategy::Positive,
                Strategy::Negative,
                Strategy::Negative,
            ],
            &SAFE_REFERENCE,
            9,
        )
    }

    /// Builds a profile around freshly fitted models and learns its spin
    /// statistics from synthesized representative traces. Displacement-pair
    /// training data carries no window information, so this is how a trained
    /// profile becomes detection-capable.
    pub fn from_models(
        spec: LockSpec,
        start: u32,
        strategy: Vec<Strategy>,
        models: Vec<PhaseModels>,
        min_spins: usize,
    ) -> Result<Self> {
        let mut profile = AttackProfile {
            schema_version: PROFILE_SCHEMA_VERSION,
            spec,
            start,
            strategy,
            models,
            spin_profile: SpinProfile {
                pos: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                neg: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                summed: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                total: crate::recognition::FeatureStats {
                    mean: 0.0,
                    sigma: 0.0,
                },
                window_seconds: 5.0,
                stride_seconds: 1.0,
                min_spins,
                event_window_seconds: 90.0,
            },
        };
        profile.validate()?;
        profile.spin_profile = synthesized_spin_profile(&profile, min_spins)?;
        Ok(profile)
    }

    /// Recomputes the spin-window statistics under the current models; see
    /// [`AttackProfile::from_models`].
    pub fn relearn_spin_statistics(&mut self) -> Result<()> {
        self.spin_profile = synthesized_spin_profile(self, self.spin_profile.min_spins)?;
        Ok(())
    }
}

/// Default event threshold: half the spin count of the shortest possible
/// entry, so every real entry clears it with margin. Evaluates to 5 for the
/// padlock and 9 for the safe.
pub fn default_min_spins(spec: &LockSpec, spin_advance: f64) -> usize {
    let per_spin_units = spin_advance * spec.dial_size as f64 / std::f64::consts::TAU;
    let total: f64 = spec
        .phases
        .iter()
        .map(|ph| (ph.transition_min as f64 / per_spin_units).ceil().max(1.0))
        .sum();
    ((total / 2.0).ceil() as usize).max(1)
}

/// Spin statistics learned by synthesizing unlock traces for a spread of
/// representative keys under the profile's own models. Each key is rendered
/// in several dialing styles (grab sweep, regrab pace, transition jitter at
/// the model residuals) so the learned deviations carry between-event spread
/// rather than only window-to-window chatter inside one nominal trace; a
/// band a single deviation wide has to absorb both.
fn synthesized_spin_profile(profile: &AttackProfile, min_spins: usize) -> Result<SpinProfile> {
    let base = SynthConfig::default();
    let residuals: Vec<f64> = (0..profile.spec.phase_count())
        .map(|p| profile.scoring_sigma(p))
        .collect();
    // (spin_advance scale, regrab_ratio, transition jitter on or off)
    let styles: [(f64, f64, bool); 9] = [
        (1.0, 0.90, false),
        (0.65, 0.90, true),
        (1.55, 0.85, true),
        (1.0, 0.80, true),
        (0.75, 0.95, true),
        (1.40, 0.80, true),
        (0.90, 0.90, true),
        (1.15, 0.95, true),
        (1.30, 0.90, true),
    ];
    let keys = representative_keys(&profile.spec, profile.start);
    let mut traces = Vec::with_capacity(keys.len() * styles.len());
    for (s, &(advance_scale, regrab_ratio, jitter)) in styles.iter().enumerate() {
        for (k, key) in keys.iter().enumerate() {
            let config = SynthConfig {
                spin_advance: base.spin_advance * advance_scale,
                regrab_ratio,
                noise_sigma: if jitter {
                    residuals.clone()
                } else {
                    Vec::new()
                },
                seed: (s * keys.len() + k) as u64,
                ..base.clone()
            };
            let (trace, truth) = synthesize_unlock_trace(key, profile, &config)?;
            traces.push((trace, vec![truth.event_interval]));
        }
    }
    let labeled: Vec<(&crate::signal::GyroTrace, &[(f64, f64)])> =
        traces.iter().map(|(t, iv)| (t, iv.as_slice())).collect();
    learn_spin_profile(&labeled, 5.0, 1.0, min_spins, 90.0)
}

/// Real-valued per-phase transition estimates before rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    /// Unclamped estimate per phase; scoring uses this directly.
    pub theta_bar: Vec<f64>,
    /// Whether rounding the estimate left the phase range (the deterministic
    /// answer was clamped back in).
    pub clamped: Vec<bool>,
}

impl TransitionEstimate {
    /// Deterministic integer transitions: round to nearest, clamp into range.
    pub fn rounded_clamped(&self, spec: &LockSpec) -> TransitionVector {
        let theta = self
            .theta_bar
            .iter()
            .zip(&spec.phases)
            .map(|(&tb, ph)| {
                let r = tb.round();
                if r < ph.transition_min as f64 {
                    ph.transition_min
                } else if r > ph.transition_max as f64 {
                    ph.transition_max
                } else {
                    r as u32
                }
            })
            .collect();
        TransitionVector::new(theta)
    }
}

/// Inverts one phase's model(s) on its displacement features according to
/// the profile's strategy. Returns the unclamped estimate and whether its
/// rounding falls outside the phase range.
pub fn infer_transition(
    features: &DisplacementFeatures,
    phase: usize,
    profile: &AttackProfile,
) -> Result<(f64, bool)> {
    let ph = profile.spec.phases.get(phase).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "phase {phase} out of range for {}-phase lock",
            profile.spec.phase_count()
        ))
    })?;
    let m = &profile.models[phase];
    let theta_bar = match profile.strategy[phase] {
        Strategy::Positive => predict_transition(&m.pos, features.pos)?,
        Strategy::Negative => predict_transition(&m.neg, features.neg)?,
        Strategy::Averaged => {
            let tp = predict_transition(&m.pos, features.pos)?;
            let tn = predict_transition(&m.neg, features.neg)?;
            (tp + tn) / 2.0
        }
    };
    let r = theta_bar.round();
    let clamped = r < ph.transition_min as f64 || r > ph.transition_max as f64;
    Ok((theta_bar, clamped))
}

/// Full deterministic attack: invert every phase, round, clamp, and map the
/// transitions back to a key.
pub fn infer_key_deterministic(
    segments: &PhaseSegments,
    profile: &AttackProfile,
) -> Result<(CombinationKey, TransitionEstimate)> {
    profile.validate()?;
    let p = profile.spec.phase_count();
    if segments.features.len() != p {
        return Err(Error::InvalidArgument(format!(
            "{} segmented phases for a {p}-phase lock",
            segments.features.len()
        )));
    }
    let mut theta_bar = Vec::with_capacity(p);
    let mut clamped = Vec::with_capacity(p);
    for (phase, f) in segments.features.iter().enumerate() {
        let (tb, cl) = infer_transition(f, phase, profile)?;
        theta_bar.push(tb);
        clamped.push(cl);
    }
    let estimate = TransitionEstimate { theta_bar, clamped };
    let key = transitions_to_key(
        &estimate.rounded_clamped(&profile.spec),
        profile.start,
        &profile.spec,
    )?;
    Ok((key, estimate))
}

/// Log of the normal density with mean `theta_bar` at every integer in the
/// phase range. Not renormalized: ranking is scale-invariant, and log space
/// keeps four-phase products from underflowing.
pub fn score_transition_candidates(theta_bar: f64, sigma: f64, phase: &PhaseSpec) -> Vec<f64> {
    let sigma = sigma.max(SIGMA_FLOOR);
    let norm = -(sigma.ln() + 0.5 * (2.0 * std::f64::consts::PI).ln());
    (phase.transition_min..=phase.transition_max)
        .map(|x| {
            let z = (x as f64 - theta_bar) / sigma;
            norm - 0.5 * z * z
        })
        .collect()
}

/// The candidate space a ranking runs over.
#[derive(Debug, Clone, Copy)]
pub enum KeySpace<'a> {
    /// Every key of the lock.
    Full,
    /// Keys whose transitions are all multiples of `step` (an evenly spaced
    /// sub-grid; 160,000 keys for the safe at step 5).
    Grid { step: u32 },
    /// An explicit restricted set, e.g. the 4000 factory padlock keys.
    Set(&'a KeySet),
}

impl KeySpace<'_> {
    /// Number of keys in the space.
    pub fn size(&self, spec: &LockSpec) -> Result<u64> {
        match self {
            KeySpace::Full => Ok(spec.key_space_size()),
            KeySpace::Grid { step } => {
                if *step == 0 {
                    return Err(Error::InvalidArgument("grid step must be positive".into()));
                }
                let mut size: u64 = 1;
                for ph in &spec.phases {
                    let count = (ph.transition_max / step - (ph.transition_min - 1) / step) as u64;
                    size = size
                        .checked_mul(count)
                        .ok_or_else(|| Error::InvalidArgument("key space overflows".into()))?;
                }
                Ok(size)
            }
            KeySpace::Set(set) => Ok(set.len() as u64),
        }
    }
}

/// Keys ordered by descending score; ties in ascending digit order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedKeyList {
    pub entries: Vec<(CombinationKey, f64)>,
    pub key_space_size: u64,
}

/// 1-based position of `truth` in the ranking, if present.
pub fn rank_of_truth(ranked: &RankedKeyList, truth: &CombinationKey) -> Option<usize> {
    ranked
        .entries
        .iter()
        .position(|(k, _)| k == truth)
        .map(|i| i + 1)
}

fn check_scores(scores: &[Vec<f64>], spec: &LockSpec) -> Result<()> {
    if scores.len() != spec.phase_count() {
        return Err(Error::InvalidArgument(format!(
            "{} score arrays for a {}-phase lock",
            scores.len(),
            spec.phase_count()
        )));
    }
    for (p, (s, ph)) in scores.iter().zip(&spec.phases).enumerate() {
        if s.len() != ph.width() as usize {
            return Err(Error::InvalidArgument(format!(
                "phase {} has {} scores for {} candidate transitions",
                p + 1,
                s.len(),
                ph.width()
            )));
        }
    }
    Ok(())
}

fn sort_ranked(entries: &mut [(CombinationKey, f64)]) {
    entries.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Scores every key in the space and sorts. Guarded: spaces above
/// [`EXHAUSTIVE_GUARD`] keys must use [`rank_keys_lazy`].
pub fn rank_keys_exhaustive(
    scores: &[Vec<f64>],
    space: KeySpace,
    profile: &AttackProfile,
) -> Result<RankedKeyList> {
    let spec = &profile.spec;
    check_scores(scores, spec)?;
    let size = space.size(spec)?;
    if size > EXHAUSTIVE_GUARD {
        return Err(Error::SizeGuard {
            size,
            guard: EXHAUSTIVE_GUARD,
        });
    }
    let mut entries = Vec::with_capacity(size as usize);
    match space {
        KeySpace::Set(set) => {
            for key in set.keys() {
                let tv = key_to_transitions(key, profile.start, spec)?;
                let score: f64 = tv
                    .theta
                    .iter()
                    .zip(&spec.phases)
                    .zip(scores)
                    .map(|((&t, ph), s)| s[(t - ph.transition_min) as usize])
                    .sum();
                entries.push((key.clone(), score));
            }
        }
        KeySpace::Full | KeySpace::Grid { .. } => {
            let candidates = candidate_transitions(&space, spec)?;
            let mut idx = vec![0usize; spec.phase_count()];
            let mut theta =
                TransitionVector::new(candidates.iter().map(|c| c[0]).collect::<Vec<u32>>());
            loop {
                let score: f64 = idx
                    .iter()
                    .zip(&candidates)
                    .zip(scores)
                    .zip(&spec.phases)
                    .map(|(((&i, c), s), ph)| s[(c[i] - ph.transition_min) as usize])
                    .sum();
                let key = transitions_to_key(&theta, profile.start, spec)?;
                entries.push((key, score));
                // Odometer over the per-phase candidate lists.
                let mut p = spec.phase_count();
                loop {
                    if p == 0 {
                        return finish_exhaustive(entries, size);
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < candidates[p].len() {
                        theta.theta[p] = candidates[p][idx[p]];
                        break;
                    }
                    idx[p] = 0;
                    theta.theta[p] = candidates[p][0];
                }
            }
        }
    }
    finish_exhaustive(entries, size)
}

fn finish_exhaustive(mut entries: Vec<(CombinationKey, f64)>, size: u64) -> Result<RankedKeyList> {
    sort_ranked(&mut entries);
    Ok(RankedKeyList {
        entries,
        key_space_size: size,
    })
}

/// Per-phase candidate transition values for full or grid spaces, ascending.
fn candidate_transitions(space: &KeySpace, spec: &LockSpec) -> Result<Vec<Vec<u32>>> {
    let lists: Vec<Vec<u32>> = spec
        .phases
        .iter()
        .map(|ph| match space {
            KeySpace::Grid { step } => (ph.transition_min..=ph.transition_max)
                .filter(|t| t % step == 0)
                .collect(),
            _ => (ph.transition_min..=ph.transition_max).collect(),
        })
        .collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Err(Error::InvalidArgument(
            "a phase has no candidate transitions in this space".into(),
        ));
    }
    Ok(lists)
}

/// One frontier point of the best-first search: indices into the per-phase
/// score-sorted candidate lists.
struct Node {
    score: f64,
    idx: Vec<u32>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

/// Top-r keys by summed log score without materializing the product space:
/// a max-heap frontier over per-phase candidate lists sorted by descending
/// score, deduplicated with a visited set. Whole blocks of bit-equal scores
/// are drained together and emitted in ascending key order, so the output
/// order matches [`rank_keys_exhaustive`] exactly. In restricted mode only
/// members of the set count toward r.
pub fn rank_keys_lazy(
    scores: &[Vec<f64>],
    space: KeySpace,
    r: usize,
    profile: &AttackProfile,
) -> Result<RankedKeyList> {
    let spec = &profile.spec;
    check_scores(scores, spec)?;
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let size = space.size(spec)?;

    // Candidate lists: (log score, transition), best score first, ascending
    // transition among equal scores for determinism.
    let value_space = match space {
        KeySpace::Set(_) => KeySpace::Full,
        other => other,
    };
    let lists: Vec<Vec<(f64, u32)>> = candidate_transitions(&value_space, spec)?
        .into_iter()
        .zip(scores)
        .zip(&spec.phases)
        .map(|((cands, s), ph)| {
            let mut l: Vec<(f64, u32)> = cands
                .into_iter()
                .map(|t| (s[(t - ph.transition_min) as usize], t))
                .collect();
            l.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            l
        })
        .collect();

    // Mixed-radix node ids for the visited set.
    let mut radix = Vec::with_capacity(lists.len());
    let mut stride: u128 = 1;
    for l in &lists {
        radix.push(stride);
        stride = stride
            .checked_mul(l.len() as u128)
            .ok_or_else(|| Error::Unsupported("key space too large for lazy enumeration".into()))?;
    }
    let node_id =
        |idx: &[u32]| -> u128 { idx.iter().zip(&radix).map(|(&i, &r)| i as u128 * r).sum() };
    // Summing in fixed phase order keeps scores bit-identical to the
    // exhaustive path, so tie blocks agree between the two.
    let node_score =
        |idx: &[u32]| -> f64 { idx.iter().zip(&lists).map(|(&i, l)| l[i as usize].0).sum() };

    let root = vec![0u32; lists.len()];
    let mut visited: HashSet<u128> = HashSet::new();
    visited.insert(node_id(&root));
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        score: node_score(&root),
        idx: root,
    });
    let mut entries: Vec<(CombinationKey, f64)> = Vec::new();

    'outer: while let Some(top) = heap.peek() {
        let block_bits = top.score.to_bits();
        let mut block: Vec<Node> = Vec::new();
        while let Some(top) = heap.peek() {
            if top.score.to_bits() != block_bits {
                break;
            }
            let node = heap.pop().unwrap();
            for p in 0..lists.len() {
                let mut child = node.idx.clone();
                child[p] += 1;
                if (child[p] as usize) < lists[p].len() && visited.insert(node_id(&child)) {
                    heap.push(Node {
                        score: node_score(&child),
                        idx: child,
                    });
                }
            }
            block.push(node);
        }
        let mut block_keys: Vec<(CombinationKey, f64)> = block
            .iter()
            .map(|node| {
                let theta = node
                    .idx
                    .iter()
                    .zip(&lists)
                    .map(|(&i, l)| l[i as usize].1)
                    .collect();
                let key = transitions_to_key(&TransitionVector::new(theta), profile.start, spec)?;
                Ok((key, node.score))
            })
            .collect::<Result<_>>()?;
        block_keys.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        for (key, score) in block_keys {
            if let KeySpace::Set(set) = space {
                if !set.contains(&key) {
                    continue;
                }
            }
            entries.push((key, score));
            if entries.len() == r {
                break 'outer;
            }
        }
    }

    Ok(RankedKeyList {
        entries,
        key_space_size: size,
    })
}
