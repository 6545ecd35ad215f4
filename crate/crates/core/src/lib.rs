//! Recovery of rotary combination-lock keys from wrist angular-velocity
//! traces.
//!
//! The toolkit covers the whole chain: recognizing unlock activity in a
//! continuous gyroscope stream, segmenting an unlock event into dialing
//! phases, inverting per-phase linear displacement models into transition
//! estimates, reconstructing the dialed key, and ranking candidate keys by
//! likelihood so an attacker can try the most probable ones first. A
//! synthetic trace generator and a Monte Carlo harness close the loop for
//! validation without hardware.

pub mod attack;
pub mod error;
pub mod eval;
pub mod io;
pub mod lock;
pub mod pipeline;
pub mod recognition;
pub mod regression;
pub mod segmentation;
pub mod signal;
pub mod synth;

pub use attack::{
    default_min_spins, infer_key_deterministic, infer_transition, rank_keys_exhaustive,
    rank_keys_lazy, rank_of_truth, score_transition_candidates, AttackProfile, KeySpace,
    PhaseModels, RankedKeyList, Strategy, TransitionEstimate, EXHAUSTIVE_GUARD,
    PROFILE_SCHEMA_VERSION, SIGMA_FLOOR,
};
pub use error::{Error, Result};
pub use eval::{
    improvement_factor, length_analysis, monte_carlo_ranks, monte_carlo_topr, paired_t_test,
    phase_error_deviations, success_at_r, CurvePoint, TopRCurve, LENGTH_THRESHOLD,
};
pub use lock::{
    combination_length, implemented_key_set, key_to_transitions, parse_key_list,
    transitions_to_key, CombinationKey, Direction, KeySet, KeySetProvenance, LockSpec, PhaseSpec,
    TransitionVector,
};
pub use pipeline::{attack_trace, rank_trace, EventAttack};
pub use recognition::{
    detect_spins, detect_unlock_events, flag_spin_windows, learn_spin_profile, FeatureStats,
    SpinProfile, SpinWindow, UnlockEvent,
};
pub use regression::{
    averaged_sigma, fit_linear_models, predict_transition, LinearModel, Sign, TrainingPair,
};
pub use segmentation::{segment_phases, segment_phases_traced, PhaseSegments, SegmentationTrace};
pub use signal::{
    find_top_peaks, gaussian_kernel, gaussian_smooth, integrate_displacement, DisplacementFeatures,
    GyroTrace,
};
pub use synth::{
    synthesize_day_trace, synthesize_unlock_trace, GroundTruth, LabelKind, SynthConfig, TraceLabel,
};
