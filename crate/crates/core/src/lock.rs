//! Arithmetic model of rotary combination locks: dial geometry, key/transition
//! conversion, and generation of the factory-restricted key set.
//!
//! A "transition" is the number of unit steps traversed on the dial during one
//! phase of the unlock procedure. Each phase sweeps a fixed direction and its
//! transition falls in a fixed range (e.g. 81..=120 for the first padlock
//! phase, which includes the two mandatory full turns). For a fixed starting
//! position the mapping between keys and transition vectors is a bijection.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rotation direction of one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Clockwise => Direction::Counterclockwise,
            Direction::Counterclockwise => Direction::Clockwise,
        }
    }
}

/// One directional sweep of the unlock procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub direction: Direction,
    pub transition_min: u32,
    pub transition_max: u32,
}

impl PhaseSpec {
    pub fn contains(&self, theta: u32) -> bool {
        theta >= self.transition_min && theta <= self.transition_max
    }

    pub fn width(&self) -> u32 {
        self.transition_max - self.transition_min + 1
    }
}

/// Dial geometry and phase layout of a rotary combination lock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockSpec {
    pub name: String,
    pub dial_size: u32,
    pub phases: Vec<PhaseSpec>,
    pub start_default: u32,
}

impl LockSpec {
    /// 40-number padlock: three phases, clockwise first, ranges
    /// [81,120], [41,80], [1,40] (two clearing turns before the first stop).
    pub fn padlock() -> Self {
        LockSpec::alternating("padlock", 40, 3, Direction::Clockwise, 2)
    }

    /// 100-number safe: four phases, counterclockwise first, ranges
    /// [401,500], [201,300], [101,200], [1,100] (four clearing turns before
    /// the first stop).
    pub fn safe() -> Self {
        LockSpec::alternating("safe", 100, 4, Direction::Counterclockwise, 4)
    }

    /// Builds a lock whose phases alternate direction. Phase `i` (1-based,
    /// `i >= 2`) covers transitions [(P-i)*dial+1, (P-i+1)*dial]; the first
    /// phase starts after `first_phase_turns` full clearing rotations, so it
    /// covers [turns*dial+1, (turns+1)*dial].
    pub fn alternating(
        name: &str,
        dial_size: u32,
        phase_count: usize,
        first: Direction,
        first_phase_turns: u32,
    ) -> Self {
        let mut phases = Vec::with_capacity(phase_count);
        let mut dir = first;
        for i in 0..phase_count {
            let base = if i == 0 {
                first_phase_turns * dial_size
            } else {
                (phase_count - 1 - i) as u32 * dial_size
            };
            phases.push(PhaseSpec {
                direction: dir,
                transition_min: base + 1,
                transition_max: base + dial_size,
            });
            dir = dir.opposite();
        }
        LockSpec {
            name: name.to_string(),
            dial_size,
            phases,
            start_default: 0,
        }
    }

    pub fn phase_count(&self) -> usize {
        self.phases.len()
    }

    pub fn key_space_size(&self) -> u64 {
        (self.dial_size as u64).pow(self.phase_count() as u32)
    }

    /// Checks structural invariants: alternating directions and the
    /// stacked-range layout of the phase transition windows.
    pub fn validate(&self) -> Result<()> {
        if self.dial_size == 0 || self.phases.is_empty() {
            return Err(Error::InvalidArgument(
                "lock needs a nonzero dial and at least one phase".into(),
            ));
        }
        if self.start_default >= self.dial_size {
            return Err(Error::InvalidArgument(format!(
                "default start {} outside dial 0..{}",
                self.start_default, self.dial_size
            )));
        }
        let p = self.phase_count() as u32;
        for (i, ph) in self.phases.iter().enumerate() {
            let i1 = i as u32 + 1;
            if i == 0 {
                // The first phase may include extra clearing rotations, but
                // its floor must be a whole number of turns and sit at or
                // above the stacked position of the remaining phases.
                let base = ph.transition_min.wrapping_sub(1);
                let min_base = (p - 1) * self.dial_size;
                if ph.transition_min == 0
                    || base % self.dial_size != 0
                    || base < min_base
                    || ph.transition_max != base + self.dial_size
                {
                    return Err(Error::InvalidArgument(format!(
                        "phase 1 range [{},{}] is not a whole-turn window at or \
                         above [{},{}]",
                        ph.transition_min,
                        ph.transition_max,
                        min_base + 1,
                        min_base + self.dial_size
                    )));
                }
            } else {
                let want_min = (p - i1) * self.dial_size + 1;
                let want_max = (p - i1 + 1) * self.dial_size;
                if ph.transition_min != want_min || ph.transition_max != want_max {
                    return Err(Error::InvalidArgument(format!(
                        "phase {} range [{},{}] does not match expected [{},{}]",
                        i1, ph.transition_min, ph.transition_max, want_min, want_max
                    )));
                }
            }
            if i > 0 && ph.direction != self.phases[i - 1].direction.opposite() {
                return Err(Error::InvalidArgument(format!(
                    "phase {} does not alternate direction",
                    i1
                )));
            }
        }
        Ok(())
    }
}

/// A combination key: one dial number per phase, each in [0, dial_size).
///
/// The derived `Ord` is lexicographic over digits, which is the tie order
/// used everywhere a deterministic ranking is needed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CombinationKey {
    pub digits: Vec<u32>,
}

impl CombinationKey {
    pub fn new(digits: Vec<u32>) -> Self {
        CombinationKey { digits }
    }

    pub fn validate(&self, spec: &LockSpec) -> Result<()> {
        if self.digits.len() != spec.phase_count() {
            return Err(Error::InvalidArgument(format!(
                "key {} has {} digits, lock {} has {} phases",
                self,
                self.digits.len(),
                spec.name,
                spec.phase_count()
            )));
        }
        for &d in &self.digits {
            if d >= spec.dial_size {
                return Err(Error::InvalidArgument(format!(
                    "key digit {} outside dial 0..{}",
                    d, spec.dial_size
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CombinationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for CombinationKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .trim()
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidArgument(format!("bad key digit {part:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if digits.is_empty() {
            return Err(Error::InvalidArgument("empty key".into()));
        }
        Ok(CombinationKey { digits })
    }
}

/// Per-phase dial traversals for one unlock, in units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionVector {
    pub theta: Vec<u32>,
}

impl TransitionVector {
    pub fn new(theta: Vec<u32>) -> Self {
        TransitionVector { theta }
    }

    pub fn validate(&self, spec: &LockSpec) -> Result<()> {
        if self.theta.len() != spec.phase_count() {
            return Err(Error::InvalidArgument(format!(
                "transition vector has {} entries, lock has {} phases",
                self.theta.len(),
                spec.phase_count()
            )));
        }
        for (i, (&t, ph)) in self.theta.iter().zip(&spec.phases).enumerate() {
            if !ph.contains(t) {
                return Err(Error::InvalidArgument(format!(
                    "phase {} transition {} outside [{},{}]",
                    i + 1,
                    t,
                    ph.transition_min,
                    ph.transition_max
                )));
            }
        }
        Ok(())
    }
}

fn check_start(start: u32, spec: &LockSpec) -> Result<()> {
    if start >= spec.dial_size {
        return Err(Error::InvalidArgument(format!(
            "start {} outside dial 0..{}",
            start, spec.dial_size
        )));
    }
    Ok(())
}

/// Next dial position after sweeping `theta` units from `pos`.
fn advance(pos: u32, theta: u32, dir: Direction, dial: u32) -> u32 {
    let step = theta % dial;
    match dir {
        // Clockwise entry decreases the facing number.
        Direction::Clockwise => (pos + dial - step) % dial,
        Direction::Counterclockwise => (pos + step) % dial,
    }
}

/// Converts a key to the per-phase transitions entered when dialing it from
/// `start`. A zero residue means a full extra rotation, so it maps to the
/// range maximum.
pub fn key_to_transitions(
    key: &CombinationKey,
    start: u32,
    spec: &LockSpec,
) -> Result<TransitionVector> {
    key.validate(spec)?;
    check_start(start, spec)?;
    let dial = spec.dial_size;
    let mut pos = start;
    let mut theta = Vec::with_capacity(spec.phase_count());
    for (ph, &digit) in spec.phases.iter().zip(&key.digits) {
        let residue = match ph.direction {
            Direction::Clockwise => (pos + dial - digit) % dial,
            Direction::Counterclockwise => (digit + dial - pos) % dial,
        };
        let residue = if residue == 0 { dial } else { residue };
        theta.push(ph.transition_min - 1 + residue);
        pos = digit;
    }
    Ok(TransitionVector { theta })
}

/// Converts per-phase transitions back to the key they dial, starting from
/// `start`. Exact modular inverse of [`key_to_transitions`].
pub fn transitions_to_key(
    theta: &TransitionVector,
    start: u32,
    spec: &LockSpec,
) -> Result<CombinationKey> {
    theta.validate(spec)?;
    check_start(start, spec)?;
    let mut pos = start;
    let mut digits = Vec::with_capacity(spec.phase_count());
    for (ph, &t) in spec.phases.iter().zip(&theta.theta) {
        pos = advance(pos, t, ph.direction, spec.dial_size);
        digits.push(pos);
    }
    Ok(CombinationKey { digits })
}

/// Total units traversed when entering `key` from `start`.
pub fn combination_length(key: &CombinationKey, start: u32, spec: &LockSpec) -> Result<u32> {
    Ok(key_to_transitions(key, start, spec)?.theta.iter().sum())
}

/// Where a key set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeySetProvenance {
    GeneratedRule,
    File,
}

/// A restricted set of candidate keys, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySet {
    keys: Vec<CombinationKey>,
    pub provenance: KeySetProvenance,
}

impl KeySet {
    pub fn new(mut keys: Vec<CombinationKey>, provenance: KeySetProvenance) -> Self {
        keys.sort();
        keys.dedup();
        KeySet { keys, provenance }
    }

    pub fn keys(&self) -> &[CombinationKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &CombinationKey) -> bool {
        self.keys.binary_search(key).is_ok()
    }
}

/// Generates the factory-restricted padlock key set.
///
/// Mass-produced 40-number padlocks draw combinations from the congruence
/// family {<a,b,c> : a = c (mod 4), b = c+2 (mod 4)}, which yields exactly
/// 40 * 10 * 10 = 4000 keys. Only defined for the padlock layout.
pub fn implemented_key_set(spec: &LockSpec) -> Result<KeySet> {
    if spec.dial_size != 40 || spec.phase_count() != 3 {
        return Err(Error::Unsupported(format!(
            "restricted key set rule is only defined for the 40-number padlock, not {}",
            spec.name
        )));
    }
    let mut keys = Vec::with_capacity(4000);
    for c in 0..40u32 {
        let ra = c % 4;
        let rb = (c + 2) % 4;
        for a in (ra..40).step_by(4) {
            for b in (rb..40).step_by(4) {
                keys.push(CombinationKey::new(vec![a, b, c]));
            }
        }
    }
    Ok(KeySet::new(keys, KeySetProvenance::GeneratedRule))
}

/// Parses a key-list document: one key per line, digits joined by '-';
/// blank lines and lines starting with '#' are skipped.
pub fn parse_key_list(text: &str, spec: &LockSpec) -> Result<KeySet> {
    let mut keys = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let key: CombinationKey = line.parse().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("{e}"),
        })?;
        key.validate(spec).map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("{e}"),
        })?;
        keys.push(key);
    }
    Ok(KeySet::new(keys, KeySetProvenance::File))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(digits: &[u32]) -> CombinationKey {
        CombinationKey::new(digits.to_vec())
    }

    #[test]
    fn padlock_layout() {
        let spec = LockSpec::padlock();
        spec.validate().unwrap();
        assert_eq!(spec.dial_size, 40);
        assert_eq!(spec.key_space_size(), 64_000);
        let ranges: Vec<(u32, u32)> = spec
            .phases
            .iter()
            .map(|p| (p.transition_min, p.transition_max))
            .collect();
        assert_eq!(ranges, vec![(81, 120), (41, 80), (1, 40)]);
        assert_eq!(spec.phases[0].direction, Direction::Clockwise);
        assert_eq!(spec.phases[1].direction, Direction::Counterclockwise);
        assert_eq!(spec.phases[2].direction, Direction::Clockwise);
    }

    #[test]
    fn safe_layout() {
        let spec = LockSpec::safe();
        spec.validate().unwrap();
        assert_eq!(spec.key_space_size(), 100_000_000);
        let ranges: Vec<(u32, u32)> = spec
            .phases
            .iter()
            .map(|p| (p.transition_min, p.transition_max))
            .collect();
        assert_eq!(ranges, vec![(401, 500), (201, 300), (101, 200), (1, 100)]);
        assert_eq!(spec.phases[0].direction, Direction::Counterclockwise);
    }

    #[test]
    fn padlock_key_to_transitions_examples() {
        let spec = LockSpec::padlock();
        let t = key_to_transitions(&key(&[10, 30, 0]), 0, &spec).unwrap();
        assert_eq!(t.theta, vec![110, 60, 30]);
        let t = key_to_transitions(&key(&[0, 0, 0]), 0, &spec).unwrap();
        assert_eq!(t.theta, vec![120, 80, 40]);
    }

    #[test]
    fn shortest_padlock_combination() {
        let spec = LockSpec::padlock();
        let k = transitions_to_key(&TransitionVector::new(vec![81, 41, 1]), 0, &spec).unwrap();
        assert_eq!(k, key(&[39, 0, 39]));
        assert_eq!(combination_length(&k, 0, &spec).unwrap(), 123);
    }

    #[test]
    fn range_maximum_key() {
        let spec = LockSpec::padlock();
        let k = transitions_to_key(&TransitionVector::new(vec![120, 80, 40]), 0, &spec).unwrap();
        assert_eq!(k, key(&[0, 0, 0]));
        assert_eq!(combination_length(&k, 0, &spec).unwrap(), 240);
    }

    #[test]
    fn safe_examples() {
        let spec = LockSpec::safe();
        let t = key_to_transitions(&key(&[25, 50, 75, 0]), 0, &spec).unwrap();
        assert_eq!(t.theta, vec![425, 275, 125, 75]);
        let k = transitions_to_key(&t, 0, &spec).unwrap();
        assert_eq!(k, key(&[25, 50, 75, 0]));
    }

    #[test]
    fn round_trip_all_padlock_keys_start_zero() {
        let spec = LockSpec::padlock();
        for a in 0..40 {
            for b in 0..40 {
                for c in 0..40 {
                    let k = key(&[a, b, c]);
                    let t = key_to_transitions(&k, 0, &spec).unwrap();
                    t.validate(&spec).unwrap();
                    assert_eq!(transitions_to_key(&t, 0, &spec).unwrap(), k);
                }
            }
        }
    }

    #[test]
    fn start_out_of_range_rejected() {
        let spec = LockSpec::padlock();
        assert!(key_to_transitions(&key(&[1, 2, 3]), 40, &spec).is_err());
    }

    #[test]
    fn transition_out_of_range_rejected() {
        let spec = LockSpec::padlock();
        let t = TransitionVector::new(vec![80, 41, 1]);
        assert!(transitions_to_key(&t, 0, &spec).is_err());
    }

    #[test]
    fn restricted_set_has_4000_members() {
        let spec = LockSpec::padlock();
        let set = implemented_key_set(&spec).unwrap();
        assert_eq!(set.len(), 4000);
        for k in set.keys() {
            let (a, b, c) = (k.digits[0], k.digits[1], k.digits[2]);
            assert_eq!(a % 4, c % 4);
            assert_eq!(b % 4, (c + 2) % 4);
        }
        assert!(implemented_key_set(&LockSpec::safe()).is_err());
    }

    #[test]
    fn key_list_parsing() {
        let spec = LockSpec::padlock();
        let set = parse_key_list("# sample\n10-30-0\n", &spec).unwrap();
        assert_eq!(set.keys(), &[key(&[10, 30, 0])]);
        let err = parse_key_list("10-30-40\n", &spec).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn key_display_and_parse() {
        let k = key(&[10, 30, 0]);
        assert_eq!(k.to_string(), "10-30-0");
        assert_eq!("10-30-0".parse::<CombinationKey>().unwrap(), k);
    }
}
