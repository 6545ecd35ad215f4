//! Evaluation harness: top-r success curves, improvement factors, Monte
//! Carlo ranking experiments, inference-error deviations, combination-length
//! analysis, and a paired t-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{score_transition_candidates, KeySpace, TransitionEstimate};
use crate::error::{Error, Result};
use crate::lock::{
    combination_length, key_to_transitions, transitions_to_key, CombinationKey, LockSpec,
    TransitionVector,
};

/// Default combination-length cutoff for [`length_analysis`].
pub const LENGTH_THRESHOLD: u32 = 150;

/// One evaluated r value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: usize,
    pub success_rate: f64,
    pub improvement_factor: f64,
}

/// Top-r success curve from a batch of ranking experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopRCurve {
    pub points: Vec<CurvePoint>,
    pub key_space_size: u64,
    pub trials: usize,
}

/// Fraction of ranks at or below r. `None` ranks count as misses.
pub fn success_at_r(ranks: &[Option<usize>], r: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::UndefinedMetric("success rate of zero ranks".into()));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let hits = ranks
        .iter()
        .filter(|rk| matches!(rk, Some(x) if *x <= r))
        .count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Success rate relative to random guessing with r attempts in `space` keys.
pub fn improvement_factor(rate: f64, r: usize, space: u64) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    if r as u64 > space {
        return Err(Error::InvalidArgument(format!(
            "r = {r} exceeds the {space}-key space"
        )));
    }
    Ok(rate * space as f64 / r as f64)
}

fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-phase candidate transitions of a space (the set variant scores its
/// keys directly and needs no lists).
fn space_candidates(space: &KeySpace, spec: &LockSpec) -> Result<Vec<Vec<u32>>> {
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

/// Walks the product of candidate lists accumulating the summed score in
/// phase order (so totals are bit-identical to the rankers'), counting
/// strictly better tuples and collecting exact ties.
fn count_better(
    scores: &[Vec<f64>],
    candidates: &[Vec<u32>],
    spec: &LockSpec,
    truth_score: f64,
    ties: &mut Vec<TransitionVector>,
    prefix: &mut Vec<u32>,
    partial: f64,
) -> u64 {
    let p = prefix.len();
    let ph = &spec.phases[p];
    let mut better = 0;
    if p + 1 == spec.phase_count() {
        for &t in &candidates[p] {
            let total = partial + scores[p][(t - ph.transition_min) as usize];
            if total > truth_score {
                better += 1;
            } else if total == truth_score {
                let mut theta = prefix.clone();
                theta.push(t);
                ties.push(TransitionVector::new(theta));
            }
        }
        return better;
    }
    for &t in &candidates[p] {
        let s = partial + scores[p][(t - ph.transition_min) as usize];
        prefix.push(t);
        better += count_better(scores, candidates, spec, truth_score, ties, prefix, s);
        prefix.pop();
    }
    better
}

/// One Monte Carlo trial: sample a true key from the space, blur its
/// transitions with per-phase Gaussian noise, and rank it among all keys of
/// the space under the same ordering the rankers use.
fn mc_trial(
    spec: &LockSpec,
    sigma: &[f64],
    space: &KeySpace,
    candidates: &[Vec<u32>],
    start: u32,
    seed: u64,
) -> Result<(CombinationKey, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth_theta: Vec<u32> = match space {
        KeySpace::Set(set) => {
            let key = &set.keys()[rng.random_range(0..set.len())];
            key_to_transitions(key, start, spec)?.theta
        }
        _ => candidates
            .iter()
            .map(|c| c[rng.random_range(0..c.len())])
            .collect(),
    };
    let truth_tv = TransitionVector::new(truth_theta.clone());
    let truth_key = transitions_to_key(&truth_tv, start, spec)?;

    let theta_bar: Vec<f64> = truth_theta
        .iter()
        .zip(sigma)
        .map(|(&t, &s)| {
            if s > 0.0 {
                let normal = Normal::new(0.0, s).expect("validated sigma");
                t as f64 + normal.sample(&mut rng)
            } else {
                t as f64
            }
        })
        .collect();
    let scores: Vec<Vec<f64>> = spec
        .phases
        .iter()
        .enumerate()
        .map(|(p, ph)| score_transition_candidates(theta_bar[p], sigma[p], ph))
        .collect();
    let truth_score: f64 = truth_theta
        .iter()
        .zip(&spec.phases)
        .zip(&scores)
        .map(|((&t, ph), s)| s[(t - ph.transition_min) as usize])
        .sum();

    let (better, tied_below) = match space {
        KeySpace::Set(set) => {
            let mut better = 0u64;
            let mut tied = 0u64;
            for key in set.keys() {
                if key == &truth_key {
                    continue;
                }
                let tv = key_to_transitions(key, start, spec)?;
                let score: f64 = tv
                    .theta
                    .iter()
                    .zip(&spec.phases)
                    .zip(&scores)
                    .map(|((&t, ph), s)| s[(t - ph.transition_min) as usize])
                    .sum();
                if score > truth_score {
                    better += 1;
                } else if score == truth_score && key < &truth_key {
                    tied += 1;
                }
            }
            (better, tied)
        }
        _ => {
            let mut ties = Vec::new();
            let mut prefix = Vec::with_capacity(spec.phase_count());
            let better = count_better(
                &scores,
                candidates,
                spec,
                truth_score,
                &mut ties,
                &mut prefix,
                0.0,
            );
            let mut tied = 0u64;
            for tv in ties {
                if tv.theta == truth_theta {
                    continue;
                }
                if transitions_to_key(&tv, start, spec)? < truth_key {
                    tied += 1;
                }
            }
            (better, tied)
        }
    };
    Ok((truth_key, (better + tied_below) as usize + 1))
}

/// Seeded parallel Monte Carlo: per-trial (true key, rank of truth).
pub fn monte_carlo_ranks(
    spec: &LockSpec,
    sigma: &[f64],
    space: KeySpace,
    trials: usize,
    seed: u64,
) -> Result<Vec<(CombinationKey, usize)>> {
    spec.validate()?;
    if sigma.len() != spec.phase_count() {
        return Err(Error::InvalidArgument(format!(
            "{} sigmas for a {}-phase lock",
            sigma.len(),
            spec.phase_count()
        )));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidArgument(
            "sigmas must be finite and >= 0".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if let KeySpace::Set(set) = &space {
        if set.is_empty() {
            return Err(Error::InvalidArgument("empty key set".into()));
        }
    }
    let start = spec.start_default;
    let candidates = space_candidates(&space, spec)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|i| mc_trial(spec, sigma, &space, &candidates, start, splitmix(seed, i)))
        .collect()
}

/// Runs [`monte_carlo_ranks`] and aggregates a success curve over `r_list`.
pub fn monte_carlo_topr(
    spec: &LockSpec,
    sigma: &[f64],
    space: KeySpace,
    trials: usize,
    r_list: &[usize],
    seed: u64,
) -> Result<TopRCurve> {
    let size = space.size(spec)?;
    for &r in r_list {
        if r == 0 || r as u64 > size {
            return Err(Error::InvalidArgument(format!(
                "r = {r} outside the {size}-key space"
            )));
        }
    }
    let ranks = monte_carlo_ranks(spec, sigma, space, trials, seed)?;
    let found: Vec<Option<usize>> = ranks.iter().map(|(_, r)| Some(*r)).collect();
    let points = r_list
        .iter()
        .map(|&r| {
            let rate = success_at_r(&found, r)?;
            Ok(CurvePoint {
                r,
                success_rate: rate,
                improvement_factor: improvement_factor(rate, r, size)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TopRCurve {
        points,
        key_space_size: size,
        trials,
    })
}

/// Sample standard deviation of the estimation error per phase.
pub fn phase_error_deviations(
    predicted: &[TransitionEstimate],
    truth: &[TransitionVector],
) -> Result<Vec<f64>> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} estimates for {} truths",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.len() < 2 {
        return Err(Error::UndefinedMetric(
            "need at least two observations per phase".into(),
        ));
    }
    let phases = truth[0].theta.len();
    let mut out = Vec::with_capacity(phases);
    for p in 0..phases {
        let d: Vec<f64> = predicted
            .iter()
            .zip(truth)
            .map(|(est, tv)| est.theta_bar[p] - tv.theta[p] as f64)
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let ss: f64 = d.iter().map(|v| (v - mean) * (v - mean)).sum();
        out.push((ss / (d.len() - 1) as f64).sqrt());
    }
    Ok(out)
}

/// Fraction of keys whose total dialing length is below `threshold` units.
pub fn length_analysis(
    keys: &[CombinationKey],
    spec: &LockSpec,
    start: u32,
    threshold: u32,
) -> Result<f64> {
    if keys.is_empty() {
        return Err(Error::UndefinedMetric(
            "length fraction of zero keys".into(),
        ));
    }
    let mut short = 0usize;
    for key in keys {
        if combination_length(key, start, spec)? < threshold {
            short += 1;
        }
    }
    Ok(short as f64 / keys.len() as f64)
}

/// Paired two-tailed t-test on matched samples. Identical inputs give
/// (t = 0, p = 1); a nonzero constant shift has no variance to test and is
/// an error.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "sample lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("need at least two pairs".into()));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let ss: f64 = d.iter().map(|v| (v - mean) * (v - mean)).sum();
    let var = ss / (n - 1.0);
    if var == 0.0 {
        if mean == 0.0 {
            return Ok((0.0, 1.0));
        }
        return Err(Error::DegenerateTest);
    }
    let t = mean / (var / n).sqrt();
    let df = n - 1.0;
    let p = statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t * t));
    Ok((t, p))
}
