//! Least-squares training of per-phase, per-sign linear displacement models
//! alpha = slope * theta + intercept, plus inversion back to transitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive or negative displacement side of a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sign::Positive => write!(f, "positive"),
            Sign::Negative => write!(f, "negative"),
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+" => Ok(Sign::Positive),
            "negative" | "neg" | "-" => Ok(Sign::Negative),
            other => Err(Error::InvalidArgument(format!("unknown sign {other:?}"))),
        }
    }
}

/// A fitted line alpha = slope * theta + intercept with the deviation of its
/// transition-space inversion errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Radians per dial unit.
    pub slope: f64,
    /// Radians.
    pub intercept: f64,
    /// Sample standard deviation of theta - invert(alpha) over the training
    /// pairs, in dial units.
    pub residual_sigma: f64,
}

impl LinearModel {
    pub fn new(slope: f64, intercept: f64, residual_sigma: f64) -> Self {
        LinearModel {
            slope,
            intercept,
            residual_sigma,
        }
    }

    /// Predicted displacement for a transition.
    pub fn alpha(&self, theta: f64) -> f64 {
        self.slope * theta + self.intercept
    }
}

/// One observed (transition, displacement) training point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingPair {
    /// Phase index, 0-based.
    pub phase: usize,
    pub sign: Sign,
    pub theta: f64,
    pub alpha: f64,
}

/// Inverts a model: transition estimate for an observed displacement,
/// unrounded and unclamped.
pub fn predict_transition(model: &LinearModel, alpha: f64) -> Result<f64> {
    if model.slope == 0.0 {
        return Err(Error::NonInvertibleModel);
    }
    Ok((alpha - model.intercept) / model.slope)
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

fn ols(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Ordinary least squares per (phase, sign) group, alpha regressed on theta.
///
/// Returns one positive and one negative model per phase, indexed by phase.
/// `residual_sigma` is the sample standard deviation of the transition-space
/// inversion errors theta - (alpha - intercept)/slope over the group.
pub fn fit_linear_models(
    pairs: &[TrainingPair],
    phase_count: usize,
) -> Result<Vec<(LinearModel, LinearModel)>> {
    let mut out = Vec::with_capacity(phase_count);
    for phase in 0..phase_count {
        let mut fitted = [None::<LinearModel>, None::<LinearModel>];
        for (slot, sign) in [(0, Sign::Positive), (1, Sign::Negative)] {
            let pts: Vec<(f64, f64)> = pairs
                .iter()
                .filter(|p| p.phase == phase && p.sign == sign)
                .map(|p| (p.theta, p.alpha))
                .collect();
            let (slope, intercept) = ols(&pts).ok_or(Error::UnderdeterminedFit {
                phase: phase + 1,
                sign: sign.to_string(),
            })?;
            let model = LinearModel::new(slope, intercept, 0.0);
            let residuals: Vec<f64> = pts
                .iter()
                .map(|&(theta, alpha)| Ok(theta - predict_transition(&model, alpha)?))
                .collect::<Result<_>>()?;
            fitted[slot] = Some(LinearModel {
                residual_sigma: sample_std(&residuals),
                ..model
            });
        }
        out.push((fitted[0].unwrap(), fitted[1].unwrap()));
    }
    Ok(out)
}

/// Deviation of the averaged-inversion errors for one phase, when the
/// positive and negative groups observe the same transitions.
///
/// The two groups are matched by sorted theta; if their transition multisets
/// differ the deviation falls back to the uncorrelated combination
/// sqrt(sigma_pos^2 + sigma_neg^2) / 2.
pub fn averaged_sigma(
    pairs: &[TrainingPair],
    phase: usize,
    pos: &LinearModel,
    neg: &LinearModel,
) -> Result<f64> {
    let mut pos_pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.phase == phase && p.sign == Sign::Positive)
        .map(|p| (p.theta, p.alpha))
        .collect();
    let mut neg_pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|p| p.phase == phase && p.sign == Sign::Negative)
        .map(|p| (p.theta, p.alpha))
        .collect();
    pos_pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    neg_pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let matched =
        pos_pts.len() == neg_pts.len() && pos_pts.iter().zip(&neg_pts).all(|(a, b)| a.0 == b.0);
    if matched && pos_pts.len() >= 2 {
        let residuals: Vec<f64> = pos_pts
            .iter()
            .zip(&neg_pts)
            .map(|(&(theta, ap), &(_, an))| {
                let tp = predict_transition(pos, ap)?;
                let tn = predict_transition(neg, an)?;
                Ok(theta - 0.5 * (tp + tn))
            })
            .collect::<Result<_>>()?;
        Ok(sample_std(&residuals))
    } else {
        let sp = pos.residual_sigma;
        let sn = neg.residual_sigma;
        Ok(0.5 * (sp * sp + sn * sn).sqrt())
    }
}
