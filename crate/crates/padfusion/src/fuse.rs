//! Closed-form score-level fusion rules and error-rate-derived weight
//! estimation for the weighted sum rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score_model::PadClass;
use crate::threat::{compute_roc, find_operating_point};

/// Per-scheme EERs below this value are clamped before inversion so a
/// perfectly separating scheme keeps a finite, dominant weight.
pub const EER_CLAMP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FuseError {
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot fuse an empty score vector")]
    EmptyVector,
    #[error("weight estimation needs both bona fide and attack records")]
    MissingLabelClass,
    #[error("weight estimation got no training rows")]
    EmptyTrainingSplit,
}

/// One closed-form fusion rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FusionRule {
    Min,
    Max,
    Sum,
    WeightedSum(Vec<f64>),
}

impl FusionRule {
    /// Builds a weighted-sum rule, checking the weight invariants.
    pub fn weighted_sum(weights: Vec<f64>) -> Result<FusionRule, FuseError> {
        if weights.is_empty() {
            return Err(FuseError::EmptyVector);
        }
        debug_assert!(weights.iter().all(|w| *w >= 0.0));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        Ok(FusionRule::WeightedSum(weights))
    }
}

/// Fuses one normalized score vector into a scalar.
pub fn fuse(x: &[f64], rule: &FusionRule) -> Result<f64, FuseError> {
    if x.is_empty() {
        return Err(FuseError::EmptyVector);
    }
    match rule {
        FusionRule::Min => Ok(x.iter().copied().fold(f64::INFINITY, f64::min)),
        FusionRule::Max => Ok(x.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        FusionRule::Sum => Ok(x.iter().sum()),
        FusionRule::WeightedSum(weights) => {
            if weights.len() != x.len() {
                return Err(FuseError::DimensionMismatch {
                    expected: weights.len(),
                    got: x.len(),
                });
            }
            Ok(x.iter().zip(weights).map(|(s, w)| s * w).sum())
        }
    }
}

/// Matcher-weighting weights, inversely proportional to per-scheme EERs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeWeights {
    pub weights: Vec<f64>,
    /// Per-scheme training-split EER estimates the weights derive from
    /// (unclamped).
    pub eer_estimates: Vec<f64>,
}

/// Estimates per-scheme weights from a training split: each scheme's bona
/// fide vs attack scores yield an EER estimate, and weights are the
/// normalized reciprocals. Zero EERs are clamped to [`EER_CLAMP`].
pub fn estimate_weights(
    rows: &[Vec<f64>],
    classes: &[PadClass],
) -> Result<SchemeWeights, FuseError> {
    if rows.is_empty() {
        return Err(FuseError::EmptyTrainingSplit);
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(FuseError::EmptyVector);
    }
    let bona_fide: Vec<&Vec<f64>> = rows
        .iter()
        .zip(classes)
        .filter(|(_, c)| **c == PadClass::BonaFide)
        .map(|(r, _)| r)
        .collect();
    let attack: Vec<&Vec<f64>> = rows
        .iter()
        .zip(classes)
        .filter(|(_, c)| **c == PadClass::Attack)
        .map(|(r, _)| r)
        .collect();
    if bona_fide.is_empty() || attack.is_empty() {
        return Err(FuseError::MissingLabelClass);
    }

    let mut eer_estimates = Vec::with_capacity(width);
    for j in 0..width {
        let bf: Vec<f64> = bona_fide.iter().map(|r| r[j]).collect();
        let at: Vec<f64> = attack.iter().map(|r| r[j]).collect();
        let roc = compute_roc(&bf, &at).expect("non-empty classes");
        eer_estimates.push(find_operating_point(&roc).eer);
    }
    Ok(weights_from_eers(&eer_estimates))
}

/// Derives normalized weights from EER estimates.
pub fn weights_from_eers(eers: &[f64]) -> SchemeWeights {
    let inverses: Vec<f64> = eers.iter().map(|&e| 1.0 / e.max(EER_CLAMP)).collect();
    let total: f64 = inverses.iter().sum();
    SchemeWeights {
        weights: inverses.iter().map(|v| v / total).collect(),
        eer_estimates: eers.to_vec(),
    }
}
