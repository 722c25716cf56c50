//! Score normalization fitted on a training split.
//!
//! Six strategies: identity, min-max, tanh, z-score, reduction-of-high-scores
//! effect (RHE, using bona fide training statistics), and per-vector unit
//! length. Statistics are always computed on the training split only, per
//! scheme column, with the population standard deviation (divide by N).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score_model::PadClass;

#[derive(Debug, Error)]
pub enum NormError {
    #[error("empty training split")]
    EmptyTrainingSplit,
    #[error("RHE normalization needs at least one bona fide training record")]
    NoBonaFideRecords,
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training rows have inconsistent lengths")]
    RaggedRows,
}

/// The six normalization strategies, in canonical lookup-row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    NoNorm,
    MinMax,
    ZScore,
    Tanh,
    UnitLength,
    Rhe,
}

impl NormMethod {
    /// All methods in the canonical lookup-table row order.
    pub const ALL: [NormMethod; 6] = [
        NormMethod::NoNorm,
        NormMethod::MinMax,
        NormMethod::ZScore,
        NormMethod::Tanh,
        NormMethod::UnitLength,
        NormMethod::Rhe,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            NormMethod::NoNorm => "no-norm",
            NormMethod::MinMax => "min-max-norm",
            NormMethod::ZScore => "z-norm",
            NormMethod::Tanh => "tanh-norm",
            NormMethod::UnitLength => "unit-length-norm",
            NormMethod::Rhe => "rhe-norm",
        }
    }

    pub fn from_id(id: &str) -> Option<NormMethod> {
        NormMethod::ALL.iter().copied().find(|m| m.id() == id)
    }

    /// Row index in the canonical 6x7 lookup grid.
    pub fn row(&self) -> usize {
        NormMethod::ALL.iter().position(|m| m == self).unwrap()
    }

    /// Whether the method uses statistics fitted on the training split.
    pub fn is_fitted(&self) -> bool {
        !matches!(self, NormMethod::NoNorm | NormMethod::UnitLength)
    }
}

impl std::fmt::Display for NormMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Training statistics of one scheme column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub bf_mean: Option<f64>,
    pub bf_std: Option<f64>,
}

/// Fitted normalization parameters. `per_scheme` is empty for the two
/// methods that need no fitted statistics (no-norm and unit-length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerParams {
    pub method: NormMethod,
    pub per_scheme: Vec<SchemeStats>,
    /// Degenerate-scale warnings recorded at fit time.
    pub warnings: Vec<String>,
}

fn column_stats(rows: &[Vec<f64>], classes: &[PadClass], column: usize) -> SchemeStats {
    let values: Vec<f64> = rows.iter().map(|r| r[column]).collect();
    let n = values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();

    let bf: Vec<f64> = rows
        .iter()
        .zip(classes)
        .filter(|(_, c)| **c == PadClass::BonaFide)
        .map(|(r, _)| r[column])
        .collect();
    let (bf_mean, bf_std) = if bf.is_empty() {
        (None, None)
    } else {
        let bn = bf.len() as f64;
        let bmean = bf.iter().sum::<f64>() / bn;
        let bvar = bf.iter().map(|v| (v - bmean) * (v - bmean)).sum::<f64>() / bn;
        (Some(bmean), Some(bvar.sqrt()))
    };
    SchemeStats {
        min,
        max,
        mean,
        std,
        bf_mean,
        bf_std,
    }
}

/// Fits normalization parameters on a training split. `rows` are the raw
/// training score vectors, `classes` their PAD roles (used by RHE for the
/// bona fide statistics).
pub fn fit(
    rows: &[Vec<f64>],
    classes: &[PadClass],
    method: NormMethod,
) -> Result<NormalizerParams, NormError> {
    if !method.is_fitted() {
        return Ok(NormalizerParams {
            method,
            per_scheme: Vec::new(),
            warnings: Vec::new(),
        });
    }
    if rows.is_empty() {
        return Err(NormError::EmptyTrainingSplit);
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(NormError::RaggedRows);
    }
    if method == NormMethod::Rhe && !classes.contains(&PadClass::BonaFide) {
        return Err(NormError::NoBonaFideRecords);
    }

    let per_scheme: Vec<SchemeStats> = (0..width)
        .map(|j| column_stats(rows, classes, j))
        .collect();
    let warnings = degenerate_warnings(method, &per_scheme);

    Ok(NormalizerParams {
        method,
        per_scheme,
        warnings,
    })
}

fn degenerate_warnings(method: NormMethod, per_scheme: &[SchemeStats]) -> Vec<String> {
    let mut warnings = Vec::new();
    for (j, stats) in per_scheme.iter().enumerate() {
        let degenerate = match method {
            NormMethod::MinMax => stats.max == stats.min,
            NormMethod::ZScore | NormMethod::Tanh => stats.std == 0.0,
            NormMethod::Rhe => {
                stats.bf_mean.unwrap_or(0.0) + stats.bf_std.unwrap_or(0.0) - stats.min <= 0.0
            }
            NormMethod::NoNorm | NormMethod::UnitLength => false,
        };
        if degenerate {
            warnings.push(format!(
                "scheme column {j}: degenerate scale for {}; normalized value fixed to 0",
                method.id()
            ));
        }
    }
    warnings
}

impl NormalizerParams {
    /// Restricts fitted parameters to a column subset. Because statistics
    /// are computed per column independently, the result is identical to
    /// fitting on the projected training rows directly.
    pub fn project(&self, columns: &[usize]) -> NormalizerParams {
        if !self.method.is_fitted() {
            return self.clone();
        }
        let per_scheme: Vec<SchemeStats> = columns
            .iter()
            .map(|&j| self.per_scheme[j].clone())
            .collect();
        let warnings = degenerate_warnings(self.method, &per_scheme);
        NormalizerParams {
            method: self.method,
            per_scheme,
            warnings,
        }
    }
}

/// Applies fitted parameters to one score vector.
///
/// Degenerate scales (max = min, zero standard deviation, non-positive RHE
/// denominator) map the affected coordinate to 0. Unit-length normalization
/// is omitted for single-scheme vectors and for zero vectors, which are
/// returned unchanged.
pub fn apply(x: &[f64], params: &NormalizerParams) -> Result<Vec<f64>, NormError> {
    match params.method {
        NormMethod::NoNorm => Ok(x.to_vec()),
        NormMethod::UnitLength => {
            if x.len() <= 1 {
                return Ok(x.to_vec());
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Ok(x.to_vec());
            }
            Ok(x.iter().map(|v| v / norm).collect())
        }
        fitted => {
            if x.len() != params.per_scheme.len() {
                return Err(NormError::DimensionMismatch {
                    expected: params.per_scheme.len(),
                    got: x.len(),
                });
            }
            Ok(x.iter()
                .zip(&params.per_scheme)
                .map(|(&v, stats)| normalize_value(v, stats, fitted))
                .collect())
        }
    }
}

fn normalize_value(value: f64, stats: &SchemeStats, method: NormMethod) -> f64 {
    match method {
        NormMethod::MinMax => {
            let span = stats.max - stats.min;
            if span > 0.0 {
                (value - stats.min) / span
            } else {
                0.0
            }
        }
        NormMethod::ZScore => {
            if stats.std > 0.0 {
                (value - stats.mean) / stats.std
            } else {
                0.0
            }
        }
        NormMethod::Tanh => {
            if stats.std > 0.0 {
                0.5 * ((0.01 * (value - stats.mean) / stats.std).tanh() + 1.0)
            } else {
                0.0
            }
        }
        NormMethod::Rhe => {
            let denom = stats.bf_mean.unwrap_or(0.0) + stats.bf_std.unwrap_or(0.0) - stats.min;
            if denom > 0.0 {
                (value - stats.min) / denom
            } else {
                0.0
            }
        }
        NormMethod::NoNorm | NormMethod::UnitLength => value,
    }
}
