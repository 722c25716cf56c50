//! Binary support vector machine trained with sequential minimal
//! optimization (SMO).
//!
//! Working-pair selection is fully deterministic: the partner maximizing
//! |E_i - E_j| is tried first, then the remaining candidates in index order.
//! Training therefore yields identical models for identical data.

use serde::{Deserialize, Serialize};

use super::lda::validate_training_data;
use super::ClassifyError;
use crate::score_model::PadClass;

/// KKT tolerance of the SMO solver.
pub const SMO_TOLERANCE: f64 = 1e-3;
/// Hard cap on full passes over the training set. Hitting the cap degrades
/// to the best iterate instead of aborting.
pub const SMO_MAX_PASSES: usize = 10_000;
/// Minimum multiplier step treated as progress.
const MIN_ALPHA_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let dist2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * dist2).exp()
            }
        }
    }
}

/// The widely used scale heuristic for the RBF bandwidth:
/// `1 / (n_features * variance of all training entries)`, falling back to 1
/// when the variance vanishes.
pub fn gamma_scale(rows: &[Vec<f64>]) -> f64 {
    let dim = rows.first().map(|r| r.len()).unwrap_or(0);
    let count = rows.len() * dim;
    if count == 0 {
        return 1.0;
    }
    let mean: f64 = rows.iter().flatten().sum::<f64>() / count as f64;
    let var: f64 = rows
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / count as f64;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0
    }
}

/// Trained SVM in dual form. Only support vectors (alpha > 0) are stored;
/// `coefficients[s]` is `alpha_s * y_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub coefficients: Vec<f64>,
    pub alphas: Vec<f64>,
    pub support_vectors: Vec<Vec<f64>>,
    /// Indices of the support vectors in the training set.
    pub support_indices: Vec<usize>,
    pub bias: f64,
    pub converged: bool,
    pub passes: usize,
}

impl SvmModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        let dim = self.support_vectors.first().map(|v| v.len()).unwrap_or(0);
        if !self.support_vectors.is_empty() && x.len() != dim {
            return Err(ClassifyError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        let mut score = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            score += coef * self.kernel.eval(sv, x);
        }
        Ok(score)
    }
}

/// Trains a soft-margin SVM with SMO. Bona fide records are the +1 class,
/// attacks the -1 class. When the pass cap is hit the best iterate is
/// returned with `converged = false` rather than failing.
pub fn train_svm(
    rows: &[Vec<f64>],
    classes: &[PadClass],
    kernel: Kernel,
    c: f64,
) -> Result<SvmModel, ClassifyError> {
    validate_training_data(rows, classes)?;
    if !(c > 0.0) {
        return Err(ClassifyError::InvalidHyperparameter("C must be positive"));
    }
    if let Kernel::Rbf { gamma } = kernel {
        if !(gamma > 0.0) {
            return Err(ClassifyError::InvalidHyperparameter(
                "gamma must be positive",
            ));
        }
    }
    let y: Vec<f64> = classes
        .iter()
        .map(|class| match class {
            PadClass::BonaFide => 1.0,
            PadClass::Attack => -1.0,
        })
        .collect();
    if y.iter().all(|&v| v == 1.0) || y.iter().all(|&v| v == -1.0) {
        return Err(ClassifyError::SingleClassTraining);
    }

    let m = rows.len();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let k = kernel.eval(&rows[i], &rows[j]);
            gram[i * m + j] = k;
            gram[j * m + i] = k;
        }
    }

    let mut solver = Smo {
        gram: &gram,
        y: &y,
        c,
        m,
        alpha: vec![0.0; m],
        errors: y.iter().map(|&v| -v).collect(),
        bias: 0.0,
    };

    let mut passes = 0;
    let mut converged = false;
    while passes < SMO_MAX_PASSES {
        passes += 1;
        let (changed, violations) = solver.run_pass();
        if changed == 0 {
            converged = violations == 0;
            break;
        }
    }

    let mut coefficients = Vec::new();
    let mut alphas = Vec::new();
    let mut support_vectors = Vec::new();
    let mut support_indices = Vec::new();
    for i in 0..m {
        if solver.alpha[i] > 0.0 {
            alphas.push(solver.alpha[i]);
            coefficients.push(solver.alpha[i] * y[i]);
            support_vectors.push(rows[i].clone());
            support_indices.push(i);
        }
    }

    Ok(SvmModel {
        kernel,
        c,
        coefficients,
        alphas,
        support_vectors,
        support_indices,
        bias: solver.bias,
        converged,
        passes,
    })
}

struct Smo<'a> {
    gram: &'a [f64],
    y: &'a [f64],
    c: f64,
    m: usize,
    alpha: Vec<f64>,
    /// errors[i] = f(x_i) - y_i, maintained incrementally
    errors: Vec<f64>,
    bias: f64,
}

impl Smo<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.m + j]
    }

    fn violates_kkt(&self, i: usize) -> bool {
        let r = self.errors[i] * self.y[i];
        (r < -SMO_TOLERANCE && self.alpha[i] < self.c) || (r > SMO_TOLERANCE && self.alpha[i] > 0.0)
    }

    fn run_pass(&mut self) -> (usize, usize) {
        let mut changed = 0;
        let mut violations = 0;
        for i in 0..self.m {
            if !self.violates_kkt(i) {
                continue;
            }
            violations += 1;
            if self.examine(i) {
                changed += 1;
            }
        }
        (changed, violations)
    }

    /// Deterministic partner search: largest |E_i - E_j| first (smallest
    /// index on ties), then free multipliers in index order, then the rest.
    fn examine(&mut self, i: usize) -> bool {
        let mut best_j = None;
        let mut best_gap = 0.0;
        for j in 0..self.m {
            if j == i {
                continue;
            }
            let gap = (self.errors[i] - self.errors[j]).abs();
            if gap > best_gap {
                best_gap = gap;
                best_j = Some(j);
            }
        }
        if let Some(j) = best_j {
            if self.take_step(i, j) {
                return true;
            }
        }
        for j in 0..self.m {
            if j == i || Some(j) == best_j {
                continue;
            }
            if self.alpha[j] > 0.0 && self.alpha[j] < self.c && self.take_step(i, j) {
                return true;
            }
        }
        for j in 0..self.m {
            if j == i || Some(j) == best_j {
                continue;
            }
            if (self.alpha[j] == 0.0 || self.alpha[j] == self.c) && self.take_step(i, j) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i: usize, j: usize) -> bool {
        let (alpha_i, alpha_j) = (self.alpha[i], self.alpha[j]);
        let (y_i, y_j) = (self.y[i], self.y[j]);
        let (lo, hi) = if y_i != y_j {
            (
                (alpha_j - alpha_i).max(0.0),
                (self.c + alpha_j - alpha_i).min(self.c),
            )
        } else {
            (
                (alpha_i + alpha_j - self.c).max(0.0),
                (alpha_i + alpha_j).min(self.c),
            )
        };
        if lo >= hi {
            return false;
        }
        let eta = 2.0 * self.k(i, j) - self.k(i, i) - self.k(j, j);
        if eta >= 0.0 {
            return false;
        }
        let unclipped = alpha_j - y_j * (self.errors[i] - self.errors[j]) / eta;
        let new_alpha_j = unclipped.clamp(lo, hi);
        if (new_alpha_j - alpha_j).abs() < MIN_ALPHA_STEP {
            return false;
        }
        let new_alpha_i = alpha_i + y_i * y_j * (alpha_j - new_alpha_j);

        let delta_i = new_alpha_i - alpha_i;
        let delta_j = new_alpha_j - alpha_j;
        let b1 = self.bias
            - self.errors[i]
            - y_i * delta_i * self.k(i, i)
            - y_j * delta_j * self.k(i, j);
        let b2 = self.bias
            - self.errors[j]
            - y_i * delta_i * self.k(i, j)
            - y_j * delta_j * self.k(j, j);
        let new_bias = if new_alpha_i > 0.0 && new_alpha_i < self.c {
            b1
        } else if new_alpha_j > 0.0 && new_alpha_j < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let delta_b = new_bias - self.bias;

        for l in 0..self.m {
            self.errors[l] +=
                y_i * delta_i * self.k(i, l) + y_j * delta_j * self.k(j, l) + delta_b;
        }
        self.alpha[i] = new_alpha_i;
        self.alpha[j] = new_alpha_j;
        self.bias = new_bias;
        true
    }
}
