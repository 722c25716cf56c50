//! Fisher linear discriminant for the two-class PAD task.

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::score_model::PadClass;

/// Diagonal loading factor applied to the pooled scatter matrix, scaled by
/// trace/dimension. Keeps the solve defined when a scheme column saturates.
const SCATTER_REGULARIZATION: f64 = 1e-9;

/// Linear discriminant: `score(x) = direction . x + bias`, oriented so bona
/// fide vectors score higher, with the projected class-mean midpoint at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub direction: Vec<f64>,
    pub bias: f64,
}

impl LdaModel {
    pub fn score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        if x.len() != self.direction.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: self.direction.len(),
                got: x.len(),
            });
        }
        Ok(self
            .direction
            .iter()
            .zip(x)
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias)
    }
}

/// Trains a Fisher discriminant: the direction solves
/// `(S_w + reg I) w = mean_bf - mean_attack` with the pooled within-class
/// scatter `S_w`.
pub fn train_lda(rows: &[Vec<f64>], classes: &[PadClass]) -> Result<LdaModel, ClassifyError> {
    let dim = validate_training_data(rows, classes)?;

    let bona_fide: Vec<&Vec<f64>> = select(rows, classes, PadClass::BonaFide);
    let attack: Vec<&Vec<f64>> = select(rows, classes, PadClass::Attack);
    if bona_fide.is_empty() || attack.is_empty() {
        return Err(ClassifyError::SingleClassTraining);
    }

    let mean_bf = mean_of(&bona_fide, dim);
    let mean_attack = mean_of(&attack, dim);
    let mean_diff: Vec<f64> = mean_bf
        .iter()
        .zip(&mean_attack)
        .map(|(a, b)| a - b)
        .collect();

    // pooled within-class scatter (unnormalized)
    let mut scatter = vec![0.0; dim * dim];
    for (class_rows, mean) in [(&bona_fide, &mean_bf), (&attack, &mean_attack)] {
        for row in class_rows.iter() {
            for i in 0..dim {
                let di = row[i] - mean[i];
                for j in 0..dim {
                    scatter[i * dim + j] += di * (row[j] - mean[j]);
                }
            }
        }
    }
    let trace: f64 = (0..dim).map(|i| scatter[i * dim + i]).sum();
    let ridge = SCATTER_REGULARIZATION * trace / dim as f64;
    for i in 0..dim {
        scatter[i * dim + i] += ridge;
    }

    // fall back to the raw mean difference when the scatter stays singular
    // (all vectors identical within each class)
    let mut direction =
        solve_linear(&scatter, &mean_diff, dim).unwrap_or_else(|| mean_diff.clone());

    let towards_bf: f64 = direction.iter().zip(&mean_diff).map(|(w, d)| w * d).sum();
    if towards_bf < 0.0 {
        for w in &mut direction {
            *w = -*w;
        }
    }

    let midpoint: Vec<f64> = mean_bf
        .iter()
        .zip(&mean_attack)
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    let bias = -direction
        .iter()
        .zip(&midpoint)
        .map(|(w, m)| w * m)
        .sum::<f64>();

    Ok(LdaModel { direction, bias })
}

pub(super) fn validate_training_data(
    rows: &[Vec<f64>],
    classes: &[PadClass],
) -> Result<usize, ClassifyError> {
    if rows.is_empty() || rows.len() != classes.len() {
        return Err(ClassifyError::InvalidTrainingData);
    }
    let dim = rows[0].len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(ClassifyError::InvalidTrainingData);
    }
    Ok(dim)
}

fn select<'a>(rows: &'a [Vec<f64>], classes: &[PadClass], class: PadClass) -> Vec<&'a Vec<f64>> {
    rows.iter()
        .zip(classes)
        .filter(|(_, c)| **c == class)
        .map(|(r, _)| r)
        .collect()
}

fn mean_of(rows: &[&Vec<f64>], dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    let n = rows.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    mean
}

/// Gaussian elimination with partial pivoting on a row-major `dim x dim`
/// matrix. Returns `None` when the matrix is numerically singular.
fn solve_linear(matrix: &[f64], rhs: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    for col in 0..dim {
        let pivot_row = (col..dim)
            .max_by(|&r1, &r2| a[r1 * dim + col].abs().total_cmp(&a[r2 * dim + col].abs()))?;
        if a[pivot_row * dim + col] == 0.0 {
            return None;
        }
        if pivot_row != col {
            for j in 0..dim {
                a.swap(col * dim + j, pivot_row * dim + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * dim + col];
        for row in (col + 1)..dim {
            let factor = a[row * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..dim {
                a[row * dim + j] -= factor * a[col * dim + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for j in (row + 1)..dim {
            acc -= a[row * dim + j] * x[j];
        }
        let pivot = a[row * dim + row];
        if pivot == 0.0 {
            return None;
        }
        x[row] = acc / pivot;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(bf: &[Vec<f64>], attack: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<PadClass>) {
        let mut rows = Vec::new();
        let mut classes = Vec::new();
        for r in bf {
            rows.push(r.clone());
            classes.push(PadClass::BonaFide);
        }
        for r in attack {
            rows.push(r.clone());
            classes.push(PadClass::Attack);
        }
        (rows, classes)
    }

    #[test]
    fn isotropic_classes_give_mean_difference_direction() {
        // identity-like scatter around means (1,1) and (0,0)
        let bf = vec![
            vec![1.0, 1.0],
            vec![2.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 0.0],
        ];
        let attack = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let (rows, classes) = labeled(&bf, &attack);
        let model = train_lda(&rows, &classes).unwrap();
        let ratio = model.direction[0] / model.direction[1];
        assert!((ratio - 1.0).abs() < 1e-9, "direction {:?}", model.direction);
        assert!(model.direction[0] > 0.0);
    }

    #[test]
    fn one_dimensional_lda_preserves_input_ordering() {
        let bf = vec![vec![0.8], vec![0.9], vec![0.7]];
        let attack = vec![vec![0.1], vec![0.2]];
        let (rows, classes) = labeled(&bf, &attack);
        let model = train_lda(&rows, &classes).unwrap();
        let inputs = [0.05, 0.3, 0.5, 0.75, 0.95];
        let scores: Vec<f64> = inputs.iter().map(|&v| model.score(&[v]).unwrap()).collect();
        for w in scores.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn bona_fide_mean_scores_above_attack_mean() {
        let bf = vec![vec![0.9, 0.6], vec![0.8, 0.7]];
        let attack = vec![vec![0.2, 0.3], vec![0.1, 0.2]];
        let (rows, classes) = labeled(&bf, &attack);
        let model = train_lda(&rows, &classes).unwrap();
        assert!(model.score(&[0.85, 0.65]).unwrap() > 0.0);
        assert!(model.score(&[0.15, 0.25]).unwrap() < 0.0);
    }

    #[test]
    fn single_class_training_is_rejected() {
        let rows = vec![vec![0.1], vec![0.2]];
        let classes = vec![PadClass::Attack, PadClass::Attack];
        assert!(matches!(
            train_lda(&rows, &classes),
            Err(ClassifyError::SingleClassTraining)
        ));
    }

    #[test]
    fn dimension_mismatch_on_scoring() {
        let (rows, classes) = labeled(&[vec![1.0, 0.0]], &[vec![0.0, 1.0]]);
        let model = train_lda(&rows, &classes).unwrap();
        assert!(matches!(
            model.score(&[1.0]),
            Err(ClassifyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_columns_fall_back_gracefully() {
        // second column is constant: scatter is singular before loading
        let bf = vec![vec![0.9, 1.0], vec![0.8, 1.0]];
        let attack = vec![vec![0.1, 1.0], vec![0.2, 1.0]];
        let (rows, classes) = labeled(&bf, &attack);
        let model = train_lda(&rows, &classes).unwrap();
        assert!(model.score(&[0.85, 1.0]).unwrap() > model.score(&[0.15, 1.0]).unwrap());
    }

    #[test]
    fn solve_linear_matches_known_system() {
        // [[2,1],[1,3]] x = [3,5] -> x = [4/5, 7/5]
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let b = vec![3.0, 5.0];
        let x = solve_linear(&a, &b, 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12);
        assert!((x[1] - 1.4).abs() < 1e-12);
    }
}
