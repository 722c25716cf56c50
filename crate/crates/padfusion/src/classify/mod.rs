//! Trained fusion back-ends: Fisher linear discriminant and support vector
//! machines (linear and RBF kernels). Both map a normalized score vector to
//! a real decision score where larger means more bona fide-like.
//!
//! Class convention everywhere: bona fide = +1, attack = -1.

mod lda;
mod svm;

pub use lda::{train_lda, LdaModel};
pub use svm::{gamma_scale, train_svm, Kernel, SvmModel, SMO_MAX_PASSES, SMO_TOLERANCE};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::NormMethod;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training data contains a single class only")]
    SingleClassTraining,
    #[error("expected vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training rows are empty or ragged")]
    InvalidTrainingData,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
}

/// A trained fusion model together with the normalization method its
/// training data was prepared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedFusion {
    pub backend: FusionBackend,
    pub norm: NormMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FusionBackend {
    Lda(LdaModel),
    Svm(SvmModel),
}

impl TrainedFusion {
    pub fn decision_score(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        match &self.backend {
            FusionBackend::Lda(model) => model.score(x),
            FusionBackend::Svm(model) => model.score(x),
        }
    }
}

/// Decision score of a trained fusion model; larger means more bona
/// fide-like.
pub fn decision_score(model: &TrainedFusion, x: &[f64]) -> Result<f64, ClassifyError> {
    model.decision_score(x)
}
