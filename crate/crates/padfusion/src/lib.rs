//! Threat analysis and presentation attack detection (PAD) by score-level
//! fusion of biometric comparison scores.
//!
//! The crate operates on labeled comparison-score tables: every row is one
//! biometric comparison carrying a genuine / impostor / attack label and one
//! similarity score per recognition scheme. On top of that data model it
//! provides
//!
//! - the two-scenario threat protocol ([`threat`]): ROC/EER on the licit
//!   scores and the Impostor Attack Presentation Match Rate (IAPMR) of an
//!   attack set at the licit operating point, including the IAPMR-L/IAPMR-R
//!   threshold-range behaviour that appears when the EER is zero,
//! - score normalization fitted on a training split ([`normalize`]),
//! - closed-form and trained score-level fusion ([`fuse`], [`classify`]),
//! - ISO 30107-3 PAD metrics over fused scores ([`pad_metrics`]),
//! - an exhaustive sweep over all scheme constellations crossed with every
//!   normalization and fusion strategy ([`sweep`]),
//! - a seeded synthetic score-table generator ([`synth`]) standing in for
//!   restricted databases.
//!
//! Each capability has a runnable demo under `examples/`; the `padfusion`
//! binary exposes the same functionality as `threat`, `pad`, `sweep` and
//! `synth` subcommands.

pub mod classify;
pub mod cli;
pub mod fuse;
pub mod normalize;
pub mod pad_metrics;
pub mod score_model;
pub mod sweep;
pub mod synth;
pub mod threat;

pub use classify::{decision_score, train_lda, train_svm, Kernel, LdaModel, SvmModel, TrainedFusion};
pub use fuse::{estimate_weights, fuse, FusionRule, SchemeWeights};
pub use normalize::{apply, fit, NormMethod, NormalizerParams};
pub use pad_metrics::{det_curve, pad_report, DetCurve, PadReport};
pub use score_model::{
    fvc_pairing_plan, load_score_table, make_folds, save_score_table, ComparisonRecord, FoldSplit,
    Label, PadClass, SchemeId, ScoreTable,
};
pub use sweep::{run_sweep, Constellation, FusionKind, SweepConfig, SweepSummary};
pub use synth::{generate, SynthConfig};
pub use threat::{compute_roc, find_operating_point, iapmr, run_two_scenario, ThreatReport};
