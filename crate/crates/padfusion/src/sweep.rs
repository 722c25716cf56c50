//! Exhaustive experiment engine: every non-empty scheme constellation
//! crossed with all six normalization and seven fusion strategies, evaluated
//! with fit-on-train / apply-on-test discipline over k folds.
//!
//! Cells are independent work units; parallel and sequential execution
//! produce identical summaries. Constellation/norm/fusion cells are indexed
//! by the canonical 6x7 lookup grid (rows = norms, columns = fusions,
//! numbered 1-42 down the columns).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{gamma_scale, train_lda, train_svm, Kernel};
use crate::fuse::{estimate_weights, fuse, FusionRule};
use crate::normalize::{apply, fit, NormMethod, NormalizerParams};
use crate::pad_metrics::{det_curve, pad_report, PadReport};
use crate::score_model::{
    make_folds_with, FoldSplit, FoldStrategy, Label, PadClass, ScoreError, ScoreTable,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("table has no {label} records")]
    MissingLabelClass { label: &'static str },
    #[error("{n} schemes exceed the sweep guard of {max} (override via config)")]
    TooManySchemes { n: usize, max: usize },
    #[error("no cells for pair ({norm}, {fusion})")]
    UnknownPair { norm: NormMethod, fusion: FusionKind },
    #[error("unknown scheme `{name}`")]
    UnknownScheme { name: String },
    #[error(transparent)]
    Fold(#[from] ScoreError),
}

/// A non-empty subset of the schemes, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constellation(pub u32);

impl Constellation {
    pub fn all(n: usize) -> impl Iterator<Item = Constellation> {
        (1..(1u64 << n)).map(|mask| Constellation(mask as u32))
    }

    pub fn from_scheme_names(table: &ScoreTable, names: &[&str]) -> Result<Self, SweepError> {
        let mut mask = 0u32;
        for name in names {
            let index = table
                .scheme_index(name)
                .ok_or_else(|| SweepError::UnknownScheme {
                    name: name.to_string(),
                })?;
            mask |= 1 << index;
        }
        Ok(Constellation(mask))
    }

    pub fn scheme_count(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.0 & (1 << i) != 0).collect()
    }

    pub fn scheme_names(&self, table: &ScoreTable) -> Vec<String> {
        self.indices()
            .into_iter()
            .map(|i| table.schemes[i].name.clone())
            .collect()
    }
}

/// The seven fusion strategies, in canonical lookup-column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionKind {
    #[serde(rename = "max-rule")]
    MaxRule,
    #[serde(rename = "min-rule")]
    MinRule,
    #[serde(rename = "sum-rule")]
    SumRule,
    #[serde(rename = "weighted-sum")]
    WeightedSum,
    #[serde(rename = "svm-lin")]
    SvmLinear,
    #[serde(rename = "svm-rbf")]
    SvmRbf,
    #[serde(rename = "lda-fusion")]
    LdaFusion,
}

impl FusionKind {
    pub const ALL: [FusionKind; 7] = [
        FusionKind::MaxRule,
        FusionKind::MinRule,
        FusionKind::SumRule,
        FusionKind::WeightedSum,
        FusionKind::SvmLinear,
        FusionKind::SvmRbf,
        FusionKind::LdaFusion,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            FusionKind::MaxRule => "max-rule",
            FusionKind::MinRule => "min-rule",
            FusionKind::SumRule => "sum-rule",
            FusionKind::WeightedSum => "weighted-sum",
            FusionKind::SvmLinear => "svm-lin",
            FusionKind::SvmRbf => "svm-rbf",
            FusionKind::LdaFusion => "lda-fusion",
        }
    }

    pub fn from_id(id: &str) -> Option<FusionKind> {
        FusionKind::ALL.iter().copied().find(|f| f.id() == id)
    }

    /// Column index in the canonical 6x7 lookup grid.
    pub fn column(&self) -> usize {
        FusionKind::ALL.iter().position(|f| f == self).unwrap()
    }

    /// Computational cost rank used as ranking tie-break:
    /// simple rules < weighted sum < LDA < SVM-lin < SVM-rbf.
    pub fn cost_rank(&self) -> u8 {
        match self {
            FusionKind::MaxRule | FusionKind::MinRule | FusionKind::SumRule => 0,
            FusionKind::WeightedSum => 1,
            FusionKind::LdaFusion => 2,
            FusionKind::SvmLinear => 3,
            FusionKind::SvmRbf => 4,
        }
    }
}

impl std::fmt::Display for FusionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Index of a norm-fusion pair in the canonical lookup grid, numbered 1-42
/// down the fusion columns.
pub fn table_index(norm: NormMethod, fusion: FusionKind) -> u8 {
    (fusion.column() * NormMethod::ALL.len() + norm.row()) as u8 + 1
}

/// Sweep knobs. `workers = 0` uses the default thread pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub svm_c: f64,
    /// RBF bandwidth; `None` applies the per-cell scale heuristic.
    pub svm_gamma: Option<f64>,
    pub workers: usize,
    pub max_schemes: usize,
    /// Number of ranked cells retained in the summary.
    pub top_cells: usize,
    pub fold_strategy: FoldStrategy,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            svm_c: 1.0,
            svm_gamma: None,
            workers: 0,
            max_schemes: 24,
            top_cells: 10,
            fold_strategy: FoldStrategy::Stratified,
        }
    }
}

/// Outcome of one cell on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub report: PadReport,
    /// Estimated weights, for weighted-sum cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// SMO convergence, for SVM cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svm_converged: Option<bool>,
    /// Set when the cell could not be evaluated; the report is then pinned
    /// to D-EER 0.5 / BPCER 1.0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl FoldOutcome {
    fn failed(reason: String) -> Self {
        FoldOutcome {
            report: PadReport {
                d_eer: 0.5,
                bpcer20: 1.0,
                bpcer100: 1.0,
                d_eer_threshold: 0.0,
                bpcer20_threshold: 0.0,
                bpcer100_threshold: 0.0,
            },
            weights: None,
            svm_converged: None,
            failure: Some(reason),
        }
    }
}

/// One (constellation, norm, fusion) cell of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mask: u32,
    pub norm: NormMethod,
    pub fusion: FusionKind,
    pub index: u8,
    /// Unit-length normalization is omitted for singleton constellations;
    /// the cell is then evaluated without normalization.
    pub unit_norm_skipped: bool,
    pub folds: Vec<FoldOutcome>,
    pub mean: PadReport,
}

/// Five-number summary of the mean D-EER distribution of one norm-fusion
/// pair over all constellations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub index: u8,
    pub norm: NormMethod,
    pub fusion: FusionKind,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Values beyond 1.5 IQR from the quartiles, ascending.
    pub outliers: Vec<f64>,
}

/// One entry of the ranked best-cell list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    pub rank: usize,
    pub mask: u32,
    pub schemes: Vec<String>,
    pub norm: NormMethod,
    pub fusion: FusionKind,
    pub index: u8,
    pub scheme_count: u32,
    pub mean: PadReport,
}

/// Complete sweep output: every cell, per-pair distribution statistics, the
/// ranked best cells, and the reproducibility log (fold split plus the
/// full-table normalizer parameters fitted per fold and method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub schemes: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub svm_c: f64,
    pub svm_gamma: Option<f64>,
    pub fold_split: FoldSplit,
    /// `fitted_params[fold][norm_row]`, over all schemes; per-cell
    /// parameters are column projections of these.
    pub fitted_params: Vec<Vec<NormalizerParams>>,
    pub cells: Vec<SweepCell>,
    pub pairs: Vec<PairStats>,
    pub best: Vec<BestCell>,
}

/// Ranking criterion for [`best_constellations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankCriterion {
    #[default]
    MeanDEer,
    MeanBpcer20,
    MeanBpcer100,
}

impl RankCriterion {
    fn metric(&self, report: &PadReport) -> f64 {
        match self {
            RankCriterion::MeanDEer => report.d_eer,
            RankCriterion::MeanBpcer20 => report.bpcer20,
            RankCriterion::MeanBpcer100 => report.bpcer100,
        }
    }
}

/// PAD rows (genuine + attack) of the chosen fold side, projected onto a
/// constellation.
pub(crate) fn project_rows(
    table: &ScoreTable,
    record_indices: &[usize],
    constellation: Constellation,
) -> (Vec<Vec<f64>>, Vec<PadClass>) {
    let columns = constellation.indices();
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for &i in record_indices {
        let record = &table.records[i];
        if let Some(class) = record.label.pad_class() {
            rows.push(columns.iter().map(|&j| record.scores[j]).collect());
            classes.push(class);
        }
    }
    (rows, classes)
}

/// Evaluates a single (constellation, norm, fusion) cell on one fold:
/// normalization parameters are fitted on the training side only, applied
/// to both sides, and the fused test scores are reduced to a [`PadReport`].
///
/// Evaluation failures (e.g. a single-class training split) are recorded in
/// the outcome instead of aborting, so exhaustive sweeps always complete.
pub fn evaluate_cell_fold(
    table: &ScoreTable,
    split: &FoldSplit,
    fold: usize,
    constellation: Constellation,
    norm: NormMethod,
    fusion: FusionKind,
    config: &SweepConfig,
) -> FoldOutcome {
    let (train_idx, test_idx) = split.split_indices(table, fold);
    let (train_rows, train_classes) = project_rows(table, &train_idx, constellation);
    let (test_rows, test_classes) = project_rows(table, &test_idx, constellation);

    let method = if constellation.scheme_count() == 1 && norm == NormMethod::UnitLength {
        NormMethod::NoNorm
    } else {
        norm
    };
    let params = match fit(&train_rows, &train_classes, method) {
        Ok(params) => params,
        Err(e) => return FoldOutcome::failed(e.to_string()),
    };
    let normalize_rows = |rows: &[Vec<f64>]| -> Result<Vec<Vec<f64>>, String> {
        rows.iter()
            .map(|r| apply(r, &params).map_err(|e| e.to_string()))
            .collect()
    };
    let norm_train = match normalize_rows(&train_rows) {
        Ok(rows) => rows,
        Err(e) => return FoldOutcome::failed(e),
    };
    let norm_test = match normalize_rows(&test_rows) {
        Ok(rows) => rows,
        Err(e) => return FoldOutcome::failed(e),
    };

    let mut weights = None;
    let mut svm_converged = None;
    let scored: Result<Vec<f64>, String> = match fusion {
        FusionKind::MaxRule | FusionKind::MinRule | FusionKind::SumRule => {
            let rule = match fusion {
                FusionKind::MaxRule => FusionRule::Max,
                FusionKind::MinRule => FusionRule::Min,
                _ => FusionRule::Sum,
            };
            norm_test
                .iter()
                .map(|r| fuse(r, &rule).map_err(|e| e.to_string()))
                .collect()
        }
        FusionKind::WeightedSum => match estimate_weights(&norm_train, &train_classes) {
            Ok(estimated) => {
                let rule = FusionRule::WeightedSum(estimated.weights.clone());
                weights = Some(estimated.weights);
                norm_test
                    .iter()
                    .map(|r| fuse(r, &rule).map_err(|e| e.to_string()))
                    .collect()
            }
            Err(e) => Err(e.to_string()),
        },
        FusionKind::LdaFusion => match train_lda(&norm_train, &train_classes) {
            Ok(model) => norm_test
                .iter()
                .map(|r| model.score(r).map_err(|e| e.to_string()))
                .collect(),
            Err(e) => Err(e.to_string()),
        },
        FusionKind::SvmLinear | FusionKind::SvmRbf => {
            let kernel = if fusion == FusionKind::SvmLinear {
                Kernel::Linear
            } else {
                Kernel::Rbf {
                    gamma: config.svm_gamma.unwrap_or_else(|| gamma_scale(&norm_train)),
                }
            };
            match train_svm(&norm_train, &train_classes, kernel, config.svm_c) {
                Ok(model) => {
                    svm_converged = Some(model.converged);
                    norm_test
                        .iter()
                        .map(|r| model.score(r).map_err(|e| e.to_string()))
                        .collect()
                }
                Err(e) => Err(e.to_string()),
            }
        }
    };
    let scored = match scored {
        Ok(scored) => scored,
        Err(e) => return FoldOutcome::failed(e),
    };

    let mut bona_fide = Vec::new();
    let mut attack = Vec::new();
    for (score, class) in scored.iter().zip(&test_classes) {
        match class {
            PadClass::BonaFide => bona_fide.push(*score),
            PadClass::Attack => attack.push(*score),
        }
    }
    let report = match det_curve(&bona_fide, &attack) {
        Ok(curve) => pad_report(&curve),
        Err(e) => return FoldOutcome::failed(e.to_string()),
    };
    FoldOutcome {
        report,
        weights,
        svm_converged,
        failure: None,
    }
}

fn mean_report(folds: &[FoldOutcome]) -> PadReport {
    let n = folds.len() as f64;
    let sum = |f: fn(&PadReport) -> f64| folds.iter().map(|o| f(&o.report)).sum::<f64>() / n;
    PadReport {
        d_eer: sum(|r| r.d_eer),
        bpcer20: sum(|r| r.bpcer20),
        bpcer100: sum(|r| r.bpcer100),
        d_eer_threshold: sum(|r| r.d_eer_threshold),
        bpcer20_threshold: sum(|r| r.bpcer20_threshold),
        bpcer100_threshold: sum(|r| r.bpcer100_threshold),
    }
}

/// Runs the exhaustive sweep.
pub fn run_sweep(
    table: &ScoreTable,
    k: usize,
    seed: u64,
    config: &SweepConfig,
) -> Result<SweepSummary, SweepError> {
    let n = table.schemes.len();
    if n > config.max_schemes {
        return Err(SweepError::TooManySchemes {
            n,
            max: config.max_schemes,
        });
    }
    for (label, name) in [
        (Label::Genuine, "genuine"),
        (Label::Impostor, "impostor"),
        (Label::Attack, "attack"),
    ] {
        if table.label_count(label) == 0 {
            return Err(SweepError::MissingLabelClass { label: name });
        }
    }
    let split = make_folds_with(table, k, seed, config.fold_strategy)?;

    // reproducibility log: full-table parameters per fold and method
    let full = Constellation((1u64 << n) as u32 - 1);
    let mut fitted_params = Vec::with_capacity(k);
    for fold in 0..k {
        let (train_idx, _) = split.split_indices(table, fold);
        let (train_rows, train_classes) = project_rows(table, &train_idx, full);
        let per_norm: Vec<NormalizerParams> = NormMethod::ALL
            .iter()
            .map(|&method| {
                fit(&train_rows, &train_classes, method)
                    .expect("folds guarantee non-empty two-class training splits")
            })
            .collect();
        fitted_params.push(per_norm);
    }

    let masks: Vec<Constellation> = Constellation::all(n).collect();
    let evaluate_mask = |&constellation: &Constellation| -> Vec<SweepCell> {
        let mut cells = Vec::with_capacity(42);
        for fusion in FusionKind::ALL {
            for norm in NormMethod::ALL {
                let folds: Vec<FoldOutcome> = (0..k)
                    .map(|fold| {
                        evaluate_cell_fold(table, &split, fold, constellation, norm, fusion, config)
                    })
                    .collect();
                let mean = mean_report(&folds);
                cells.push(SweepCell {
                    mask: constellation.0,
                    norm,
                    fusion,
                    index: table_index(norm, fusion),
                    unit_norm_skipped: constellation.scheme_count() == 1
                        && norm == NormMethod::UnitLength,
                    folds,
                    mean,
                });
            }
        }
        cells
    };

    let per_mask: Vec<Vec<SweepCell>> = if config.workers == 0 {
        masks.par_iter().map(evaluate_mask).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool construction");
        pool.install(|| masks.par_iter().map(evaluate_mask).collect())
    };
    let cells: Vec<SweepCell> = per_mask.into_iter().flatten().collect();
    assert_eq!(
        cells.len(),
        ((1usize << n) - 1) * 42,
        "sweep must evaluate every cell exactly once"
    );

    let pairs = pair_stats(&cells);
    let mut summary = SweepSummary {
        schemes: table.schemes.iter().map(|s| s.name.clone()).collect(),
        k,
        seed,
        svm_c: config.svm_c,
        svm_gamma: config.svm_gamma,
        fold_split: split,
        fitted_params,
        cells,
        pairs,
        best: Vec::new(),
    };
    summary.best = best_constellations(&summary, RankCriterion::MeanDEer)
        .into_iter()
        .take(config.top_cells)
        .collect();
    Ok(summary)
}

fn pair_stats(cells: &[SweepCell]) -> Vec<PairStats> {
    let mut pairs = Vec::with_capacity(42);
    for fusion in FusionKind::ALL {
        for norm in NormMethod::ALL {
            let mut values: Vec<f64> = cells
                .iter()
                .filter(|c| c.norm == norm && c.fusion == fusion)
                .map(|c| c.mean.d_eer)
                .collect();
            values.sort_by(f64::total_cmp);
            pairs.push(five_number_summary(norm, fusion, &values));
        }
    }
    pairs.sort_by_key(|p| p.index);
    pairs
}

fn five_number_summary(norm: NormMethod, fusion: FusionKind, sorted: &[f64]) -> PairStats {
    let q1 = quantile(sorted, 0.25);
    let median = quantile(sorted, 0.5);
    let q3 = quantile(sorted, 0.75);
    let iqr = q3 - q1;
    let (low, high) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    PairStats {
        index: table_index(norm, fusion),
        norm,
        fusion,
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        outliers: sorted
            .iter()
            .copied()
            .filter(|&v| v < low || v > high)
            .collect(),
    }
}

/// Quantile with linear interpolation on a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
}

/// Distribution statistics of one norm-fusion pair.
pub fn boxplot_stats(
    summary: &SweepSummary,
    norm: NormMethod,
    fusion: FusionKind,
) -> Result<PairStats, SweepError> {
    summary
        .pairs
        .iter()
        .find(|p| p.norm == norm && p.fusion == fusion)
        .cloned()
        .ok_or(SweepError::UnknownPair { norm, fusion })
}

/// Ranks every cell: metric ascending, then fewer schemes, then cheaper
/// fusion, then cheaper norm (lookup-row order), then the bitmask, then the
/// lookup index.
pub fn best_constellations(summary: &SweepSummary, criterion: RankCriterion) -> Vec<BestCell> {
    let mut order: Vec<&SweepCell> = summary.cells.iter().collect();
    order.sort_by(|a, b| {
        criterion
            .metric(&a.mean)
            .total_cmp(&criterion.metric(&b.mean))
            .then_with(|| a.mask.count_ones().cmp(&b.mask.count_ones()))
            .then_with(|| a.fusion.cost_rank().cmp(&b.fusion.cost_rank()))
            .then_with(|| a.norm.row().cmp(&b.norm.row()))
            .then_with(|| a.mask.cmp(&b.mask))
            .then_with(|| a.index.cmp(&b.index))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(rank, cell)| BestCell {
            rank: rank + 1,
            mask: cell.mask,
            schemes: Constellation(cell.mask).scheme_names_from(&summary.schemes),
            norm: cell.norm,
            fusion: cell.fusion,
            index: cell.index,
            scheme_count: cell.mask.count_ones(),
            mean: cell.mean,
        })
        .collect()
}

impl Constellation {
    fn scheme_names_from(&self, names: &[String]) -> Vec<String> {
        self.indices().into_iter().map(|i| names[i].clone()).collect()
    }
}
