//! No-leakage contract: any sweep cell is reproducible bit-for-bit from the
//! logged fold split and fitted parameters.

use padfusion::classify::{gamma_scale, train_lda, train_svm, Kernel};
use padfusion::fuse::{estimate_weights, fuse, FusionRule};
use padfusion::normalize::{apply, fit, NormMethod};
use padfusion::pad_metrics::{det_curve, pad_report};
use padfusion::score_model::{PadClass, ScoreTable};
use padfusion::sweep::{
    evaluate_cell_fold, run_sweep, Constellation, FusionKind, SweepCell, SweepConfig,
    SweepSummary,
};
use padfusion::synth::{generate, DistSpec, SchemeProfile, SynthConfig};

fn three_scheme_table() -> ScoreTable {
    let config = SynthConfig {
        seed: 99,
        subjects: 9,
        samples_per_subject: 2,
        schemes: [("MC", 1.0), ("SIFT", 0.0), ("CNN", 0.5)]
            .iter()
            .map(|(name, alpha)| SchemeProfile {
                name: (*name).into(),
                genuine: DistSpec::uniform(0.55, 0.45),
                impostor: DistSpec::uniform(0.0, 0.45),
                attack_alpha: vec![*alpha],
            })
            .collect(),
    };
    generate(&config).unwrap()
}

fn pad_rows(
    table: &ScoreTable,
    indices: &[usize],
    columns: &[usize],
) -> (Vec<Vec<f64>>, Vec<PadClass>) {
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for &i in indices {
        let record = &table.records[i];
        if let Some(class) = record.label.pad_class() {
            rows.push(columns.iter().map(|&j| record.scores[j]).collect());
            classes.push(class);
        }
    }
    (rows, classes)
}

/// Rebuilds one cell-fold PadReport from the summary's logged fold split and
/// full-table fitted parameters, through the public module APIs only.
fn reconstruct_fold(
    table: &ScoreTable,
    summary: &SweepSummary,
    cell: &SweepCell,
    fold: usize,
    config: &SweepConfig,
) -> padfusion::pad_metrics::PadReport {
    let constellation = Constellation(cell.mask);
    let columns = constellation.indices();
    let (train_idx, test_idx) = summary.fold_split.split_indices(table, fold);
    let (train_rows, train_classes) = pad_rows(table, &train_idx, &columns);
    let (test_rows, test_classes) = pad_rows(table, &test_idx, &columns);

    let effective = if cell.unit_norm_skipped {
        NormMethod::NoNorm
    } else {
        cell.norm
    };
    // the logged full-table parameters project onto the constellation
    let params = summary.fitted_params[fold][effective.row()].project(&columns);
    assert_eq!(
        params,
        fit(&train_rows, &train_classes, effective).unwrap(),
        "projected parameters must equal a direct fit on the projected split"
    );

    let norm_train: Vec<Vec<f64>> = train_rows.iter().map(|r| apply(r, &params).unwrap()).collect();
    let norm_test: Vec<Vec<f64>> = test_rows.iter().map(|r| apply(r, &params).unwrap()).collect();

    let scored: Vec<f64> = match cell.fusion {
        FusionKind::MaxRule => norm_test.iter().map(|r| fuse(r, &FusionRule::Max).unwrap()).collect(),
        FusionKind::MinRule => norm_test.iter().map(|r| fuse(r, &FusionRule::Min).unwrap()).collect(),
        FusionKind::SumRule => norm_test.iter().map(|r| fuse(r, &FusionRule::Sum).unwrap()).collect(),
        FusionKind::WeightedSum => {
            let weights = estimate_weights(&norm_train, &train_classes).unwrap();
            assert_eq!(
                Some(&weights.weights),
                cell.folds[fold].weights.as_ref(),
                "logged weights must match re-estimation"
            );
            let rule = FusionRule::WeightedSum(weights.weights);
            norm_test.iter().map(|r| fuse(r, &rule).unwrap()).collect()
        }
        FusionKind::LdaFusion => {
            let model = train_lda(&norm_train, &train_classes).unwrap();
            norm_test.iter().map(|r| model.score(r).unwrap()).collect()
        }
        FusionKind::SvmLinear | FusionKind::SvmRbf => {
            let kernel = if cell.fusion == FusionKind::SvmLinear {
                Kernel::Linear
            } else {
                Kernel::Rbf {
                    gamma: config.svm_gamma.unwrap_or_else(|| gamma_scale(&norm_train)),
                }
            };
            let model = train_svm(&norm_train, &train_classes, kernel, config.svm_c).unwrap();
            norm_test.iter().map(|r| model.score(r).unwrap()).collect()
        }
    };

    let bona_fide: Vec<f64> = scored
        .iter()
        .zip(&test_classes)
        .filter(|(_, c)| **c == PadClass::BonaFide)
        .map(|(s, _)| *s)
        .collect();
    let attack: Vec<f64> = scored
        .iter()
        .zip(&test_classes)
        .filter(|(_, c)| **c == PadClass::Attack)
        .map(|(s, _)| *s)
        .collect();
    pad_report(&det_curve(&bona_fide, &attack).unwrap())
}

#[test]
fn sweep_cells_reproduce_bit_for_bit() {
    let table = three_scheme_table();
    let config = SweepConfig::default();
    let summary = run_sweep(&table, 2, 13, &config).unwrap();
    assert_eq!(summary.cells.len(), 7 * 42);

    for (i, cell) in summary.cells.iter().enumerate() {
        // sample roughly a third of the cells, covering all fusions/norms
        if i % 3 != 0 && !cell.unit_norm_skipped {
            continue;
        }
        for fold in 0..summary.k {
            // fresh single-cell evaluation through the public API
            let fresh = evaluate_cell_fold(
                &table,
                &summary.fold_split,
                fold,
                Constellation(cell.mask),
                cell.norm,
                cell.fusion,
                &config,
            );
            assert_eq!(
                fresh, cell.folds[fold],
                "cell mask={} norm={} fusion={} fold={fold}",
                cell.mask,
                cell.norm,
                cell.fusion.id()
            );

            // reconstruction from the logged fitted parameters
            assert!(cell.folds[fold].failure.is_none());
            let rebuilt = reconstruct_fold(&table, &summary, cell, fold, &config);
            assert_eq!(
                rebuilt, cell.folds[fold].report,
                "logged params must reproduce cell mask={} norm={} fusion={} fold={fold}",
                cell.mask,
                cell.norm,
                cell.fusion.id()
            );
        }
    }
}

#[test]
fn fitted_parameters_come_from_the_training_split_only() {
    let table = three_scheme_table();
    let summary = run_sweep(&table, 2, 13, &SweepConfig::default()).unwrap();
    for fold in 0..summary.k {
        let (train_idx, _) = summary.fold_split.split_indices(&table, fold);
        let all_columns: Vec<usize> = (0..table.schemes.len()).collect();
        let (train_rows, train_classes) = pad_rows(&table, &train_idx, &all_columns);
        for method in NormMethod::ALL {
            let expected = fit(&train_rows, &train_classes, method).unwrap();
            assert_eq!(summary.fitted_params[fold][method.row()], expected);
        }
    }
}
