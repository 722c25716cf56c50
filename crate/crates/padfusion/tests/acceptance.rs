//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them).

mod common;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use padfusion::classify::{train_lda, train_svm, Kernel, SMO_TOLERANCE};
use padfusion::fuse::{fuse, weights_from_eers, FusionRule};
use padfusion::normalize::{apply, fit, NormMethod};
use padfusion::pad_metrics::{det_curve, pad_report};
use padfusion::score_model::PadClass;
use padfusion::sweep::{run_sweep, SweepConfig};
use padfusion::synth::{generate, presets};
use padfusion::threat::{compute_roc, find_operating_point, iapmr, run_two_scenario};

use common::{
    oracle_iapmr, oracle_operating_point, oracle_pad, random_scores, seeded_rng,
};

fn check(criterion: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[{criterion}] {verdict} - {detail}");
    assert!(ok, "[{criterion}] {detail}");
}

#[test]
fn criterion_1_threat_oracle_equivalence() {
    let start = Instant::now();
    let mut mismatches = 0usize;
    for seed in 0..200u64 {
        let mut rng = seeded_rng(seed);
        let genuine = random_scores(&mut rng, 50);
        let impostor = random_scores(&mut rng, 50);
        let attack = random_scores(&mut rng, 50);

        let point = find_operating_point(&compute_roc(&genuine, &impostor).unwrap());
        let (left, right) = iapmr(&attack, &point).unwrap();

        let expected = oracle_operating_point(&genuine, &impostor);
        let (expected_left, expected_right) = oracle_iapmr(&attack, &expected);

        let exact = point.eer == expected.eer
            && point.threshold_left == expected.threshold_left
            && point.threshold_right == expected.threshold_right
            && left == expected_left
            && right == expected_right;
        if !exact {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        "criterion 1",
        mismatches == 0 && elapsed.as_secs_f64() < 10.0,
        format!(
            "EER/threshold-range/IAPMR exact on 200 random instances \
             ({mismatches} mismatches, {elapsed:.2?})"
        ),
    );
}

#[test]
fn criterion_2_zero_eer_threshold_gap() {
    let table = generate(&presets::threshold_gap()).unwrap();
    let report = run_two_scenario(&table, "MC").unwrap();
    let gap = report.iapmr_left - report.iapmr_right;
    check(
        "criterion 2",
        report.eer == 0.0 && gap >= 0.90,
        format!(
            "bundled preset: EER {:.4}, IAPMR-L {:.4}, IAPMR-R {:.4}, spread {:.4}",
            report.eer, report.iapmr_left, report.iapmr_right, gap
        ),
    );
}

#[test]
fn criterion_3_normalization_fixed_points() {
    let train = vec![vec![1.0], vec![2.0], vec![3.0]];
    let classes = vec![PadClass::BonaFide; 3];
    let tol = 1e-12;

    let minmax = fit(&train, &classes, NormMethod::MinMax).unwrap();
    let z = fit(&train, &classes, NormMethod::ZScore).unwrap();
    let tanh = fit(&train, &classes, NormMethod::Tanh).unwrap();
    let rhe = fit(&train, &classes, NormMethod::Rhe).unwrap();
    let unit = fit(&[], &[], NormMethod::UnitLength).unwrap();

    let minmax_at_min = apply(&[1.0], &minmax).unwrap()[0];
    let z_at_mean = apply(&[2.0], &z).unwrap()[0];
    let tanh_at_mean = apply(&[2.0], &tanh).unwrap()[0];
    let rhe_at_min = apply(&[1.0], &rhe).unwrap()[0];
    let unit_of_34 = apply(&[3.0, 4.0], &unit).unwrap();

    let ok = minmax_at_min.abs() <= tol
        && z_at_mean.abs() <= tol
        && (tanh_at_mean - 0.5).abs() <= tol
        && rhe_at_min.abs() <= tol
        && (unit_of_34[0] - 0.6).abs() <= tol
        && (unit_of_34[1] - 0.8).abs() <= tol;
    check(
        "criterion 3",
        ok,
        format!(
            "min-max(min)={minmax_at_min:e}, z(mean)={z_at_mean:e}, \
             tanh(mean)={tanh_at_mean}, rhe(min)={rhe_at_min:e}, \
             unit(3,4)=({},{})",
            unit_of_34[0], unit_of_34[1]
        ),
    );
}

#[test]
fn criterion_4_eer_derived_weights() {
    let tol = 1e-12;
    let weights = weights_from_eers(&[0.01, 0.04]);
    let mut ok = (weights.weights[0] - 0.8).abs() <= tol && (weights.weights[1] - 0.2).abs() <= tol;

    let mut max_sum_error: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = seeded_rng(seed);
        let n = rng.random_range(1..=10);
        let eers: Vec<f64> = (0..n).map(|_| rng.random_range(0..=5000) as f64 / 10000.0).collect();
        let sum: f64 = weights_from_eers(&eers).weights.iter().sum();
        max_sum_error = max_sum_error.max((sum - 1.0).abs());
    }
    ok &= max_sum_error <= tol;
    check(
        "criterion 4",
        ok,
        format!(
            "EERs (0.01, 0.04) -> ({}, {}); max |sum - 1| = {max_sum_error:e} over 50 vectors",
            weights.weights[0], weights.weights[1]
        ),
    );
}

fn lda_dense_solve_oracle(rows: &[Vec<f64>], classes: &[PadClass]) -> Vec<f64> {
    let dim = rows[0].len();
    let split = |class: PadClass| -> Vec<&Vec<f64>> {
        rows.iter()
            .zip(classes)
            .filter(|(_, c)| **c == class)
            .map(|(r, _)| r)
            .collect()
    };
    let mean = |subset: &[&Vec<f64>]| -> DVector<f64> {
        let mut m = DVector::zeros(dim);
        for row in subset {
            m += DVector::from_column_slice(row);
        }
        m / subset.len() as f64
    };
    let bona_fide = split(PadClass::BonaFide);
    let attack = split(PadClass::Attack);
    let mean_bf = mean(&bona_fide);
    let mean_att = mean(&attack);

    let mut scatter = DMatrix::<f64>::zeros(dim, dim);
    for (subset, m) in [(&bona_fide, &mean_bf), (&attack, &mean_att)] {
        for row in subset.iter() {
            let d = DVector::from_column_slice(row) - m;
            scatter += &d * d.transpose();
        }
    }
    let ridge = 1e-9 * scatter.trace() / dim as f64;
    for i in 0..dim {
        scatter[(i, i)] += ridge;
    }
    let direction = scatter
        .lu()
        .solve(&(&mean_bf - &mean_att))
        .expect("oracle solve");
    direction.iter().copied().collect()
}

#[test]
fn criterion_5_classifier_soundness() {
    // (a) KKT audit on 50 random separable instances
    let mut kkt_failures = 0usize;
    for seed in 0..50u64 {
        let mut rng = seeded_rng(1000 + seed);
        let dim = rng.random_range(1..=3);
        let per_class = rng.random_range(3..=15);
        let mut rows = Vec::new();
        let mut classes = Vec::new();
        for _ in 0..per_class {
            rows.push((0..dim).map(|_| rng.random_range(60..=100) as f64 / 100.0).collect());
            classes.push(PadClass::BonaFide);
        }
        for _ in 0..per_class {
            rows.push((0..dim).map(|_| rng.random_range(0..=40) as f64 / 100.0).collect());
            classes.push(PadClass::Attack);
        }
        let model = train_svm(&rows, &classes, Kernel::Linear, 1.0).unwrap();

        let alpha_of: std::collections::BTreeMap<usize, f64> = model
            .support_indices
            .iter()
            .copied()
            .zip(model.alphas.iter().copied())
            .collect();
        let mut sum_alpha_y = 0.0;
        for coef in &model.coefficients {
            sum_alpha_y += coef;
        }
        let mut ok = model.converged && sum_alpha_y.abs() < 1e-8;
        for (idx, (row, class)) in rows.iter().zip(&classes).enumerate() {
            let y = if *class == PadClass::BonaFide { 1.0 } else { -1.0 };
            let margin = y * model.score(row).unwrap();
            let alpha = alpha_of.get(&idx).copied().unwrap_or(0.0);
            ok &= (0.0..=model.c + 1e-12).contains(&alpha);
            ok &= if alpha == 0.0 {
                margin >= 1.0 - SMO_TOLERANCE
            } else if alpha < model.c {
                (margin - 1.0).abs() <= SMO_TOLERANCE
            } else {
                margin <= 1.0 + SMO_TOLERANCE
            };
        }
        if !ok {
            kkt_failures += 1;
        }
    }

    // (b) LDA direction vs independent dense solve
    let mut max_rel_error: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = seeded_rng(2000 + seed);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut classes = Vec::new();
        for _ in 0..25 {
            rows.push((0..3).map(|_| 0.8 + 0.05 * gauss(&mut rng)).collect());
            classes.push(PadClass::BonaFide);
        }
        for _ in 0..25 {
            rows.push((0..3).map(|_| 0.2 + 0.05 * gauss(&mut rng)).collect());
            classes.push(PadClass::Attack);
        }
        let model = train_lda(&rows, &classes).unwrap();
        let oracle = lda_dense_solve_oracle(&rows, &classes);
        let norm: f64 = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = model
            .direction
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        max_rel_error = max_rel_error.max(diff / norm);
    }

    // (c) XOR: RBF reaches training accuracy 1.0, linear cannot
    let rows = vec![
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
    ];
    let classes = vec![
        PadClass::BonaFide,
        PadClass::BonaFide,
        PadClass::Attack,
        PadClass::Attack,
    ];
    let accuracy = |kernel: Kernel| -> f64 {
        let model = train_svm(&rows, &classes, kernel, 1.0).unwrap();
        rows.iter()
            .zip(&classes)
            .filter(|(row, class)| {
                let bona_fide = model.score(row).unwrap() > 0.0;
                bona_fide == (**class == PadClass::BonaFide)
            })
            .count() as f64
            / rows.len() as f64
    };
    let rbf_accuracy = accuracy(Kernel::Rbf { gamma: 2.0 });
    let linear_accuracy = accuracy(Kernel::Linear);

    check(
        "criterion 5",
        kkt_failures == 0 && max_rel_error <= 1e-8 && rbf_accuracy == 1.0 && linear_accuracy < 1.0,
        format!(
            "KKT audit failures {kkt_failures}/50, LDA max relative error {max_rel_error:e}, \
             XOR accuracy rbf {rbf_accuracy} vs linear {linear_accuracy}"
        ),
    );
}

fn gauss(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    // Box-Muller on grid-free uniforms; adequate for test data
    let u: f64 = rng.random::<f64>().max(1e-12);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

#[test]
fn criterion_6_pad_oracle_equivalence() {
    let mut mismatches = 0usize;
    let mut cap_violations = 0usize;
    for seed in 0..200u64 {
        let mut rng = seeded_rng(3000 + seed);
        let bona_fide = random_scores(&mut rng, 50);
        let attack = random_scores(&mut rng, 50);
        let report = pad_report(&det_curve(&bona_fide, &attack).unwrap());
        let expected = oracle_pad(&bona_fide, &attack);
        if report.d_eer != expected.d_eer
            || report.bpcer20 != expected.bpcer20
            || report.bpcer100 != expected.bpcer100
        {
            mismatches += 1;
        }
        if report.bpcer100 < report.bpcer20 {
            cap_violations += 1;
        }
    }
    check(
        "criterion 6",
        mismatches == 0 && cap_violations == 0,
        format!(
            "D-EER/BPCER20/BPCER100 exact on 200 random instances \
             ({mismatches} mismatches, {cap_violations} cap-order violations)"
        ),
    );
}

#[test]
fn criterion_7_sweep_completeness_and_determinism() {
    use padfusion::synth::{DistSpec, SchemeProfile, SynthConfig};
    let start = Instant::now();
    let config = SynthConfig {
        seed: 17,
        subjects: 8,
        samples_per_subject: 2,
        schemes: ["A", "B", "C", "D"]
            .iter()
            .enumerate()
            .map(|(i, name)| SchemeProfile {
                name: (*name).into(),
                genuine: DistSpec::uniform(0.6, 0.4),
                impostor: DistSpec::uniform(0.0, 0.4),
                attack_alpha: vec![0.3 * i as f64 / 3.0],
            })
            .collect(),
    };
    let table = generate(&config).unwrap();

    let single = run_sweep(
        &table,
        2,
        7,
        &SweepConfig {
            workers: 1,
            ..SweepConfig::default()
        },
    )
    .unwrap();
    let parallel = run_sweep(
        &table,
        2,
        7,
        &SweepConfig {
            workers: 8,
            ..SweepConfig::default()
        },
    )
    .unwrap();
    let identical =
        serde_json::to_vec(&single).unwrap() == serde_json::to_vec(&parallel).unwrap();
    let elapsed = start.elapsed();
    check(
        "criterion 7",
        single.cells.len() == 630 && identical && elapsed.as_secs_f64() < 60.0,
        format!(
            "4 schemes -> {} cells, workers 1 vs 8 byte-identical: {identical}, {elapsed:.2?}",
            single.cells.len()
        ),
    );
}

#[test]
fn criterion_7b_fourteen_scheme_smoke() {
    let start = Instant::now();
    let table = generate(&presets::fourteen_schemes()).unwrap();
    let summary = run_sweep(&table, 2, 7, &SweepConfig::default()).unwrap();
    let constellations = summary
        .cells
        .iter()
        .filter(|c| c.norm == NormMethod::ZScore && c.fusion == padfusion::sweep::FusionKind::SumRule)
        .count();
    let elapsed = start.elapsed();
    check(
        "criterion 7b",
        summary.cells.len() == 16_383 * 42
            && constellations == 16_383
            && elapsed.as_secs_f64() < 1800.0,
        format!(
            "14 schemes -> {} cells, {constellations} constellations per norm-fusion pair, {elapsed:.2?}",
            summary.cells.len()
        ),
    );
}

#[test]
fn criterion_8_fusion_benefit() {
    let table = generate(&presets::complementary_pair()).unwrap();
    let summary = run_sweep(&table, 2, 42, &SweepConfig::default()).unwrap();
    let best_single = summary
        .cells
        .iter()
        .filter(|c| c.mask.count_ones() == 1)
        .map(|c| c.mean.d_eer)
        .fold(f64::INFINITY, f64::min);
    let best_fused = summary
        .cells
        .iter()
        .filter(|c| c.mask.count_ones() >= 2)
        .map(|c| c.mean.d_eer)
        .fold(f64::INFINITY, f64::min);
    check(
        "criterion 8",
        best_fused <= 0.5 * best_single,
        format!(
            "complementary preset: best fused mean D-EER {best_fused:.4} vs \
             best single-scheme {best_single:.4}"
        ),
    );
}

#[test]
fn criterion_9_ranking_invariance() {
    let mut ok = true;
    let mut detail = String::new();
    for (a, b) in [(2.5f64, -1.0f64), (0.04, 10.0)] {
        let transform = |x: f64| a * x + b;
        for seed in 0..20u64 {
            let mut rng = seeded_rng(4000 + seed);
            let genuine = random_scores(&mut rng, 30);
            let impostor = random_scores(&mut rng, 30);
            let attack = random_scores(&mut rng, 30);

            // threat metrics are unchanged
            let base_point = find_operating_point(&compute_roc(&genuine, &impostor).unwrap());
            let base_iapmr = iapmr(&attack, &base_point).unwrap();
            let tg: Vec<f64> = genuine.iter().map(|&x| transform(x)).collect();
            let ti: Vec<f64> = impostor.iter().map(|&x| transform(x)).collect();
            let ta: Vec<f64> = attack.iter().map(|&x| transform(x)).collect();
            let point = find_operating_point(&compute_roc(&tg, &ti).unwrap());
            ok &= point.eer == base_point.eer;
            ok &= iapmr(&ta, &point).unwrap() == base_iapmr;

            // PAD metrics are unchanged
            let base_pad = pad_report(&det_curve(&genuine, &attack).unwrap());
            let mapped_pad = pad_report(&det_curve(&tg, &ta).unwrap());
            ok &= base_pad.d_eer == mapped_pad.d_eer
                && base_pad.bpcer20 == mapped_pad.bpcer20
                && base_pad.bpcer100 == mapped_pad.bpcer100;

            // fused-score orderings are unchanged
            let vectors: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..3).map(|_| rng.random_range(0..=100) as f64 / 100.0).collect())
                .collect();
            for rule in [FusionRule::Min, FusionRule::Max, FusionRule::Sum] {
                let fused: Vec<f64> = vectors.iter().map(|v| fuse(v, &rule).unwrap()).collect();
                let mapped: Vec<f64> = vectors
                    .iter()
                    .map(|v| {
                        let t: Vec<f64> = v.iter().map(|&x| transform(x)).collect();
                        fuse(&t, &rule).unwrap()
                    })
                    .collect();
                for i in 0..fused.len() {
                    for j in 0..fused.len() {
                        if fused[i] < fused[j] {
                            ok &= mapped[i] <= mapped[j];
                        }
                        if fused[i] > fused[j] {
                            ok &= mapped[i] >= mapped[j];
                        }
                    }
                }
            }
            if !ok && detail.is_empty() {
                detail = format!("first failure at transform ({a}, {b}), seed {seed}");
            }
        }
    }
    if detail.is_empty() {
        detail = "EER/IAPMR/D-EER and min/max/sum orderings invariant under affine maps".into();
    }
    check("criterion 9", ok, detail);
}
