//! Command-line front-end: `threat`, `pad`, `sweep` and `synth` subcommands
//! over the library. Exit codes: 0 success, 2 validation error,
//! 3 computational failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::normalize::{fit, NormMethod, NormalizerParams};
use crate::pad_metrics::PadReport;
use crate::score_model::{
    load_score_table, make_folds_with, save_score_table, FoldStrategy, Label, ScoreTable,
    TableSchema,
};
use crate::sweep::{
    evaluate_cell_fold, run_sweep, Constellation, FoldOutcome, FusionKind, SweepConfig,
    SweepSummary,
};
use crate::synth::{generate, presets, SynthConfig};
use crate::threat::{run_two_scenario, ThreatReport};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Computation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Computation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Computation(m) => m,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn computation(e: impl std::fmt::Display) -> CliError {
    CliError::Computation(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "padfusion",
    version,
    about = "Threat analysis and presentation attack detection by score-level fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-scenario threat analysis: EER and IAPMR-L/IAPMR-R per scheme
    Threat(ThreatArgs),
    /// Evaluate one scheme constellation with a norm-fusion combination
    Pad(PadArgs),
    /// Exhaustive sweep over all constellations x norms x fusions
    Sweep(SweepArgs),
    /// Generate a synthetic score table
    Synth(SynthArgs),
}

#[derive(Args)]
struct ScoresArgs {
    /// Score CSV (see the data contract in the README)
    #[arg(long)]
    scores: PathBuf,
    /// Scheme names whose scores are distances (negated at load)
    #[arg(long, value_delimiter = ',')]
    distance_schemes: Vec<String>,
    /// Sidecar schema file; defaults to `<scores>.schema` when present
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Keep only comparisons whose probe and reference sample ids are listed
    #[arg(long, value_delimiter = ',')]
    sample_ids: Vec<String>,
}

impl ScoresArgs {
    fn schema(&self) -> Result<TableSchema, CliError> {
        let mut schema = if let Some(path) = &self.schema {
            TableSchema::from_sidecar(path).map_err(validation)?
        } else {
            let sidecar = PathBuf::from(format!("{}.schema", self.scores.display()));
            if sidecar.is_file() {
                TableSchema::from_sidecar(&sidecar).map_err(validation)?
            } else {
                TableSchema::default()
            }
        };
        if !self.distance_schemes.is_empty() {
            schema.distance_schemes = self.distance_schemes.iter().cloned().collect();
        }
        if !self.sample_ids.is_empty() {
            schema.sample_id_filter = Some(self.sample_ids.iter().cloned().collect());
        }
        Ok(schema)
    }

    fn load(&self) -> Result<ScoreTable, CliError> {
        load_score_table(&self.scores, &self.schema()?).map_err(validation)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory for artifacts and the run manifest
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct ThreatArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PadArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Scheme names forming the constellation
    #[arg(long, value_delimiter = ',', required = true)]
    schemes: Vec<String>,
    /// Normalization: no-norm, min-max-norm, z-norm, tanh-norm,
    /// unit-length-norm or rhe-norm
    #[arg(long, default_value = "no-norm")]
    norm: String,
    /// Fusion: max-rule, min-rule, sum-rule, weighted-sum, svm-lin, svm-rbf
    /// or lda-fusion
    #[arg(long)]
    fusion: String,
    #[arg(long, default_value_t = 2)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    svm_c: f64,
    #[arg(long)]
    svm_gamma: Option<f64>,
    /// Assign whole probe subjects to folds instead of stratifying by label
    #[arg(long)]
    subject_disjoint_folds: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scores: ScoresArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 2)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses the default pool
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 1.0)]
    svm_c: f64,
    #[arg(long)]
    svm_gamma: Option<f64>,
    /// Ranked cells kept in the summary and printed
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Guard against accidental huge sweeps
    #[arg(long, default_value_t = 24)]
    max_schemes: usize,
    #[arg(long)]
    subject_disjoint_folds: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Bundled preset: fig1, complementary, separable or fourteen
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Synth config as JSON
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; the table is written as `scores.csv`
    #[arg(long)]
    out: PathBuf,
}

/// Parses the process arguments and runs the selected command. Returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Threat(args) => cmd_threat(args),
        Command::Pad(args) => cmd_pad(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(computation)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(computation)?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(computation)
}

fn write_manifest(out: &Path, command: &str, config: serde_json::Value) -> Result<(), CliError> {
    let manifest = json!({
        "tool": "padfusion",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    write_json(&out.join("manifest.json"), &manifest)
}

fn pct(rate: f64) -> String {
    format!("{:.2}", rate * 100.0)
}

fn cmd_threat(args: ThreatArgs) -> Result<(), CliError> {
    let table = args.scores.load()?;
    let reports: Vec<ThreatReport> = table
        .schemes
        .iter()
        .map(|s| run_two_scenario(&table, &s.name))
        .collect::<Result<_, _>>()
        .map_err(validation)?;

    match args.output.format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&reports).map_err(computation)?
            );
        }
        Format::Table => {
            let name_width = reports
                .iter()
                .map(|r| r.scheme.len())
                .max()
                .unwrap_or(6)
                .max("scheme".len());
            println!(
                "{:<name_width$}  {:>8}  {:>9}  {:>9}",
                "scheme", "eer%", "iapmr-l%", "iapmr-r%"
            );
            for report in &reports {
                println!(
                    "{:<name_width$}  {:>8}  {:>9}  {:>9}",
                    report.scheme,
                    pct(report.eer),
                    pct(report.iapmr_left),
                    pct(report.iapmr_right)
                );
            }
        }
    }

    if let Some(out) = &args.output.out {
        ensure_out_dir(out)?;
        write_json(&out.join("threat_reports.json"), &reports)?;
        write_manifest(
            out,
            "threat",
            json!({
                "scores": args.scores.scores.display().to_string(),
                "schema": args.scores.schema()?,
            }),
        )?;
    }
    Ok(())
}

/// Serialized outcome of one `pad` invocation.
#[derive(Debug, Serialize)]
struct PadCommandReport {
    schemes: Vec<String>,
    norm: NormMethod,
    fusion: FusionKind,
    k: usize,
    seed: u64,
    unit_norm_skipped: bool,
    folds: Vec<FoldOutcome>,
    mean: PadReport,
    /// Normalizer parameters fitted on each fold's training split.
    fitted_params: Vec<NormalizerParams>,
}

fn parse_norm(id: &str) -> Result<NormMethod, CliError> {
    NormMethod::from_id(id).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown norm `{id}` (expected one of: {})",
            NormMethod::ALL.map(|m| m.id()).join(", ")
        ))
    })
}

fn parse_fusion(id: &str) -> Result<FusionKind, CliError> {
    FusionKind::from_id(id).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown fusion `{id}` (expected one of: {})",
            FusionKind::ALL.map(|f| f.id()).join(", ")
        ))
    })
}

fn cmd_pad(args: PadArgs) -> Result<(), CliError> {
    let table = args.scores.load()?;
    let norm = parse_norm(&args.norm)?;
    let fusion = parse_fusion(&args.fusion)?;
    let scheme_refs: Vec<&str> = args.schemes.iter().map(String::as_str).collect();
    let constellation = Constellation::from_scheme_names(&table, &scheme_refs).map_err(validation)?;
    let strategy = if args.subject_disjoint_folds {
        FoldStrategy::SubjectDisjoint
    } else {
        FoldStrategy::Stratified
    };
    let config = SweepConfig {
        svm_c: args.svm_c,
        svm_gamma: args.svm_gamma,
        fold_strategy: strategy,
        ..SweepConfig::default()
    };
    let split =
        make_folds_with(&table, args.folds, args.seed, strategy).map_err(validation)?;

    let unit_norm_skipped = constellation.scheme_count() == 1 && norm == NormMethod::UnitLength;
    if unit_norm_skipped {
        eprintln!(
            "warning: unit-length-norm is omitted for a single-scheme constellation; \
             evaluating without normalization"
        );
    }
    let effective = if unit_norm_skipped {
        NormMethod::NoNorm
    } else {
        norm
    };

    let mut folds = Vec::with_capacity(args.folds);
    let mut fitted_params = Vec::with_capacity(args.folds);
    for fold in 0..args.folds {
        folds.push(evaluate_cell_fold(
            &table,
            &split,
            fold,
            constellation,
            norm,
            fusion,
            &config,
        ));
        let (train_idx, _) = split.split_indices(&table, fold);
        let (train_rows, train_classes) =
            crate::sweep::project_rows(&table, &train_idx, constellation);
        fitted_params.push(fit(&train_rows, &train_classes, effective).map_err(validation)?);
    }
    if let Some(failure) = folds.iter().find_map(|f| f.failure.as_ref()) {
        return Err(CliError::Computation(format!(
            "cell {}x{} on {:?} failed: {failure}",
            norm,
            fusion,
            args.schemes
        )));
    }

    let n = folds.len() as f64;
    let mean = PadReport {
        d_eer: folds.iter().map(|f| f.report.d_eer).sum::<f64>() / n,
        bpcer20: folds.iter().map(|f| f.report.bpcer20).sum::<f64>() / n,
        bpcer100: folds.iter().map(|f| f.report.bpcer100).sum::<f64>() / n,
        d_eer_threshold: folds.iter().map(|f| f.report.d_eer_threshold).sum::<f64>() / n,
        bpcer20_threshold: folds.iter().map(|f| f.report.bpcer20_threshold).sum::<f64>() / n,
        bpcer100_threshold: folds
            .iter()
            .map(|f| f.report.bpcer100_threshold)
            .sum::<f64>()
            / n,
    };
    let report = PadCommandReport {
        schemes: constellation.scheme_names(&table),
        norm,
        fusion,
        k: args.folds,
        seed: args.seed,
        unit_norm_skipped,
        folds,
        mean,
        fitted_params,
    };

    match args.output.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).map_err(computation)?
        ),
        Format::Table => {
            println!(
                "{:<6}  {:>8}  {:>9}  {:>10}",
                "fold", "d-eer%", "bpcer20%", "bpcer100%"
            );
            for (i, fold) in report.folds.iter().enumerate() {
                println!(
                    "{:<6}  {:>8}  {:>9}  {:>10}",
                    i + 1,
                    pct(fold.report.d_eer),
                    pct(fold.report.bpcer20),
                    pct(fold.report.bpcer100)
                );
            }
            println!(
                "{:<6}  {:>8}  {:>9}  {:>10}",
                "mean",
                pct(report.mean.d_eer),
                pct(report.mean.bpcer20),
                pct(report.mean.bpcer100)
            );
        }
    }

    if let Some(out) = &args.output.out {
        ensure_out_dir(out)?;
        write_json(&out.join("pad_report.json"), &report)?;
        write_manifest(
            out,
            "pad",
            json!({
                "scores": args.scores.scores.display().to_string(),
                "schema": args.scores.schema()?,
                "schemes": args.schemes,
                "norm": norm.id(),
                "fusion": fusion.id(),
                "folds": args.folds,
                "seed": args.seed,
                "svm_c": args.svm_c,
                "svm_gamma": args.svm_gamma,
                "subject_disjoint_folds": args.subject_disjoint_folds,
            }),
        )?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let table = args.scores.load()?;
    let config = SweepConfig {
        svm_c: args.svm_c,
        svm_gamma: args.svm_gamma,
        workers: args.workers,
        max_schemes: args.max_schemes,
        top_cells: args.top,
        fold_strategy: if args.subject_disjoint_folds {
            FoldStrategy::SubjectDisjoint
        } else {
            FoldStrategy::Stratified
        },
    };
    let summary = run_sweep(&table, args.folds, args.seed, &config).map_err(validation)?;

    match args.output.format {
        Format::Json => {
            let condensed = json!({
                "schemes": summary.schemes,
                "k": summary.k,
                "seed": summary.seed,
                "cells": summary.cells.len(),
                "best": summary.best,
                "pairs": summary.pairs,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&condensed).map_err(computation)?
            );
        }
        Format::Table => {
            println!(
                "{} schemes, {} constellations, {} cells, k = {}",
                summary.schemes.len(),
                (1usize << summary.schemes.len()) - 1,
                summary.cells.len(),
                summary.k
            );
            println!(
                "{:<4}  {:>8}  {:>9}  {:>10}  {:<12}  {:<16}  schemes",
                "rank", "d-eer%", "bpcer20%", "bpcer100%", "fusion", "norm"
            );
            for cell in &summary.best {
                println!(
                    "{:<4}  {:>8}  {:>9}  {:>10}  {:<12}  {:<16}  {}",
                    cell.rank,
                    pct(cell.mean.d_eer),
                    pct(cell.mean.bpcer20),
                    pct(cell.mean.bpcer100),
                    cell.fusion.id(),
                    cell.norm.id(),
                    cell.schemes.join(",")
                );
            }
        }
    }

    if let Some(out) = &args.output.out {
        ensure_out_dir(out)?;
        write_json(&out.join("sweep_summary.json"), &summary)?;
        fs::write(&out.join("boxplot_stats.csv"), boxplot_csv(&summary)).map_err(computation)?;
        fs::write(&out.join("best_cells.csv"), best_cells_csv(&summary)).map_err(computation)?;
        write_manifest(
            out,
            "sweep",
            json!({
                "scores": args.scores.scores.display().to_string(),
                "schema": args.scores.schema()?,
                "folds": args.folds,
                "seed": args.seed,
                "workers": args.workers,
                "svm_c": args.svm_c,
                "svm_gamma": args.svm_gamma,
                "top": args.top,
                "max_schemes": args.max_schemes,
                "subject_disjoint_folds": args.subject_disjoint_folds,
            }),
        )?;
    }
    Ok(())
}

fn boxplot_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("index,norm,fusion,min,q1,median,q3,max\n");
    for pair in &summary.pairs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            pair.index,
            pair.norm.id(),
            pair.fusion.id(),
            pair.min,
            pair.q1,
            pair.median,
            pair.q3,
            pair.max
        ));
    }
    out
}

fn best_cells_csv(summary: &SweepSummary) -> String {
    let mut out = String::from("rank,d_eer,bpcer20,bpcer100,fusion,norm");
    for scheme in &summary.schemes {
        out.push(',');
        out.push_str(scheme);
    }
    out.push('\n');
    for cell in &summary.best {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            cell.rank,
            pct(cell.mean.d_eer),
            pct(cell.mean.bpcer20),
            pct(cell.mean.bpcer100),
            cell.fusion.id(),
            cell.norm.id()
        ));
        for (i, _) in summary.schemes.iter().enumerate() {
            out.push(',');
            if cell.mask & (1 << i) != 0 {
                out.push('x');
            }
        }
        out.push('\n');
    }
    out
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let mut config: SynthConfig = match (&args.preset, &args.config) {
        (Some(name), None) => presets::by_name(name).ok_or_else(|| {
            CliError::Validation(format!(
                "unknown preset `{name}` (expected one of: {})",
                presets::NAMES.join(", ")
            ))
        })?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(validation)?;
            serde_json::from_str(&text).map_err(validation)?
        }
        _ => {
            return Err(CliError::Validation(
                "exactly one of --preset or --config is required".into(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let table = generate(&config).map_err(validation)?;

    ensure_out_dir(&args.out)?;
    let csv_path = args.out.join("scores.csv");
    save_score_table(&table, &csv_path).map_err(computation)?;
    write_manifest(&args.out, "synth", json!({ "config": config }))?;

    println!(
        "wrote {} ({} genuine, {} impostor, {} attack records, {} schemes)",
        csv_path.display(),
        table.label_count(Label::Genuine),
        table.label_count(Label::Impostor),
        table.label_count(Label::Attack),
        table.schemes.len()
    );
    Ok(())
}
