//! Comparison-score data model: CSV ingestion and validation, FVC-style
//! pairing-plan generation and train/test fold splitting.
//!
//! All scores are stored as similarities (higher = more similar). Schemes
//! that produce distances are negated once at ingestion so every consumer
//! can rely on a single polarity convention.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed leading columns of the score CSV contract, in order.
pub const FIXED_COLUMNS: [&str; 6] = [
    "comparison_id",
    "label",
    "probe_subject",
    "probe_sample",
    "ref_subject",
    "ref_sample",
];

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{column}` in header")]
    MissingColumn { column: String },
    #[error("no scheme columns after the {} fixed columns", FIXED_COLUMNS.len())]
    NoSchemeColumns,
    #[error("duplicate scheme column `{name}`")]
    DuplicateScheme { name: String },
    #[error("record {row}: non-numeric score in column `{column}`: `{value}`")]
    NonNumericScore {
        row: usize,
        column: String,
        value: String,
    },
    #[error("record {row}: invalid comparison_id `{value}`")]
    InvalidComparisonId { row: usize, value: String },
    #[error("record {row}: duplicate comparison_id {id}")]
    DuplicateComparisonId { row: usize, id: u64 },
    #[error("record {row}: invalid label `{value}` (expected genuine, impostor or attack)")]
    InvalidLabel { row: usize, value: String },
    #[error("record {row}: label {label} inconsistent with subjects `{probe}` vs `{reference}`")]
    LabelInconsistentWithSubjects {
        row: usize,
        label: Label,
        probe: String,
        reference: String,
    },
    #[error("record {row}: expected {expected} scores, found {got}")]
    ScoreCountMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("unknown scheme `{name}`")]
    UnknownScheme { name: String },
    #[error("empty input")]
    EmptyInput,
    #[error("fold count must be at least 2, got {k}")]
    InvalidFoldCount { k: usize },
    #[error("too few {label} records: need {needed}, found {got}")]
    TooFewRecords {
        label: String,
        needed: usize,
        got: usize,
    },
}

/// Score polarity of a recognition scheme as produced by the matcher.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Similarity,
    Distance,
}

/// One recognition scheme contributing a score column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeId {
    pub name: String,
    pub polarity: Polarity,
}

impl SchemeId {
    pub fn similarity(name: impl Into<String>) -> Self {
        SchemeId {
            name: name.into(),
            polarity: Polarity::Similarity,
        }
    }

    pub fn distance(name: impl Into<String>) -> Self {
        SchemeId {
            name: name.into(),
            polarity: Polarity::Distance,
        }
    }
}

/// Comparison label of one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Impostor,
    Attack,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Impostor => "impostor",
            Label::Attack => "attack",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "genuine" => Some(Label::Genuine),
            "impostor" => Some(Label::Impostor),
            "attack" => Some(Label::Attack),
            _ => None,
        }
    }

    /// Role of the record in the PAD task: genuine comparisons act as bona
    /// fide presentations, attack comparisons as presentation attacks.
    /// Impostor records carry no PAD role.
    pub fn pad_class(&self) -> Option<PadClass> {
        match self {
            Label::Genuine => Some(PadClass::BonaFide),
            Label::Attack => Some(PadClass::Attack),
            Label::Impostor => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Binary class of a comparison in the PAD task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PadClass {
    BonaFide,
    Attack,
}

/// One labeled comparison with one similarity score per scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub comparison_id: u64,
    pub label: Label,
    pub probe_subject: String,
    pub probe_sample: String,
    pub ref_subject: String,
    pub ref_sample: String,
    pub scores: Vec<f64>,
}

/// A labeled comparison-score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub schemes: Vec<SchemeId>,
    pub records: Vec<ComparisonRecord>,
}

impl ScoreTable {
    pub fn scheme_index(&self, name: &str) -> Option<usize> {
        self.schemes.iter().position(|s| s.name == name)
    }

    pub fn label_count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    /// Scores of one scheme column restricted to one label.
    pub fn scores_for(&self, scheme: usize, label: Label) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.label == label)
            .map(|r| r.scores[scheme])
            .collect()
    }

    /// Indices of records that take part in the PAD task (genuine + attack).
    pub fn pad_indices(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label.pad_class().is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// Checks every structural invariant of the table. Row numbers in errors
    /// are 1-based record indices.
    pub fn validate(&self) -> Result<(), ScoreError> {
        let mut names = BTreeSet::new();
        for scheme in &self.schemes {
            if !names.insert(scheme.name.as_str()) {
                return Err(ScoreError::DuplicateScheme {
                    name: scheme.name.clone(),
                });
            }
        }
        if self.schemes.is_empty() {
            return Err(ScoreError::NoSchemeColumns);
        }
        let mut ids = BTreeSet::new();
        for (idx, record) in self.records.iter().enumerate() {
            let row = idx + 1;
            if record.scores.len() != self.schemes.len() {
                return Err(ScoreError::ScoreCountMismatch {
                    row,
                    expected: self.schemes.len(),
                    got: record.scores.len(),
                });
            }
            if !ids.insert(record.comparison_id) {
                return Err(ScoreError::DuplicateComparisonId {
                    row,
                    id: record.comparison_id,
                });
            }
            let same_subject = record.probe_subject == record.ref_subject;
            let consistent = match record.label {
                // attack probes are compared to their bona fide counterpart,
                // so they carry the same subject identity
                Label::Genuine | Label::Attack => same_subject,
                Label::Impostor => !same_subject,
            };
            if !consistent {
                return Err(ScoreError::LabelInconsistentWithSubjects {
                    row,
                    label: record.label,
                    probe: record.probe_subject.clone(),
                    reference: record.ref_subject.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Ingestion options: scheme polarities plus an optional sample-id filter
/// used to subsample large tables at load time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSchema {
    pub distance_schemes: BTreeSet<String>,
    pub sample_id_filter: Option<BTreeSet<String>>,
}

impl TableSchema {
    pub fn with_distance_schemes<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TableSchema {
            distance_schemes: names.into_iter().map(Into::into).collect(),
            sample_id_filter: None,
        }
    }

    /// Parses a sidecar key-value file. Recognized keys:
    /// `distance_schemes` and `sample_ids`, both comma-separated lists.
    /// Lines starting with `#` are comments.
    pub fn from_sidecar(path: impl AsRef<Path>) -> Result<Self, ScoreError> {
        let text = fs::read_to_string(path)?;
        let mut schema = TableSchema::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let values: BTreeSet<String> = value
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            match key.trim() {
                "distance_schemes" => schema.distance_schemes = values,
                "sample_ids" => schema.sample_id_filter = Some(values),
                _ => {}
            }
        }
        Ok(schema)
    }
}

/// Loads a score CSV. Header contract:
/// `comparison_id,label,probe_subject,probe_sample,ref_subject,ref_sample,<scheme_1>,...,<scheme_n>`.
/// Columns named in `schema.distance_schemes` are negated so the stored
/// table holds similarities only.
pub fn load_score_table(
    path: impl AsRef<Path>,
    schema: &TableSchema,
) -> Result<ScoreTable, ScoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path.as_ref())?;

    let headers = reader.headers()?.clone();
    for (i, expected) in FIXED_COLUMNS.iter().enumerate() {
        match headers.get(i) {
            Some(actual) if actual == *expected => {}
            _ => {
                return Err(ScoreError::MissingColumn {
                    column: expected.to_string(),
                })
            }
        }
    }
    let scheme_names: Vec<String> = headers
        .iter()
        .skip(FIXED_COLUMNS.len())
        .map(|s| s.to_string())
        .collect();
    if scheme_names.is_empty() {
        return Err(ScoreError::NoSchemeColumns);
    }
    for name in &schema.distance_schemes {
        if !scheme_names.iter().any(|s| s == name) {
            return Err(ScoreError::UnknownScheme { name: name.clone() });
        }
    }
    let schemes: Vec<SchemeId> = scheme_names
        .iter()
        .map(|name| SchemeId {
            name: name.clone(),
            polarity: if schema.distance_schemes.contains(name) {
                Polarity::Distance
            } else {
                Polarity::Similarity
            },
        })
        .collect();

    let mut records = Vec::new();
    for (idx, result) in reader.records().enumerate() {
        let row = idx + 1;
        let record = result?;
        let id_field = record.get(0).unwrap_or("");
        let comparison_id: u64 =
            id_field
                .trim()
                .parse()
                .map_err(|_| ScoreError::InvalidComparisonId {
                    row,
                    value: id_field.to_string(),
                })?;
        let label_field = record.get(1).unwrap_or("");
        let label = Label::parse(label_field).ok_or_else(|| ScoreError::InvalidLabel {
            row,
            value: label_field.to_string(),
        })?;
        let mut scores = Vec::with_capacity(schemes.len());
        for (j, scheme) in schemes.iter().enumerate() {
            let field = record.get(FIXED_COLUMNS.len() + j).unwrap_or("");
            let value: f64 = field
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| ScoreError::NonNumericScore {
                    row,
                    column: scheme.name.clone(),
                    value: field.to_string(),
                })?;
            scores.push(match scheme.polarity {
                Polarity::Similarity => value,
                Polarity::Distance => -value,
            });
        }
        records.push(ComparisonRecord {
            comparison_id,
            label,
            probe_subject: record.get(2).unwrap_or("").to_string(),
            probe_sample: record.get(3).unwrap_or("").to_string(),
            ref_subject: record.get(4).unwrap_or("").to_string(),
            ref_sample: record.get(5).unwrap_or("").to_string(),
            scores,
        });
    }

    if let Some(filter) = &schema.sample_id_filter {
        records.retain(|r| filter.contains(&r.probe_sample) && filter.contains(&r.ref_sample));
    }

    let table = ScoreTable { schemes, records };
    table.validate()?;
    Ok(table)
}

/// Writes a table back to the CSV contract. Distance-polarity columns are
/// un-negated so the file holds the scores as the matcher produced them;
/// reloading with the same schema yields an identical table.
pub fn save_score_table(table: &ScoreTable, path: impl AsRef<Path>) -> Result<(), ScoreError> {
    let mut out = fs::File::create(path.as_ref())?;
    let mut header: Vec<&str> = FIXED_COLUMNS.to_vec();
    for scheme in &table.schemes {
        header.push(&scheme.name);
    }
    writeln!(out, "{}", header.join(","))?;
    for record in &table.records {
        let mut fields = vec![
            record.comparison_id.to_string(),
            record.label.as_str().to_string(),
            record.probe_subject.clone(),
            record.probe_sample.clone(),
            record.ref_subject.clone(),
            record.ref_sample.clone(),
        ];
        for (scheme, score) in table.schemes.iter().zip(&record.scores) {
            let raw = match scheme.polarity {
                Polarity::Similarity => *score,
                Polarity::Distance => -*score,
            };
            fields.push(format!("{raw}"));
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// One biometric sample, identified by subject and sample id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRef {
    pub subject: String,
    pub sample: String,
}

impl SampleRef {
    pub fn new(subject: impl Into<String>, sample: impl Into<String>) -> Self {
        SampleRef {
            subject: subject.into(),
            sample: sample.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Genuine,
    Impostor,
}

/// One planned comparison of the FVC protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedPair {
    pub probe: SampleRef,
    pub reference: SampleRef,
    pub kind: PairKind,
}

/// Builds the FVC comparison plan: every possible genuine comparison, plus
/// impostor comparisons between the first samples of distinct subjects only.
/// "First" means first appearance in the input order.
pub fn fvc_pairing_plan(samples: &[SampleRef]) -> Result<Vec<PlannedPair>, ScoreError> {
    if samples.is_empty() {
        return Err(ScoreError::EmptyInput);
    }
    // group by subject, preserving first-appearance order
    let mut subjects: Vec<(&str, Vec<&SampleRef>)> = Vec::new();
    for sample in samples {
        match subjects.iter_mut().find(|(s, _)| *s == sample.subject) {
            Some((_, list)) => list.push(sample),
            None => subjects.push((sample.subject.as_str(), vec![sample])),
        }
    }

    let mut plan = Vec::new();
    for (_, list) in &subjects {
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                plan.push(PlannedPair {
                    probe: list[j].clone(),
                    reference: list[i].clone(),
                    kind: PairKind::Genuine,
                });
            }
        }
    }
    for a in 0..subjects.len() {
        for b in (a + 1)..subjects.len() {
            plan.push(PlannedPair {
                probe: subjects[b].1[0].clone(),
                reference: subjects[a].1[0].clone(),
                kind: PairKind::Impostor,
            });
        }
    }
    Ok(plan)
}

/// How records are distributed over folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldStrategy {
    /// Per-label round-robin after a seeded shuffle.
    #[default]
    Stratified,
    /// Whole probe subjects assigned to folds; records follow their probe
    /// subject.
    SubjectDisjoint,
}

/// A deterministic partition of a table's records into k folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub seed: u64,
    pub strategy: FoldStrategy,
    /// comparison_id -> fold index
    pub assignments: BTreeMap<u64, usize>,
}

impl FoldSplit {
    pub fn fold_of(&self, comparison_id: u64) -> Option<usize> {
        self.assignments.get(&comparison_id).copied()
    }

    /// Record indices split into (train, test) for one fold.
    pub fn split_indices(&self, table: &ScoreTable, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, record) in table.records.iter().enumerate() {
            match self.fold_of(record.comparison_id) {
                Some(f) if f == fold => test.push(i),
                Some(_) => train.push(i),
                None => {}
            }
        }
        (train, test)
    }
}

/// Stratified k-fold split (the default strategy).
pub fn make_folds(table: &ScoreTable, k: usize, seed: u64) -> Result<FoldSplit, ScoreError> {
    make_folds_with(table, k, seed, FoldStrategy::Stratified)
}

pub fn make_folds_with(
    table: &ScoreTable,
    k: usize,
    seed: u64,
    strategy: FoldStrategy,
) -> Result<FoldSplit, ScoreError> {
    if k < 2 {
        return Err(ScoreError::InvalidFoldCount { k });
    }
    for label in [Label::Genuine, Label::Attack] {
        let count = table.label_count(label);
        if count < k {
            return Err(ScoreError::TooFewRecords {
                label: label.as_str().to_string(),
                needed: k,
                got: count,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    match strategy {
        FoldStrategy::Stratified => {
            for label in [Label::Genuine, Label::Impostor, Label::Attack] {
                let mut ids: Vec<u64> = table
                    .records
                    .iter()
                    .filter(|r| r.label == label)
                    .map(|r| r.comparison_id)
                    .collect();
                ids.shuffle(&mut rng);
                for (pos, id) in ids.into_iter().enumerate() {
                    assignments.insert(id, pos % k);
                }
            }
        }
        FoldStrategy::SubjectDisjoint => {
            let mut subjects: Vec<&str> = Vec::new();
            for record in &table.records {
                if !subjects.contains(&record.probe_subject.as_str()) {
                    subjects.push(record.probe_subject.as_str());
                }
            }
            subjects.shuffle(&mut rng);
            let fold_of_subject: BTreeMap<&str, usize> = subjects
                .iter()
                .enumerate()
                .map(|(pos, s)| (*s, pos % k))
                .collect();
            for record in &table.records {
                assignments.insert(
                    record.comparison_id,
                    fold_of_subject[record.probe_subject.as_str()],
                );
            }
            // subject-disjoint assignment cannot guarantee stratification;
            // reject splits that leave a fold without both PAD classes
            for fold in 0..k {
                for label in [Label::Genuine, Label::Attack] {
                    let count = table
                        .records
                        .iter()
                        .filter(|r| r.label == label && assignments[&r.comparison_id] == fold)
                        .count();
                    if count == 0 {
                        return Err(ScoreError::TooFewRecords {
                            label: format!("{} in fold {}", label.as_str(), fold),
                            needed: 1,
                            got: 0,
                        });
                    }
                }
            }
        }
    }

    Ok(FoldSplit {
        k,
        seed,
        strategy,
        assignments,
    })
}
