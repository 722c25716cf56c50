//! The two-scenario threat protocol: ROC/EER on licit (genuine vs impostor)
//! scores, operating-threshold determination, and IAPMR on attack scores.
//!
//! All rate computation is non-interpolating threshold counting: candidate
//! thresholds are the distinct observed scores plus one sentinel below the
//! minimum and one above the maximum, and a comparison is accepted iff its
//! score is >= the threshold. When genuine and impostor scores separate
//! perfectly, every threshold in a whole interval yields a zero EER; the
//! operating point then carries the left-most and right-most eligible
//! threshold, and the IAPMR is reported for both extremes (IAPMR-L/IAPMR-R).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score_model::{Label, ScoreTable};

#[derive(Debug, Error)]
pub enum ThreatError {
    #[error("empty score list: {0}")]
    EmptyScoreList(&'static str),
    #[error("table has no {label} records")]
    MissingLabelClass { label: &'static str },
    #[error("unknown scheme `{name}`")]
    UnknownScheme { name: String },
}

/// False match / false non-match rates over the candidate thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Sorted candidate thresholds: one sentinel below the minimum observed
    /// score, every distinct observed score, one sentinel above the maximum.
    pub thresholds: Vec<f64>,
    pub fmr: Vec<f64>,
    pub fnmr: Vec<f64>,
}

/// EER operating point. `threshold_left < threshold_right` only when the
/// EER is zero and a whole threshold interval attains it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub eer: f64,
    pub threshold_left: f64,
    pub threshold_right: f64,
}

/// Two-scenario outcome for one scheme against one attack set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatReport {
    pub scheme: String,
    pub eer: f64,
    pub iapmr_left: f64,
    pub iapmr_right: f64,
}

/// Shared threshold scan: `positive` scores should be accepted, `negative`
/// scores rejected. Returns per-threshold acceptance rate of negatives
/// (FMR/APCER role) and rejection rate of positives (FNMR/BPCER role).
pub(crate) fn threshold_scan(
    positive: &[f64],
    negative: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut pos: Vec<f64> = positive.to_vec();
    let mut neg: Vec<f64> = negative.to_vec();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);

    let mut distinct: Vec<f64> = pos.iter().chain(neg.iter()).copied().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let mut thresholds = Vec::with_capacity(distinct.len() + 2);
    thresholds.push(distinct[0] - 1.0);
    thresholds.extend_from_slice(&distinct);
    thresholds.push(distinct[distinct.len() - 1] + 1.0);

    let n_pos = pos.len() as f64;
    let n_neg = neg.len() as f64;
    let mut neg_accept = Vec::with_capacity(thresholds.len());
    let mut pos_reject = Vec::with_capacity(thresholds.len());
    for &t in &thresholds {
        // number of scores < t on a sorted slice
        let below_neg = neg.partition_point(|&s| s < t);
        let below_pos = pos.partition_point(|&s| s < t);
        neg_accept.push((neg.len() - below_neg) as f64 / n_neg);
        pos_reject.push(below_pos as f64 / n_pos);
    }
    (thresholds, neg_accept, pos_reject)
}

/// Contiguous run of threshold indices minimizing |a - b|.
pub(crate) fn min_diff_run(a: &[f64], b: &[f64]) -> (usize, usize, f64) {
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let diff = (a[i] - b[i]).abs();
        if diff < best {
            best = diff;
        }
    }
    let lo = (0..a.len())
        .find(|&i| (a[i] - b[i]).abs() == best)
        .expect("non-empty curve");
    let hi = (0..a.len())
        .rev()
        .find(|&i| (a[i] - b[i]).abs() == best)
        .expect("non-empty curve");
    (lo, hi, best)
}

/// ROC of the licit scenario.
pub fn compute_roc(genuine: &[f64], impostor: &[f64]) -> Result<RocCurve, ThreatError> {
    if genuine.is_empty() {
        return Err(ThreatError::EmptyScoreList("genuine"));
    }
    if impostor.is_empty() {
        return Err(ThreatError::EmptyScoreList("impostor"));
    }
    let (thresholds, fmr, fnmr) = threshold_scan(genuine, impostor);
    Ok(RocCurve {
        thresholds,
        fmr,
        fnmr,
    })
}

impl RocCurve {
    /// FMR of the step function at an arbitrary threshold.
    pub fn fmr_at(&self, t: f64) -> f64 {
        self.rate_at(&self.fmr, t)
    }

    /// FNMR of the step function at an arbitrary threshold.
    pub fn fnmr_at(&self, t: f64) -> f64 {
        self.rate_at(&self.fnmr, t)
    }

    fn rate_at(&self, rates: &[f64], t: f64) -> f64 {
        // both rates are constant on (threshold[i-1], threshold[i]]
        let idx = self
            .thresholds
            .partition_point(|&c| c < t)
            .min(self.thresholds.len() - 1);
        rates[idx]
    }
}

/// Determines the EER operating point of a ROC curve.
///
/// The candidates minimizing |FMR - FNMR| always form a contiguous run
/// because FMR - FNMR is non-increasing in the threshold. When the minimum
/// is exactly zero with FMR = FNMR = 0 (perfect separation), the whole
/// real interval from just above the previous candidate up to the last
/// zero-error candidate is eligible, and the two interval ends are reported.
/// Otherwise a single threshold (the smallest minimizing candidate) is used
/// and the EER is the midpoint (FMR + FNMR) / 2 there.
pub fn find_operating_point(roc: &RocCurve) -> OperatingPoint {
    let (lo, hi, _) = min_diff_run(&roc.fmr, &roc.fnmr);
    let eer = (roc.fmr[lo] + roc.fnmr[lo]) / 2.0;
    if eer == 0.0 {
        // lo >= 1: the sentinel below the minimum always accepts every
        // impostor, so it can never attain FMR = 0
        OperatingPoint {
            eer,
            threshold_left: roc.thresholds[lo - 1].next_up(),
            threshold_right: roc.thresholds[hi],
        }
    } else {
        OperatingPoint {
            eer,
            threshold_left: roc.thresholds[lo],
            threshold_right: roc.thresholds[lo],
        }
    }
}

/// IAPMR at the left and right extremes of the operating point.
pub fn iapmr(attack: &[f64], point: &OperatingPoint) -> Result<(f64, f64), ThreatError> {
    if attack.is_empty() {
        return Err(ThreatError::EmptyScoreList("attack"));
    }
    let n = attack.len() as f64;
    let left = attack.iter().filter(|&&s| s >= point.threshold_left).count() as f64 / n;
    let right = attack
        .iter()
        .filter(|&&s| s >= point.threshold_right)
        .count() as f64
        / n;
    Ok((left, right))
}

/// Runs the full two-scenario protocol for one scheme of a table.
pub fn run_two_scenario(table: &ScoreTable, scheme: &str) -> Result<ThreatReport, ThreatError> {
    let index = table
        .scheme_index(scheme)
        .ok_or_else(|| ThreatError::UnknownScheme {
            name: scheme.to_string(),
        })?;
    let genuine = table.scores_for(index, Label::Genuine);
    let impostor = table.scores_for(index, Label::Impostor);
    let attack = table.scores_for(index, Label::Attack);
    if genuine.is_empty() {
        return Err(ThreatError::MissingLabelClass { label: "genuine" });
    }
    if impostor.is_empty() {
        return Err(ThreatError::MissingLabelClass { label: "impostor" });
    }
    if attack.is_empty() {
        return Err(ThreatError::MissingLabelClass { label: "attack" });
    }
    let roc = compute_roc(&genuine, &impostor)?;
    let point = find_operating_point(&roc);
    let (iapmr_left, iapmr_right) = iapmr(&attack, &point)?;
    Ok(ThreatReport {
        scheme: scheme.to_string(),
        eer: point.eer,
        iapmr_left,
        iapmr_right,
    })
}
