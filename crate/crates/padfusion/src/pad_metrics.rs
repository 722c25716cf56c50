//! ISO 30107-3 PAD metrics over fused decision scores: APCER, BPCER, the
//! detection EER and the BPCER at fixed APCER caps (BPCER20, BPCER100).
//!
//! Uses the same non-interpolating threshold-scan convention as the threat
//! module: a comparison is classified bona fide iff its score is >= the
//! threshold, and candidate thresholds are the distinct observed scores
//! plus one sentinel on each side.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::threat::{min_diff_run, threshold_scan};

#[derive(Debug, Error)]
pub enum PadError {
    #[error("empty score list: {0}")]
    EmptyScoreList(&'static str),
}

/// APCER / BPCER over the candidate thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetCurve {
    pub thresholds: Vec<f64>,
    pub apcer: Vec<f64>,
    pub bpcer: Vec<f64>,
}

/// The three reported PAD metrics with their operating thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PadReport {
    pub d_eer: f64,
    pub bpcer20: f64,
    pub bpcer100: f64,
    pub d_eer_threshold: f64,
    pub bpcer20_threshold: f64,
    pub bpcer100_threshold: f64,
}

/// Scans all candidate thresholds:
/// `APCER(t) = |{attack >= t}| / N_att`, `BPCER(t) = |{bona fide < t}| / N_bf`.
pub fn det_curve(bona_fide: &[f64], attack: &[f64]) -> Result<DetCurve, PadError> {
    if bona_fide.is_empty() {
        return Err(PadError::EmptyScoreList("bona fide"));
    }
    if attack.is_empty() {
        return Err(PadError::EmptyScoreList("attack"));
    }
    let (thresholds, apcer, bpcer) = threshold_scan(bona_fide, attack);
    Ok(DetCurve {
        thresholds,
        apcer,
        bpcer,
    })
}

/// Reduces a DET curve to D-EER, BPCER20 and BPCER100.
///
/// D-EER follows the same minimum-|APCER - BPCER| rule as the threat module
/// (midpoint at the smallest minimizing candidate). BPCER-at-cap is the
/// smallest BPCER among thresholds whose APCER stays within the cap; the
/// sentinel above the maximum score guarantees such a threshold exists.
pub fn pad_report(curve: &DetCurve) -> PadReport {
    let (lo, _, _) = min_diff_run(&curve.apcer, &curve.bpcer);
    let d_eer = (curve.apcer[lo] + curve.bpcer[lo]) / 2.0;
    let (bpcer20, bpcer20_threshold) = bpcer_at_cap(curve, 0.05);
    let (bpcer100, bpcer100_threshold) = bpcer_at_cap(curve, 0.01);
    PadReport {
        d_eer,
        bpcer20,
        bpcer100,
        d_eer_threshold: curve.thresholds[lo],
        bpcer20_threshold,
        bpcer100_threshold,
    }
}

fn bpcer_at_cap(curve: &DetCurve, cap: f64) -> (f64, f64) {
    // APCER is non-increasing and BPCER non-decreasing in the threshold, so
    // the smallest eligible threshold carries the smallest BPCER
    let idx = (0..curve.thresholds.len())
        .find(|&i| curve.apcer[i] <= cap)
        .expect("sentinel threshold has APCER 0");
    (curve.bpcer[idx], curve.thresholds[idx])
}

impl DetCurve {
    /// Writes the curve as `threshold,apcer,bpcer` CSV for external
    /// plotting.
    pub fn write_csv<W: io::Write>(&self, mut writer: W) -> io::Result<()> {
        writeln!(writer, "threshold,apcer,bpcer")?;
        for i in 0..self.thresholds.len() {
            writeln!(
                writer,
                "{},{},{}",
                self.thresholds[i], self.apcer[i], self.bpcer[i]
            )?;
        }
        Ok(())
    }
}
