//! Brute-force oracles shared by the integration suites. They follow the
//! same threshold convention as the library (candidates = distinct scores
//! plus sentinels, accept iff score >= threshold) but count rates by direct
//! enumeration over all (threshold, score) pairs, independent of the
//! implementation path they check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn candidates(lists: &[&[f64]]) -> Vec<f64> {
    let mut distinct: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut all = Vec::with_capacity(distinct.len() + 2);
    all.push(distinct[0] - 1.0);
    all.extend_from_slice(&distinct);
    all.push(distinct[distinct.len() - 1] + 1.0);
    all
}

fn count_ge(scores: &[f64], t: f64) -> usize {
    scores.iter().filter(|&&s| s >= t).count()
}

fn count_lt(scores: &[f64], t: f64) -> usize {
    scores.iter().filter(|&&s| s < t).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub eer: f64,
    pub threshold_left: f64,
    pub threshold_right: f64,
}

/// Exhaustive threshold scan for the licit-scenario operating point.
pub fn oracle_operating_point(genuine: &[f64], impostor: &[f64]) -> OraclePoint {
    let thresholds = candidates(&[genuine, impostor]);
    let rates: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            (
                count_ge(impostor, t) as f64 / impostor.len() as f64,
                count_lt(genuine, t) as f64 / genuine.len() as f64,
            )
        })
        .collect();
    let mut best = f64::INFINITY;
    for &(fmr, fnmr) in &rates {
        best = best.min((fmr - fnmr).abs());
    }
    let minimizers: Vec<usize> = (0..rates.len())
        .filter(|&i| (rates[i].0 - rates[i].1).abs() == best)
        .collect();
    let lo = minimizers[0];
    let hi = *minimizers.last().unwrap();
    let eer = (rates[lo].0 + rates[lo].1) / 2.0;
    if eer == 0.0 {
        OraclePoint {
            eer,
            threshold_left: thresholds[lo - 1].next_up(),
            threshold_right: thresholds[hi],
        }
    } else {
        OraclePoint {
            eer,
            threshold_left: thresholds[lo],
            threshold_right: thresholds[lo],
        }
    }
}

/// Attack acceptance rates at the two operating-point extremes.
pub fn oracle_iapmr(attack: &[f64], point: &OraclePoint) -> (f64, f64) {
    let n = attack.len() as f64;
    (
        count_ge(attack, point.threshold_left) as f64 / n,
        count_ge(attack, point.threshold_right) as f64 / n,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePad {
    pub d_eer: f64,
    pub bpcer20: f64,
    pub bpcer100: f64,
}

/// Exhaustive threshold scan for the PAD metrics.
pub fn oracle_pad(bona_fide: &[f64], attack: &[f64]) -> OraclePad {
    let thresholds = candidates(&[bona_fide, attack]);
    let rates: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            (
                count_ge(attack, t) as f64 / attack.len() as f64,
                count_lt(bona_fide, t) as f64 / bona_fide.len() as f64,
            )
        })
        .collect();
    let mut best = f64::INFINITY;
    for &(apcer, bpcer) in &rates {
        best = best.min((apcer - bpcer).abs());
    }
    let lo = (0..rates.len())
        .find(|&i| (rates[i].0 - rates[i].1).abs() == best)
        .unwrap();
    let d_eer = (rates[lo].0 + rates[lo].1) / 2.0;
    let bpcer_at = |cap: f64| -> f64 {
        rates
            .iter()
            .filter(|(apcer, _)| *apcer <= cap)
            .map(|(_, bpcer)| *bpcer)
            .fold(f64::INFINITY, f64::min)
    };
    OraclePad {
        d_eer,
        bpcer20: bpcer_at(0.05),
        bpcer100: bpcer_at(0.01),
    }
}

/// Seeded random score list on a hundredth grid, 1..=max_len entries.
pub fn random_scores(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| rng.random_range(0..=100) as f64 / 100.0)
        .collect()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
