//! Seeded synthetic score-table generator.
//!
//! Stands in for restricted databases: per scheme, genuine and impostor
//! scores follow configurable distributions, and attack scores interpolate
//! between them through an overlap parameter alpha (0 = attacks look like
//! impostors, 1 = attacks look like genuine comparisons). Alphas can vary
//! across attack subpopulations so schemes can be fooled by different
//! subsets of the attacks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score_model::{
    fvc_pairing_plan, ComparisonRecord, Label, PairKind, SampleRef, SchemeId, ScoreTable,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistFamily {
    /// Uniform over [location, location + scale).
    Uniform,
    /// Normal with mean `location` and standard deviation `scale`.
    Gaussian,
    /// Normal clamped to [0, 1].
    ClampedGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub family: DistFamily,
    pub location: f64,
    pub scale: f64,
}

impl DistSpec {
    pub fn uniform(location: f64, scale: f64) -> Self {
        DistSpec {
            family: DistFamily::Uniform,
            location,
            scale,
        }
    }

    pub fn gaussian(location: f64, scale: f64) -> Self {
        DistSpec {
            family: DistFamily::Gaussian,
            location,
            scale,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.family {
            DistFamily::Uniform => self.location + self.scale * rng.random::<f64>(),
            DistFamily::Gaussian => {
                if self.scale == 0.0 {
                    self.location
                } else {
                    Normal::new(self.location, self.scale).unwrap().sample(rng)
                }
            }
            DistFamily::ClampedGaussian => {
                let value = if self.scale == 0.0 {
                    self.location
                } else {
                    Normal::new(self.location, self.scale).unwrap().sample(rng)
                };
                value.clamp(0.0, 1.0)
            }
        }
    }
}

/// Score behaviour of one synthetic recognition scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeProfile {
    pub name: String,
    pub genuine: DistSpec,
    pub impostor: DistSpec,
    /// Attack-overlap per attack subpopulation: an attack score is
    /// `(1 - alpha) * impostor draw + alpha * genuine draw`. Subpopulation
    /// `p` uses `attack_alpha[p % len]`.
    pub attack_alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub subjects: usize,
    pub samples_per_subject: usize,
    pub schemes: Vec<SchemeProfile>,
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        if self.subjects < 2 {
            return Err(SynthError::InvalidConfig(
                "at least 2 subjects required".into(),
            ));
        }
        if self.samples_per_subject < 1 {
            return Err(SynthError::InvalidConfig(
                "at least 1 sample per subject required".into(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(SynthError::InvalidConfig(
                "at least one scheme required".into(),
            ));
        }
        let mut names = std::collections::BTreeSet::new();
        for profile in &self.schemes {
            if profile.name.is_empty() || !names.insert(&profile.name) {
                return Err(SynthError::InvalidConfig(format!(
                    "scheme name `{}` empty or duplicated",
                    profile.name
                )));
            }
            if profile.attack_alpha.is_empty() {
                return Err(SynthError::InvalidConfig(format!(
                    "scheme `{}` needs at least one attack alpha",
                    profile.name
                )));
            }
            for alpha in &profile.attack_alpha {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(SynthError::InvalidConfig(format!(
                        "scheme `{}`: alpha {alpha} outside [0, 1]",
                        profile.name
                    )));
                }
            }
            for spec in [&profile.genuine, &profile.impostor] {
                if !spec.location.is_finite() || !spec.scale.is_finite() || spec.scale < 0.0 {
                    return Err(SynthError::InvalidConfig(format!(
                        "scheme `{}`: invalid distribution parameters",
                        profile.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of attack subpopulations implied by the profiles.
    pub fn attack_subpopulations(&self) -> usize {
        self.schemes
            .iter()
            .map(|p| p.attack_alpha.len())
            .max()
            .unwrap_or(1)
    }
}

/// Generates a score table from a config. The pairing follows the FVC
/// protocol; each genuine pair additionally spawns one attack record that
/// carries the same subject/sample identities as its bona fide counterpart.
/// Generation is fully determined by the config seed.
pub fn generate(config: &SynthConfig) -> Result<ScoreTable, SynthError> {
    config.validate()?;
    let width = config.subjects.to_string().len();
    let mut samples = Vec::new();
    for subject in 0..config.subjects {
        for sample in 0..config.samples_per_subject {
            samples.push(SampleRef::new(
                format!("s{:0width$}", subject + 1),
                format!("{}", sample + 1),
            ));
        }
    }
    let plan = fvc_pairing_plan(&samples).expect("non-empty sample list");

    let mut records: Vec<ComparisonRecord> = Vec::new();
    let mut next_id = 0u64;
    let mut push = |label: Label, probe: &SampleRef, reference: &SampleRef| {
        next_id += 1;
        records.push(ComparisonRecord {
            comparison_id: next_id,
            label,
            probe_subject: probe.subject.clone(),
            probe_sample: probe.sample.clone(),
            ref_subject: reference.subject.clone(),
            ref_sample: reference.sample.clone(),
            scores: Vec::new(),
        });
    };
    for pair in &plan {
        let label = match pair.kind {
            PairKind::Genuine => Label::Genuine,
            PairKind::Impostor => Label::Impostor,
        };
        push(label, &pair.probe, &pair.reference);
    }
    for pair in plan.iter().filter(|p| p.kind == PairKind::Genuine) {
        push(Label::Attack, &pair.probe, &pair.reference);
    }

    let subpopulations = config.attack_subpopulations();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut attack_counter = 0usize;
    for record in &mut records {
        let subpopulation = if record.label == Label::Attack {
            let p = attack_counter % subpopulations;
            attack_counter += 1;
            p
        } else {
            0
        };
        record.scores = config
            .schemes
            .iter()
            .map(|profile| match record.label {
                Label::Genuine => profile.genuine.sample(&mut rng),
                Label::Impostor => profile.impostor.sample(&mut rng),
                Label::Attack => {
                    let alpha =
                        profile.attack_alpha[subpopulation % profile.attack_alpha.len()];
                    let impostor_draw = profile.impostor.sample(&mut rng);
                    let genuine_draw = profile.genuine.sample(&mut rng);
                    (1.0 - alpha) * impostor_draw + alpha * genuine_draw
                }
            })
            .collect();
    }

    let table = ScoreTable {
        schemes: config
            .schemes
            .iter()
            .map(|p| SchemeId::similarity(&p.name))
            .collect(),
        records,
    };
    table
        .validate()
        .expect("generated table satisfies the data-model invariants");
    Ok(table)
}

/// Bundled configurations used by the examples, the CLI and the test suite.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 4] = ["fig1", "complementary", "separable", "fourteen"];

    pub fn by_name(name: &str) -> Option<SynthConfig> {
        match name {
            "fig1" => Some(threshold_gap()),
            "complementary" => Some(complementary_pair()),
            "separable" => Some(separable()),
            "fourteen" => Some(fourteen_schemes()),
            _ => None,
        }
    }

    /// Zero-EER licit scores with every attack score inside the eligible
    /// threshold interval: IAPMR-L is 1 while IAPMR-R is 0.
    pub fn threshold_gap() -> SynthConfig {
        SynthConfig {
            seed: 101,
            subjects: 25,
            samples_per_subject: 2,
            schemes: vec![SchemeProfile {
                name: "MC".into(),
                genuine: DistSpec::uniform(0.7, 0.3),
                impostor: DistSpec::uniform(0.0, 0.25),
                attack_alpha: vec![0.5],
            }],
        }
    }

    /// Two schemes fooled by complementary halves of the attacks. Either
    /// scheme alone leaves a third of the comparisons inseparable; their
    /// fusion separates perfectly.
    pub fn complementary_pair() -> SynthConfig {
        let genuine = DistSpec::uniform(0.7, 0.3);
        let impostor = DistSpec::uniform(0.0, 0.3);
        SynthConfig {
            seed: 202,
            subjects: 30,
            samples_per_subject: 2,
            schemes: vec![
                SchemeProfile {
                    name: "VN".into(),
                    genuine,
                    impostor,
                    attack_alpha: vec![1.0, 0.0],
                },
                SchemeProfile {
                    name: "KP".into(),
                    genuine,
                    impostor,
                    attack_alpha: vec![0.0, 1.0],
                },
            ],
        }
    }

    /// Attacks indistinguishable from impostors with disjoint supports:
    /// every scheme separates bona fide from attack perfectly.
    pub fn separable() -> SynthConfig {
        let genuine = DistSpec::uniform(0.7, 0.3);
        let impostor = DistSpec::uniform(0.0, 0.3);
        SynthConfig {
            seed: 303,
            subjects: 20,
            samples_per_subject: 2,
            schemes: vec![
                SchemeProfile {
                    name: "MC".into(),
                    genuine,
                    impostor,
                    attack_alpha: vec![0.0],
                },
                SchemeProfile {
                    name: "SIFT".into(),
                    genuine,
                    impostor,
                    attack_alpha: vec![0.0],
                },
            ],
        }
    }

    /// Fourteen schemes with mixed attack behaviour, sized for smoke runs
    /// of the full exhaustive sweep.
    pub fn fourteen_schemes() -> SynthConfig {
        let names = [
            "MC", "PC", "GF", "IUWT", "RLT", "WLD", "ASAVE", "DTFPM", "SIFT", "SURF", "LBP",
            "CNN", "SML", "VF",
        ];
        let alphas: [&[f64]; 14] = [
            &[1.0, 0.8],
            &[0.9, 0.7],
            &[0.5, 0.6],
            &[0.8, 0.9],
            &[0.4, 0.3],
            &[0.7, 0.7],
            &[0.3, 0.2],
            &[0.2, 0.9],
            &[0.0, 0.1],
            &[0.0, 0.0],
            &[0.1, 0.0],
            &[0.05, 0.3],
            &[0.1, 0.2],
            &[0.05, 0.1],
        ];
        SynthConfig {
            seed: 1414,
            subjects: 10,
            samples_per_subject: 2,
            schemes: names
                .iter()
                .zip(alphas)
                .map(|(name, alpha)| SchemeProfile {
                    name: (*name).into(),
                    genuine: DistSpec::gaussian(0.8, 0.08),
                    impostor: DistSpec::gaussian(0.2, 0.08),
                    attack_alpha: alpha.to_vec(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threat::run_two_scenario;

    #[test]
    fn generation_is_deterministic() {
        let config = presets::complementary_pair();
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let mut config = presets::separable();
        let a = generate(&config).unwrap();
        config.seed += 1;
        let b = generate(&config).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn attacks_mirror_their_genuine_counterparts() {
        let config = presets::separable();
        let table = generate(&config).unwrap();
        let genuine: Vec<_> = table
            .records
            .iter()
            .filter(|r| r.label == Label::Genuine)
            .collect();
        let attacks: Vec<_> = table
            .records
            .iter()
            .filter(|r| r.label == Label::Attack)
            .collect();
        assert_eq!(genuine.len(), attacks.len());
        for (g, a) in genuine.iter().zip(&attacks) {
            assert_eq!(g.probe_subject, a.probe_subject);
            assert_eq!(g.probe_sample, a.probe_sample);
            assert_eq!(g.ref_subject, a.ref_subject);
            assert_eq!(g.ref_sample, a.ref_sample);
        }
    }

    #[test]
    fn full_overlap_yields_high_iapmr() {
        let config = SynthConfig {
            seed: 9,
            subjects: 30,
            samples_per_subject: 2,
            schemes: vec![SchemeProfile {
                name: "MC".into(),
                genuine: DistSpec::uniform(0.6, 0.4),
                impostor: DistSpec::uniform(0.0, 0.4),
                attack_alpha: vec![1.0],
            }],
        };
        let table = generate(&config).unwrap();
        let report = run_two_scenario(&table, "MC").unwrap();
        assert!(report.iapmr_left >= 0.9, "IAPMR-L {}", report.iapmr_left);
    }

    #[test]
    fn zero_overlap_with_disjoint_supports_is_immune() {
        // attacks sit at the impostor maximum exactly, so even the
        // left-most zero-EER threshold rejects all of them
        let config = SynthConfig {
            seed: 5,
            subjects: 20,
            samples_per_subject: 2,
            schemes: vec![SchemeProfile {
                name: "MC".into(),
                genuine: DistSpec::uniform(0.7, 0.3),
                impostor: DistSpec::uniform(0.25, 0.0),
                attack_alpha: vec![0.0],
            }],
        };
        let table = generate(&config).unwrap();
        let report = run_two_scenario(&table, "MC").unwrap();
        assert_eq!(report.eer, 0.0);
        assert_eq!(report.iapmr_left, 0.0);
        assert_eq!(report.iapmr_right, 0.0);

        // sampled variant: attacks share the impostor distribution, so only
        // draws beyond the largest observed impostor can slip through at
        // the left extreme
        let report = run_two_scenario(&generate(&presets::separable()).unwrap(), "MC").unwrap();
        assert_eq!(report.eer, 0.0);
        assert_eq!(report.iapmr_right, 0.0);
        assert!(report.iapmr_left <= 0.05, "IAPMR-L {}", report.iapmr_left);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = presets::separable();
        config.subjects = 1;
        assert!(matches!(
            generate(&config),
            Err(SynthError::InvalidConfig(_))
        ));

        let mut config = presets::separable();
        config.schemes[0].attack_alpha = vec![1.5];
        assert!(matches!(
            generate(&config),
            Err(SynthError::InvalidConfig(_))
        ));
    }

    #[test]
    fn empirical_means_converge_to_configured_locations() {
        // gaussian location is the distribution mean; check 3 sigma / sqrt(N)
        let config = SynthConfig {
            seed: 7,
            subjects: 1100,
            samples_per_subject: 2,
            schemes: vec![SchemeProfile {
                name: "G".into(),
                genuine: DistSpec::gaussian(0.8, 0.1),
                impostor: DistSpec::gaussian(0.2, 0.1),
                attack_alpha: vec![0.0],
            }],
        };
        let table = generate(&config).unwrap();
        for (label, location) in [(Label::Genuine, 0.8), (Label::Impostor, 0.2)] {
            let scores = table.scores_for(0, label);
            assert!(scores.len() >= 1000);
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let bound = 3.0 * 0.1 / (scores.len() as f64).sqrt();
            assert!(
                (mean - location).abs() <= bound,
                "{label}: mean {mean} vs {location} (bound {bound})"
            );
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = presets::fourteen_schemes();
        let json = serde_json::to_string(&config).unwrap();
        let back: SynthConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }
}
