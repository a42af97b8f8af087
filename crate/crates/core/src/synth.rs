//! Synthetic company-year panel generator.
//!
//! Stands in for proprietary source data: each company gets a first-year
//! rating drawn from a (by default bi-modal, imbalanced) class prior, and
//! in each later year its rating moves one notch with a configurable
//! probability, reflecting at the boundaries so a "change" year always
//! changes the class. Features are class prototypes plus Gaussian noise,
//! with per-feature magnitude scales spanning several orders so the
//! normalization stage has real work to do. A configurable share of
//! companies gets missing cells punched in, which the completeness filter
//! downstream removes company-wide.
//!
//! Companies are generated from per-company derived seeds, so output is
//! deterministic per master seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{filter_complete, CompanyYearRecord, Dataset, FeatureManifest, YearRange};
use crate::rating_scale::RatingScale;
use crate::seeds;

/// Default observed grade set.
pub const DEFAULT_CLASSES: [&str; 6] = ["A+", "A-", "BB+", "B-", "CCC+", "D"];

/// Generator settings. `prototypes[c][j]` is the raw-space mean of feature
/// `j` for class `c`; `noise_std[j]` the per-feature noise std.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub companies: usize,
    pub years: usize,
    pub start_year: i32,
    /// Observed grade symbols, best first.
    pub classes: Vec<String>,
    pub prototypes: Vec<Vec<f64>>,
    pub noise_std: Vec<f64>,
    /// Prior over classes for a company's first year; sums to 1.
    pub class_weights: Vec<f64>,
    /// Per-year probability that a company's rating changes.
    pub transition_prob: f64,
    /// Probability that a change moves toward worse credit (0.5 =
    /// symmetric). Boundary moves reflect.
    pub downgrade_bias: f64,
    /// Number of companies that get at least one missing cell.
    pub incomplete_companies: usize,
    pub seed: u64,
}

impl SynthConfig {
    /// Default panel shaped like the modeled population: 306 companies
    /// over 7 years, 70 of them with holes, 6 observed classes with a
    /// bi-modal imbalanced prior, 7% annual transition rate.
    pub fn default_config(feature_dim: usize, seed: u64) -> Self {
        let classes: Vec<String> = DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect();
        let prototypes = default_prototypes(classes.len(), feature_dim);
        let noise_std = (0..feature_dim).map(magnitude_scale).collect();
        Self {
            companies: 306,
            years: 7,
            start_year: 2010,
            classes,
            prototypes,
            noise_std,
            class_weights: vec![0.32, 0.05, 0.38, 0.17, 0.05, 0.03],
            transition_prob: 0.07,
            downgrade_bias: 0.5,
            incomplete_companies: 70,
            seed,
        }
    }

    /// Scale all noise stds by a factor; a small factor makes classes
    /// prototype-separable.
    pub fn scale_noise(&mut self, factor: f64) {
        for s in &mut self.noise_std {
            *s *= factor;
        }
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.noise_std.len()
    }

    pub fn period(&self) -> YearRange {
        YearRange {
            start: self.start_year,
            end: self.start_year + self.years as i32 - 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.num_classes();
        let f = self.feature_dim();
        if c == 0 {
            return Err(Error::InvalidConfig("synth needs at least one class".into()));
        }
        if f == 0 {
            return Err(Error::InvalidConfig("synth needs at least one feature".into()));
        }
        if self.years == 0 {
            return Err(Error::InvalidConfig("synth needs at least one year".into()));
        }
        if self.prototypes.len() != c {
            return Err(Error::InvalidConfig(format!(
                "{} prototypes for {c} classes",
                self.prototypes.len()
            )));
        }
        if self.prototypes.iter().any(|p| p.len() != f) {
            return Err(Error::InvalidConfig(
                "prototype length does not match feature dimension".into(),
            ));
        }
        if self.class_weights.len() != c {
            return Err(Error::InvalidConfig(format!(
                "{} class weights for {c} classes",
                self.class_weights.len()
            )));
        }
        if self.class_weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidConfig("class weights must be non-negative".into()));
        }
        let total: f64 = self.class_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "class weights sum to {total}, expected 1"
            )));
        }
        if !(0.0..=1.0).contains(&self.transition_prob) {
            return Err(Error::InvalidConfig(
                "transition probability must be in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.downgrade_bias) {
            return Err(Error::InvalidConfig("downgrade bias must be in [0, 1]".into()));
        }
        if self.noise_std.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidConfig("noise std must be non-negative".into()));
        }
        if self.incomplete_companies > self.companies {
            return Err(Error::InvalidConfig(
                "incomplete company count exceeds company count".into(),
            ));
        }
        Ok(())
    }
}

/// Raw feature magnitudes span 1e2..1e8 across the manifest, mimicking
/// statements that mix per-share figures with balance-sheet totals.
fn magnitude_scale(j: usize) -> f64 {
    10f64.powi(2 + ((j * 5) % 7) as i32)
}

/// Class means: a quarter of the features carry the class signal with
/// alternating sign; the rest are class-independent. Adjacent classes sit
/// 0.8 noise-units apart per informative feature at the default noise.
pub fn default_prototypes(num_classes: usize, feature_dim: usize) -> Vec<Vec<f64>> {
    const GAP: f64 = 0.8;
    (0..num_classes)
        .map(|c| {
            (0..feature_dim)
                .map(|j| {
                    let offset = 1.5 + 0.35 * (j % 5) as f64;
                    let core = if j % 4 == 0 {
                        let direction = if (j / 4) % 2 == 0 { 1.0 } else { -1.0 };
                        offset + GAP * c as f64 * direction
                    } else {
                        offset
                    };
                    magnitude_scale(j) * core
                })
                .collect()
        })
        .collect()
}

/// Per-company class sequences actually generated.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub class_paths: Vec<Vec<usize>>,
}

impl GroundTruth {
    /// Fraction of company-year transitions where the class changed.
    pub fn transition_change_fraction(&self) -> f64 {
        let mut changes = 0usize;
        let mut total = 0usize;
        for path in &self.class_paths {
            for pair in path.windows(2) {
                total += 1;
                if pair[0] != pair[1] {
                    changes += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            changes as f64 / total as f64
        }
    }
}

/// Generated panel plus ground-truth metadata.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    /// One record per company-year, company then year order. Companies
    /// selected as incomplete carry missing cells.
    pub records: Vec<CompanyYearRecord>,
    pub truth: GroundTruth,
}

impl SynthOutput {
    /// The complete, labeled dataset this panel yields after the
    /// completeness filter.
    pub fn complete_dataset(
        &self,
        config: &SynthConfig,
        manifest: &FeatureManifest,
        scale: &RatingScale,
    ) -> Result<Dataset> {
        filter_complete(&self.records, manifest, scale, config.period())
    }
}

/// Generate a labeled panel per the config.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let c = config.num_classes();
    let f = config.feature_dim();
    let standard = Normal::new(0.0, 1.0).expect("unit normal");

    let mut master = ChaCha8Rng::seed_from_u64(seeds::derive(config.seed, seeds::stream::SYNTH));
    let mut company_order: Vec<usize> = (0..config.companies).collect();
    company_order.shuffle(&mut master);
    let incomplete: Vec<bool> = {
        let mut flags = vec![false; config.companies];
        for &i in company_order.iter().take(config.incomplete_companies) {
            flags[i] = true;
        }
        flags
    };

    let id_width = config.companies.max(1).to_string().len();
    let mut records = Vec::with_capacity(config.companies * config.years);
    let mut class_paths = Vec::with_capacity(config.companies);

    for company in 0..config.companies {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::derive(config.seed, 1000 + company as u64));
        let company_id = format!("C{company:0id_width$}", company = company + 1);

        let mut path = Vec::with_capacity(config.years);
        let mut class = sample_categorical(&mut rng, &config.class_weights);
        path.push(class);
        for _ in 1..config.years {
            if c > 1 && rng.random::<f64>() < config.transition_prob {
                let toward_worse = rng.random::<f64>() < config.downgrade_bias;
                class = step_notch(class, c, toward_worse);
            }
            path.push(class);
        }

        let mut company_records = Vec::with_capacity(config.years);
        for (y, &cls) in path.iter().enumerate() {
            let values: Vec<Option<f64>> = (0..f)
                .map(|j| {
                    Some(
                        config.prototypes[cls][j]
                            + config.noise_std[j] * standard.sample(&mut rng),
                    )
                })
                .collect();
            company_records.push(CompanyYearRecord {
                company_id: company_id.clone(),
                fiscal_year: config.start_year + y as i32,
                values,
                label: Some(config.classes[cls].clone()),
            });
        }

        if incomplete[company] {
            let holes = 1 + rng.random_range(0..3);
            for _ in 0..holes {
                let year = rng.random_range(0..config.years);
                let field = rng.random_range(0..f);
                company_records[year].values[field] = None;
            }
        }

        records.extend(company_records);
        class_paths.push(path);
    }

    Ok(SynthOutput {
        records,
        truth: GroundTruth { class_paths },
    })
}

fn sample_categorical(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return i;
        }
    }
    weights.len() - 1
}

/// Move one notch, reflecting at the boundaries so the class always
/// actually changes (for C > 1).
fn step_notch(class: usize, num_classes: usize, toward_worse: bool) -> usize {
    if toward_worse {
        if class + 1 < num_classes {
            class + 1
        } else {
            class - 1
        }
    } else if class > 0 {
        class - 1
    } else {
        class + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ManifestEntry, StatementGroup};

    fn small_config(companies: usize, seed: u64) -> SynthConfig {
        let mut config = SynthConfig::default_config(5, seed);
        config.companies = companies;
        config.incomplete_companies = 0;
        config
    }

    fn manifest(f: usize) -> FeatureManifest {
        FeatureManifest::new(
            (0..f)
                .map(|j| ManifestEntry {
                    name: format!("F{j}"),
                    group: StatementGroup::Income,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn default_panel_yields_236_companies_and_1652_samples() {
        let config = SynthConfig::default_config(43, 7);
        let output = generate(&config).unwrap();
        assert_eq!(output.records.len(), 306 * 7);
        let dataset = output
            .complete_dataset(&config, &manifest(43), &RatingScale::default_scale())
            .unwrap();
        assert_eq!(dataset.num_companies(), 236);
        assert_eq!(dataset.len(), 1652);
    }

    #[test]
    fn zero_transition_prob_freezes_classes() {
        let mut config = small_config(50, 3);
        config.transition_prob = 0.0;
        let output = generate(&config).unwrap();
        for path in &output.truth.class_paths {
            assert!(path.windows(2).all(|p| p[0] == p[1]));
        }
    }

    #[test]
    fn observed_change_rate_tracks_transition_prob() {
        let config = small_config(2000, 5);
        let output = generate(&config).unwrap();
        let transitions = 2000 * 6;
        assert!(transitions >= 10_000);
        let fraction = output.truth.transition_change_fraction();
        assert!(
            (fraction - 0.07).abs() <= 0.01,
            "observed change fraction {fraction}"
        );
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let config = small_config(20, 11);
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert_eq!(a.records, b.records);
        let mut other = config.clone();
        other.seed = 12;
        let c = generate(&other).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn tiny_noise_is_prototype_separable() {
        let mut config = small_config(80, 17);
        config.scale_noise(1e-6);
        let output = generate(&config).unwrap();
        for (company, path) in output.truth.class_paths.iter().enumerate() {
            for (y, &true_class) in path.iter().enumerate() {
                let record = &output.records[company * config.years + y];
                let nearest = (0..config.num_classes())
                    .min_by(|&a, &b| {
                        let da = prototype_distance(&config, record, a);
                        let db = prototype_distance(&config, record, b);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                assert_eq!(nearest, true_class);
            }
        }
    }

    fn prototype_distance(config: &SynthConfig, record: &CompanyYearRecord, class: usize) -> f64 {
        record
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let d = (v.unwrap() - config.prototypes[class][j]) / config.noise_std[j].max(1e-300);
                d * d
            })
            .sum()
    }

    #[test]
    fn first_year_distribution_matches_weights_loosely() {
        let config = small_config(4000, 23);
        let output = generate(&config).unwrap();
        let mut counts = vec![0usize; config.num_classes()];
        for path in &output.truth.class_paths {
            counts[path[0]] += 1;
        }
        // Chi-square against the prior, df = 5; 25 is far beyond the 0.999
        // quantile (~20.5), a deliberately loose sanity threshold.
        let n = 4000.0;
        let chi2: f64 = counts
            .iter()
            .zip(&config.class_weights)
            .map(|(&obs, &w)| {
                let expected = n * w;
                (obs as f64 - expected).powi(2) / expected
            })
            .sum();
        assert!(chi2 < 25.0, "chi-square statistic {chi2}, counts {counts:?}");
    }

    #[test]
    fn incomplete_companies_have_holes_and_survivors_match() {
        let mut config = small_config(40, 31);
        config.incomplete_companies = 15;
        let output = generate(&config).unwrap();
        let dataset = output
            .complete_dataset(&config, &manifest(5), &RatingScale::default_scale())
            .unwrap();
        assert_eq!(dataset.num_companies(), 25);
        assert_eq!(dataset.len(), 25 * config.years);
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let mut config = small_config(10, 0);
        config.class_weights = vec![0.5; 6];
        assert!(generate(&config).is_err());
        config.class_weights = vec![0.2, 0.2, 0.2, 0.2, 0.1, 0.1];
        config.transition_prob = 1.5;
        assert!(generate(&config).is_err());
    }

    #[test]
    fn downgrade_bias_one_ratchets_toward_worst() {
        let mut config = small_config(300, 41);
        config.transition_prob = 0.5;
        config.downgrade_bias = 1.0;
        config.years = 6;
        config.class_weights = vec![0.6, 0.4, 0.0, 0.0, 0.0, 0.0];
        let output = generate(&config).unwrap();
        let mean_first: f64 = output
            .truth
            .class_paths
            .iter()
            .map(|p| p[0] as f64)
            .sum::<f64>()
            / 300.0;
        let mean_last: f64 = output
            .truth
            .class_paths
            .iter()
            .map(|p| *p.last().unwrap() as f64)
            .sum::<f64>()
            / 300.0;
        assert!(
            mean_last > mean_first + 1.0,
            "classes should drift worse: {mean_first} -> {mean_last}"
        );
    }
}
