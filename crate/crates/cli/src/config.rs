//! Run configuration: one TOML document covering paths, preprocessing,
//! architecture, training, and the synthetic generator. Every CLI flag
//! overrides its config counterpart; unset paths resolve inside the
//! output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, HeadKind, MlpConfig};
use ratingnet::optimizer::OptimizerKind;
use ratingnet::preprocess::SplitMode;
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::SynthConfig;
use ratingnet::trainer::TrainConfig;
use ratingnet::{seeds, Error};

use crate::error::{CliError, CliResult, Stage};

/// Where normalization statistics are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Fit on the training split only (default; test set stays untouched).
    TrainOnly,
    /// Fit on the full sample set before splitting.
    FullSet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Feature file; defaults to `<out_dir>/features.csv`.
    pub features: Option<PathBuf>,
    /// Label file; defaults to `<out_dir>/labels.csv`.
    pub labels: Option<PathBuf>,
    /// Manifest file; defaults to the built-in 43-field manifest.
    pub manifest: Option<PathBuf>,
    /// Scale file, one grade per line; defaults to the 21-grade scale.
    pub scale: Option<PathBuf>,
    /// Model file; defaults to `<out_dir>/model.json`.
    pub model: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            features: None,
            labels: None,
            manifest: None,
            scale: None,
            model: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub train_fraction: f64,
    pub smote_k: usize,
    pub normalization: NormalizationMode,
    pub split_mode: SplitMode,
    /// Inclusive [start, end] fiscal-year filter window; inferred from the
    /// data when absent.
    pub period: Option<[i32; 2]>,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            smote_k: 5,
            normalization: NormalizationMode::TrainOnly,
            split_mode: SplitMode::Sample,
            period: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub head: HeadKind,
    pub activation: Activation,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            hidden_width: 50,
            head: HeadKind::Classification,
            activation: Activation::Relu,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    /// "adam" or "gradient-descent".
    pub optimizer: String,
    pub learning_rate: f64,
    pub eval_every: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            epochs: 3000,
            optimizer: "adam".into(),
            learning_rate: 1e-3,
            eval_every: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub companies: usize,
    pub years: usize,
    pub start_year: i32,
    pub transition_prob: f64,
    pub downgrade_bias: f64,
    pub incomplete_companies: usize,
    /// Multiplier on the default per-feature noise std.
    pub noise_scale: f64,
    /// Observed grade symbols; defaults to the built-in six.
    pub classes: Option<Vec<String>>,
    /// First-year class prior; must match `classes` in length.
    pub class_weights: Option<Vec<f64>>,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            companies: 306,
            years: 7,
            start_year: 2010,
            transition_prob: 0.07,
            downgrade_bias: 0.5,
            incomplete_companies: 70,
            noise_scale: 1.0,
            classes: None,
            class_weights: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Inline scale, best grade first; overrides `paths.scale`.
    pub grades: Option<Vec<String>>,
    pub paths: Paths,
    pub preprocess: PreprocessSection,
    pub model: ModelSection,
    pub train: TrainSection,
    pub synth: SynthSection,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// Config with CLI overrides applied and referenced resources loaded.
pub struct Resolved {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub scale: RatingScale,
    pub manifest: FeatureManifest,
}

impl Resolved {
    pub fn new(
        mut config: RunConfig,
        seed: Option<u64>,
        out_dir: Option<PathBuf>,
    ) -> CliResult<Self> {
        if let Some(seed) = seed {
            config.seed = seed;
        }
        if let Some(dir) = out_dir {
            config.out_dir = Some(dir);
        }
        let out_dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out_dir).stage("output directory")?;

        let scale = match (&config.grades, &config.paths.scale) {
            (Some(grades), _) => RatingScale::new(grades.clone()).stage("scale")?,
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).stage("scale")?;
                let grades: Vec<String> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(String::from)
                    .collect();
                RatingScale::new(grades).stage("scale")?
            }
            (None, None) => RatingScale::default_scale(),
        };

        let manifest = match &config.paths.manifest {
            Some(path) => FeatureManifest::from_csv_path(path).stage("manifest")?,
            None => FeatureManifest::default_manifest(),
        };

        Ok(Self {
            config,
            out_dir,
            scale,
            manifest,
        })
    }

    pub fn features_path(&self) -> PathBuf {
        self.config
            .paths
            .features
            .clone()
            .unwrap_or_else(|| self.out_dir.join("features.csv"))
    }

    pub fn labels_path(&self) -> PathBuf {
        self.config
            .paths
            .labels
            .clone()
            .unwrap_or_else(|| self.out_dir.join("labels.csv"))
    }

    pub fn model_path(&self) -> PathBuf {
        self.config
            .paths
            .model
            .clone()
            .unwrap_or_else(|| self.out_dir.join("model.json"))
    }

    /// Architecture from config with flag overrides and the class count
    /// from the data.
    pub fn mlp_config(
        &self,
        head_override: Option<HeadKind>,
        width_override: Option<usize>,
        num_classes: usize,
    ) -> MlpConfig {
        let head_kind = head_override.unwrap_or(self.config.model.head);
        MlpConfig {
            input_dim: self.manifest.len(),
            hidden_layers: self.config.model.hidden_layers,
            hidden_width: width_override.unwrap_or(self.config.model.hidden_width),
            head: match head_kind {
                HeadKind::Classification => Head::Classification {
                    classes: num_classes,
                },
                HeadKind::Regression => Head::Regression,
            },
            activation: self.config.model.activation,
        }
    }

    pub fn train_config(&self, epochs_override: Option<usize>) -> CliResult<TrainConfig> {
        let optimizer = match self.config.train.optimizer.as_str() {
            "adam" => OptimizerKind::adam(self.config.train.learning_rate),
            "gradient-descent" | "sgd" => OptimizerKind::GradientDescent {
                learning_rate: self.config.train.learning_rate,
            },
            other => {
                return Err(CliError::Stage {
                    stage: "train config",
                    source: Error::InvalidConfig(format!(
                        "unknown optimizer '{other}' (expected adam or gradient-descent)"
                    )),
                })
            }
        };
        Ok(TrainConfig {
            epochs: epochs_override.unwrap_or(self.config.train.epochs),
            optimizer,
            seed: seeds::derive(self.config.seed, seeds::stream::INIT),
            eval_every: self.config.train.eval_every,
        })
    }

    /// Generator settings from config and flags.
    pub fn synth_config(&self) -> CliResult<SynthConfig> {
        let section = &self.config.synth;
        let mut synth = SynthConfig::default_config(
            self.manifest.len(),
            seeds::derive(self.config.seed, seeds::stream::SYNTH),
        );
        if let Some(classes) = &section.classes {
            let c = classes.len();
            synth.classes = classes.clone();
            synth.prototypes = ratingnet::synth::default_prototypes(c, self.manifest.len());
            synth.class_weights = match &section.class_weights {
                Some(w) => w.clone(),
                None => vec![1.0 / c as f64; c],
            };
        } else if let Some(weights) = &section.class_weights {
            synth.class_weights = weights.clone();
        }
        synth.companies = section.companies;
        synth.years = section.years;
        synth.start_year = section.start_year;
        synth.transition_prob = section.transition_prob;
        synth.downgrade_bias = section.downgrade_bias;
        synth.incomplete_companies = section.incomplete_companies;
        synth.scale_noise(section.noise_scale);
        synth.validate().stage("synth config")?;
        Ok(synth)
    }
}
