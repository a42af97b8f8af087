//! Versioned model persistence: architecture, weights, normalization
//! statistics, and the class map in one file, guarded by a checksum.
//!
//! The file is JSON with a fixed envelope: format tag, version, sha-256 of
//! the canonicalized payload, then the payload itself. Serialization is
//! deterministic, so identical models produce byte-identical files.

use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evaluate::{self, ModelPredictions};
use crate::mlp::{Head, Mlp, MlpConfig, MlpParams};
use crate::preprocess::NormalizationStats;
use crate::rating_scale::ClassIndexMap;

pub const MODEL_FORMAT: &str = "ratingnet-model";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to score raw feature rows: the trained network plus
/// the training-time normalization statistics and class map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: MlpConfig,
    pub params: MlpParams,
    pub stats: NormalizationStats,
    pub class_map: ClassIndexMap,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    checksum: String,
    payload: serde_json::Value,
}

impl TrainedModel {
    pub fn new(
        config: MlpConfig,
        params: MlpParams,
        stats: NormalizationStats,
        class_map: ClassIndexMap,
    ) -> Result<Self> {
        let model = Self {
            config,
            params,
            stats,
            class_map,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        // Shape and finiteness checks ride on the network constructor.
        Mlp::with_params(self.config.clone(), self.params.clone())?;
        if self.stats.dim() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                actual: self.stats.dim(),
            });
        }
        match self.config.head {
            Head::Classification { classes } => {
                if classes != self.class_map.num_classes() {
                    return Err(Error::DimensionMismatch {
                        expected: classes,
                        actual: self.class_map.num_classes(),
                    });
                }
            }
            Head::Regression => {
                if self.class_map.is_empty() {
                    return Err(Error::InvalidConfig(
                        "regression model needs a non-empty class map".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        self.class_map.num_classes()
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    /// The network view of this model.
    pub fn mlp(&self) -> Mlp {
        Mlp {
            config: self.config.clone(),
            params: self.params.clone(),
        }
    }

    /// Score raw (unnormalized) feature rows: applies the stored
    /// normalization statistics, then the network.
    pub fn score_rows(&self, raw: ArrayView2<f64>) -> Result<ModelPredictions> {
        let normalized = self.stats.apply(&raw)?;
        evaluate::predictions(&self.mlp(), normalized.view(), self.num_classes())
    }

    /// Grade symbol for a predicted class.
    pub fn grade_of(&self, class: usize) -> Option<&str> {
        self.class_map.grade_of(class)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let payload = serde_json::to_value(self)?;
        let canonical = serde_json::to_vec(&payload)?;
        let envelope = Envelope {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            checksum: hex::encode(Sha256::digest(&canonical)),
            payload,
        };
        let mut bytes = serde_json::to_vec_pretty(&envelope)?;
        bytes.push(b'\n');
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let bytes = std::fs::read(path)?;
        let envelope: Envelope =
            serde_json::from_slice(&bytes).map_err(|e| Error::ModelFile {
                path: display.clone(),
                message: format!("not a model file: {e}"),
            })?;
        if envelope.format != MODEL_FORMAT {
            return Err(Error::ModelFile {
                path: display,
                message: format!("unexpected format tag '{}'", envelope.format),
            });
        }
        if envelope.version != MODEL_VERSION {
            return Err(Error::ModelFile {
                path: display,
                message: format!(
                    "unsupported version {} (supported: {MODEL_VERSION})",
                    envelope.version
                ),
            });
        }
        let canonical = serde_json::to_vec(&envelope.payload)?;
        if hex::encode(Sha256::digest(&canonical)) != envelope.checksum {
            return Err(Error::ChecksumMismatch { path: display });
        }
        let model: TrainedModel =
            serde_json::from_value(envelope.payload).map_err(|e| Error::ModelFile {
                path: display,
                message: format!("payload does not deserialize: {e}"),
            })?;
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{Activation, HeadOutput};
    use crate::rating_scale::RatingScale;
    use ndarray::array;

    fn sample_model() -> TrainedModel {
        let config = MlpConfig {
            input_dim: 2,
            hidden_layers: 2,
            hidden_width: 4,
            head: Head::Classification { classes: 3 },
            activation: Activation::Relu,
        };
        let params = MlpParams::init(&config, 7).unwrap();
        let stats = NormalizationStats::fit(
            &array![[1.0, 10.0], [2.0, 20.0], [3.0, 35.0]].view(),
        )
        .unwrap();
        let scale = RatingScale::default_scale();
        let class_map = ClassIndexMap::build(["A+", "BB+", "D"], &scale).unwrap();
        TrainedModel::new(config, params, stats, class_map).unwrap()
    }

    #[test]
    fn save_load_roundtrip_preserves_model() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = sample_model();
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn save_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        let model = sample_model();
        model.save(&a).unwrap();
        model.save(&b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn tampering_trips_the_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        sample_model().save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        // Flip one digit inside the payload without breaking JSON.
        let tampered = text.replacen("\"input_dim\": 2", "\"input_dim\": 3", 1);
        assert_ne!(text, tampered);
        std::fs::write(&path, tampered).unwrap();
        assert!(matches!(
            TrainedModel::load(&path),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(
            &path,
            r#"{"format":"other","version":1,"checksum":"","payload":{}}"#,
        )
        .unwrap();
        assert!(matches!(
            TrainedModel::load(&path),
            Err(Error::ModelFile { .. })
        ));
    }

    #[test]
    fn scoring_matches_manual_normalize_then_forward() {
        let model = sample_model();
        let raw = array![[1.5, 12.0], [2.5, 30.0]];
        let preds = model.score_rows(raw.view()).unwrap();

        let normalized = model.stats.apply(&raw.view()).unwrap();
        let mlp = model.mlp();
        for (i, &class) in preds.classes.iter().enumerate() {
            match mlp.forward(normalized.row(i)).unwrap() {
                HeadOutput::Probabilities(p) => {
                    let argmax = (0..p.len()).max_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap());
                    assert_eq!(class, argmax.unwrap());
                }
                _ => panic!("classification head"),
            }
        }
    }

    #[test]
    fn mismatched_class_map_is_rejected() {
        let config = MlpConfig {
            input_dim: 2,
            hidden_layers: 1,
            hidden_width: 2,
            head: Head::Classification { classes: 4 },
            activation: Activation::Relu,
        };
        let params = MlpParams::init(&config, 0).unwrap();
        let stats = NormalizationStats::fit(&array![[1.0, 2.0], [3.0, 4.0]].view()).unwrap();
        let scale = RatingScale::default_scale();
        let class_map = ClassIndexMap::build(["A+", "D"], &scale).unwrap();
        assert!(TrainedModel::new(config, params, stats, class_map).is_err());
    }
}
