//! Full-batch training loop, epoch accounting, metric history, and the
//! node-count sweep.
//!
//! "No batching" means one gradient step per epoch over the entire
//! training set. Runs are deterministic given (data, config, seeds);
//! sweep cells are independent and may run concurrently, with results
//! ordered by width.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate;
use crate::mlp::{Head, HeadKind, Mlp, MlpConfig, Targets};
use crate::optimizer::{Optimizer, OptimizerKind};
use crate::preprocess::LabeledMatrix;
use crate::seeds;

/// Training-loop settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Full-batch gradient steps to run.
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    /// Seeds parameter initialization.
    pub seed: u64,
    /// History snapshot interval in epochs.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 3000,
            optimizer: OptimizerKind::default(),
            seed: 0,
            eval_every: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::InvalidConfig("eval_every must be >= 1".into()));
        }
        self.optimizer.validate()
    }
}

/// One history row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub epoch: usize,
    pub train_loss: f64,
    /// Accuracy for the classification head, RMS for the regression head.
    pub train_metric: f64,
    pub test_metric: Option<f64>,
}

/// Snapshot series for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// "accuracy" or "rms", matching the head.
    pub metric_name: String,
    pub snapshots: Vec<Snapshot>,
}

fn head_metric(
    mlp: &Mlp,
    data: &LabeledMatrix,
    num_classes: usize,
) -> Result<f64> {
    let preds = evaluate::predictions(mlp, data.features.view(), num_classes)?;
    Ok(match mlp.config.head.kind() {
        HeadKind::Classification => evaluate::accuracy(&preds.classes, &data.targets),
        HeadKind::Regression => evaluate::rms(&preds.raw_scores, &data.targets),
    })
}

/// Train a network on a balanced, normalized training set. Runs exactly
/// `config.epochs` full-batch steps; on a non-finite loss or gradient the
/// run aborts with the last finite snapshot recorded in the error.
pub fn train(
    mlp_config: &MlpConfig,
    config: &TrainConfig,
    train_set: &LabeledMatrix,
    test_set: Option<&LabeledMatrix>,
) -> Result<(Mlp, TrainHistory)> {
    mlp_config.validate()?;
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train_set.features.ncols() != mlp_config.input_dim {
        return Err(Error::DimensionMismatch {
            expected: mlp_config.input_dim,
            actual: train_set.features.ncols(),
        });
    }

    let num_classes = match mlp_config.head {
        Head::Classification { classes } => classes,
        // Regression targets are class indices; the class count bounds the
        // rounding clamp used for metrics.
        Head::Regression => train_set.targets.iter().max().map_or(1, |&t| t + 1),
    };
    let value_targets: Vec<f64> = train_set.targets.iter().map(|&t| t as f64).collect();
    let targets = match mlp_config.head {
        Head::Classification { .. } => Targets::Classes(&train_set.targets),
        Head::Regression => Targets::Values(&value_targets),
    };

    let metric_name = match mlp_config.head.kind() {
        HeadKind::Classification => "accuracy",
        HeadKind::Regression => "rms",
    };

    let mut mlp = Mlp::new(mlp_config.clone(), config.seed)?;
    let mut optimizer = Optimizer::new(config.optimizer.clone())?;
    let mut history = TrainHistory {
        metric_name: metric_name.to_string(),
        snapshots: Vec::new(),
    };
    let mut last_finite = (0usize, f64::INFINITY);

    for epoch in 1..=config.epochs {
        let step = mlp
            .backward(train_set.features.view(), &targets)
            .and_then(|(grads, loss)| {
                if !loss.is_finite() {
                    return Err(Error::NonFinite("loss".into()));
                }
                optimizer.step(&mut mlp.params, &grads)?;
                Ok(loss)
            });
        let loss = match step {
            Ok(loss) => loss,
            Err(Error::NonFinite(_)) => {
                return Err(Error::Diverged {
                    epoch,
                    last_epoch: last_finite.0,
                    last_loss: last_finite.1,
                })
            }
            Err(e) => return Err(e),
        };
        last_finite = (epoch, loss);

        if epoch == 1 || epoch % config.eval_every == 0 || epoch == config.epochs {
            if history.snapshots.last().map(|s| s.epoch) == Some(epoch) {
                continue;
            }
            let train_metric = head_metric(&mlp, train_set, num_classes)?;
            let test_metric = match test_set {
                Some(test) => Some(head_metric(&mlp, test, num_classes)?),
                None => None,
            };
            history.snapshots.push(Snapshot {
                epoch,
                train_loss: loss,
                train_metric,
                test_metric,
            });
        }
    }
    Ok((mlp, history))
}

/// One sweep cell: metrics for a (width, head) pair on the shared split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub width: usize,
    pub head: HeadKind,
    pub train_accuracy: f64,
    pub train_rms: f64,
    pub test_accuracy: f64,
    pub test_rms: f64,
}

fn sweep_cell_metrics(
    mlp: &Mlp,
    data: &LabeledMatrix,
    num_classes: usize,
) -> Result<(f64, f64)> {
    let preds = evaluate::predictions(mlp, data.features.view(), num_classes)?;
    Ok((
        evaluate::accuracy(&preds.classes, &data.targets),
        evaluate::rms(&preds.raw_scores, &data.targets),
    ))
}

/// Train one classification and one regression model per width on the same
/// split, from scratch, with per-width derived seeds. Rows are ordered by
/// width, classification first.
pub fn sweep(
    widths: &[usize],
    train_set: &LabeledMatrix,
    test_set: &LabeledMatrix,
    num_classes: usize,
    template: &MlpConfig,
    config: &TrainConfig,
) -> Result<Vec<SweepRow>> {
    if widths.is_empty() {
        return Err(Error::InvalidConfig("sweep width list is empty".into()));
    }
    let cells: Result<Vec<Vec<SweepRow>>> = widths
        .par_iter()
        .map(|&width| {
            let cell_seed = seeds::derive(config.seed, width as u64);
            let mut rows = Vec::with_capacity(2);
            for head in [Head::Classification { classes: num_classes }, Head::Regression] {
                let mlp_config = MlpConfig {
                    hidden_width: width,
                    head,
                    ..template.clone()
                };
                let cell_config = TrainConfig {
                    seed: cell_seed,
                    ..config.clone()
                };
                let (mlp, _) = train(&mlp_config, &cell_config, train_set, Some(test_set))?;
                let (train_accuracy, train_rms) =
                    sweep_cell_metrics(&mlp, train_set, num_classes)?;
                let (test_accuracy, test_rms) = sweep_cell_metrics(&mlp, test_set, num_classes)?;
                rows.push(SweepRow {
                    width,
                    head: head.kind(),
                    train_accuracy,
                    train_rms,
                    test_accuracy,
                    test_rms,
                });
            }
            Ok(rows)
        })
        .collect();
    Ok(cells?.into_iter().flatten().collect())
}
