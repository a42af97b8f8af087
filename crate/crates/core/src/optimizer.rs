//! Parameter update rules: Adam (default) and plain gradient descent.

use ndarray::{ArrayBase, Dimension, OwnedRepr, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpParams;

/// Update rule selection with hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum OptimizerKind {
    Adam {
        learning_rate: f64,
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
    GradientDescent {
        learning_rate: f64,
    },
}

impl OptimizerKind {
    /// Adam with the usual defaults.
    pub fn adam(learning_rate: f64) -> Self {
        OptimizerKind::Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lr = match self {
            OptimizerKind::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                if !(0.0..1.0).contains(beta1) || !(0.0..1.0).contains(beta2) {
                    return Err(Error::InvalidConfig(
                        "adam betas must be in [0, 1)".into(),
                    ));
                }
                if *epsilon <= 0.0 {
                    return Err(Error::InvalidConfig("adam epsilon must be positive".into()));
                }
                *learning_rate
            }
            OptimizerKind::GradientDescent { learning_rate } => *learning_rate,
        };
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive and finite, got {lr}"
            )));
        }
        Ok(())
    }
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::adam(1e-3)
    }
}

/// Adaptive-moment accumulators, shaped like the parameters.
#[derive(Debug, Clone)]
struct AdamMoments {
    m: MlpParams,
    v: MlpParams,
}

/// Stateful optimizer; moments are allocated lazily on the first step.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    moments: Option<AdamMoments>,
    steps: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            moments: None,
            steps: 0,
        })
    }

    pub fn kind(&self) -> &OptimizerKind {
        &self.kind
    }

    /// Apply one update in place. Deterministic; rejects non-finite
    /// gradients or updates.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
        if !params.same_shape(grads) {
            return Err(Error::DimensionMismatch {
                expected: params.param_count(),
                actual: grads.param_count(),
            });
        }
        if !grads.all_finite() {
            return Err(Error::NonFinite("gradients".into()));
        }
        match self.kind {
            OptimizerKind::GradientDescent { learning_rate } => {
                for (layer, g) in params.layers.iter_mut().zip(&grads.layers) {
                    descend(&mut layer.weights, &g.weights, learning_rate);
                    descend(&mut layer.bias, &g.bias, learning_rate);
                }
            }
            OptimizerKind::Adam {
                learning_rate,
                beta1,
                beta2,
                epsilon,
            } => {
                if self.moments.is_none() {
                    self.moments = Some(AdamMoments {
                        m: params.zeros_like(),
                        v: params.zeros_like(),
                    });
                }
                self.steps += 1;
                let correction1 = 1.0 - beta1.powi(self.steps as i32);
                let correction2 = 1.0 - beta2.powi(self.steps as i32);
                let moments = self.moments.as_mut().expect("allocated above");
                for (((layer, g), m), v) in params
                    .layers
                    .iter_mut()
                    .zip(&grads.layers)
                    .zip(&mut moments.m.layers)
                    .zip(&mut moments.v.layers)
                {
                    adam_update(
                        &mut layer.weights,
                        &g.weights,
                        &mut m.weights,
                        &mut v.weights,
                        learning_rate,
                        beta1,
                        beta2,
                        epsilon,
                        correction1,
                        correction2,
                    );
                    adam_update(
                        &mut layer.bias,
                        &g.bias,
                        &mut m.bias,
                        &mut v.bias,
                        learning_rate,
                        beta1,
                        beta2,
                        epsilon,
                        correction1,
                        correction2,
                    );
                }
            }
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("optimizer update".into()));
        }
        Ok(())
    }
}

fn descend<D: Dimension>(
    theta: &mut ArrayBase<OwnedRepr<f64>, D>,
    grad: &ArrayBase<OwnedRepr<f64>, D>,
    learning_rate: f64,
) {
    Zip::from(theta).and(grad).for_each(|t, &g| {
        *t -= learning_rate * g;
    });
}

#[allow(clippy::too_many_arguments)]
fn adam_update<D: Dimension>(
    theta: &mut ArrayBase<OwnedRepr<f64>, D>,
    grad: &ArrayBase<OwnedRepr<f64>, D>,
    m: &mut ArrayBase<OwnedRepr<f64>, D>,
    v: &mut ArrayBase<OwnedRepr<f64>, D>,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    correction1: f64,
    correction2: f64,
) {
    Zip::from(theta)
        .and(grad)
        .and(m)
        .and(v)
        .for_each(|t, &g, m, v| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *t -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        });
}
