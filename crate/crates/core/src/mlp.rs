//! The MLP core: parameter initialization, forward pass for both heads,
//! both loss functions, analytic backpropagation, and a finite-difference
//! gradient oracle.
//!
//! All arithmetic is double precision. The network is a stack of fully
//! connected hidden layers of equal width followed by a head layer:
//! softmax over C logits for classification, a single unbounded linear
//! node for regression. Cross-entropy is computed from log-sum-exp
//! stabilized logits; the probability clamp only guards the reporting
//! path in [`loss`].
//!
//! Forward and backward are pure given (params, batch). Batch rows are
//! reduced in input order, so results are bit-reproducible.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability floor applied when reporting per-sample cross-entropy.
pub const PROBABILITY_CLAMP: f64 = 1e-15;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative as a function of the pre-activation z.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }

    /// Weight-init scale for a layer with the given fan-in: He scaling for
    /// the rectifier, Xavier for tanh.
    fn init_std(self, fan_in: usize) -> f64 {
        match self {
            Activation::Relu => (2.0 / fan_in as f64).sqrt(),
            Activation::Tanh => (1.0 / fan_in as f64).sqrt(),
        }
    }
}

/// Output head of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Head {
    Classification { classes: usize },
    Regression,
}

impl Head {
    pub fn output_dim(&self) -> usize {
        match self {
            Head::Classification { classes } => *classes,
            Head::Regression => 1,
        }
    }

    pub fn kind(&self) -> HeadKind {
        match self {
            Head::Classification { .. } => HeadKind::Classification,
            Head::Regression => HeadKind::Regression,
        }
    }

    /// The loss paired with this head.
    pub fn loss_kind(&self) -> LossKind {
        match self {
            Head::Classification { .. } => LossKind::CrossEntropy,
            Head::Regression => LossKind::SquaredError,
        }
    }
}

/// Head discriminant without the class count, for reports and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Classification,
    Regression,
}

impl HeadKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HeadKind::Classification => "classification",
            HeadKind::Regression => "regression",
        }
    }
}

/// Loss function tag: sparse categorical cross-entropy for the
/// classification head, squared error for the regression head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    CrossEntropy,
    SquaredError,
}

/// Architecture descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub head: Head,
    pub activation: Activation,
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidConfig("input_dim must be >= 1".into()));
        }
        if self.hidden_layers == 0 {
            return Err(Error::InvalidConfig("hidden_layers must be >= 1".into()));
        }
        if self.hidden_width == 0 {
            return Err(Error::InvalidConfig("hidden_width must be >= 1".into()));
        }
        if let Head::Classification { classes } = self.head {
            if classes < 2 {
                return Err(Error::InvalidConfig(
                    "classification head needs at least 2 classes".into(),
                ));
            }
        }
        Ok(())
    }

    /// (out, in) dimensions per layer, input to head.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_layers + 1);
        let mut fan_in = self.input_dim;
        for _ in 0..self.hidden_layers {
            dims.push((self.hidden_width, fan_in));
            fan_in = self.hidden_width;
        }
        dims.push((self.head.output_dim(), fan_in));
        dims
    }
}

/// One fully connected layer: `out x in` weights plus an `out` bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

/// All layer parameters. Also used as the gradient container, since
/// gradients are shaped exactly like the parameters they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    /// Fan-in scaled zero-mean normal weights, zero biases, deterministic
    /// per seed.
    pub fn init(config: &MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        for (out, fan_in) in config.layer_dims() {
            let normal = Normal::new(0.0, config.activation.init_std(fan_in))
                .expect("positive std");
            let data: Vec<f64> = (0..out * fan_in).map(|_| normal.sample(&mut rng)).collect();
            layers.push(Layer {
                weights: Array2::from_shape_vec((out, fan_in), data).expect("shape matches"),
                bias: Array1::zeros(out),
            });
        }
        Ok(Self { layers })
    }

    /// All-zero parameters with the config's shapes.
    pub fn zeros(config: &MlpConfig) -> Result<Self> {
        config.validate()?;
        let layers = config
            .layer_dims()
            .into_iter()
            .map(|(out, fan_in)| Layer {
                weights: Array2::zeros((out, fan_in)),
                bias: Array1::zeros(out),
            })
            .collect();
        Ok(Self { layers })
    }

    /// Zero-filled structure with the same shapes as `self`.
    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                weights: Array2::zeros(l.weights.dim()),
                bias: Array1::zeros(l.bias.len()),
            })
            .collect();
        Self { layers }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.weights.dim() == b.weights.dim() && a.bias.len() == b.bias.len())
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|x| x.is_finite()) && l.bias.iter().all(|x| x.is_finite())
        })
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }
}

/// Head output for a single sample.
#[derive(Debug, Clone, PartialEq)]
pub enum HeadOutput {
    /// Softmax probabilities over C classes; entries positive, sum 1.
    Probabilities(Array1<f64>),
    /// Unbounded regression score; may extend beyond the class range.
    Score(f64),
}

/// A single training target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetValue {
    Class(usize),
    Value(f64),
}

/// Batch targets, one entry per input row.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

impl Targets<'_> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(t) => t.len(),
            Targets::Values(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-sample loss on a head output: `-ln p[target]` with `p` clamped to
/// [`PROBABILITY_CLAMP`], or `(output - target)^2`.
pub fn loss(output: &HeadOutput, target: &TargetValue) -> Result<f64> {
    match (output, target) {
        (HeadOutput::Probabilities(p), TargetValue::Class(t)) => {
            if *t >= p.len() {
                return Err(Error::ClassOutOfRange {
                    class: *t,
                    classes: p.len(),
                });
            }
            Ok(-(p[*t].max(PROBABILITY_CLAMP)).ln())
        }
        (HeadOutput::Score(s), TargetValue::Value(t)) => {
            if !t.is_finite() {
                return Err(Error::NonFinite("regression target".into()));
            }
            Ok((s - t) * (s - t))
        }
        _ => Err(Error::InvalidConfig(
            "loss target kind does not match head output kind".into(),
        )),
    }
}

struct ForwardCache {
    /// Pre-activations per layer, head last.
    zs: Vec<Array2<f64>>,
    /// Post-activation outputs per hidden layer (inputs not stored).
    activations: Vec<Array2<f64>>,
}

/// The network: architecture plus parameters.
#[derive(Debug, Clone)]
pub struct Mlp {
    pub config: MlpConfig,
    pub params: MlpParams,
}

impl Mlp {
    /// Fresh network with seeded initialization.
    pub fn new(config: MlpConfig, seed: u64) -> Result<Self> {
        let params = MlpParams::init(&config, seed)?;
        Ok(Self { config, params })
    }

    /// Wrap existing parameters, verifying shapes against the config.
    pub fn with_params(config: MlpConfig, params: MlpParams) -> Result<Self> {
        config.validate()?;
        let expected = config.layer_dims();
        if params.layers.len() != expected.len() {
            return Err(Error::DimensionMismatch {
                expected: expected.len(),
                actual: params.layers.len(),
            });
        }
        for (layer, (out, fan_in)) in params.layers.iter().zip(expected) {
            if layer.weights.dim() != (out, fan_in) || layer.bias.len() != out {
                return Err(Error::DimensionMismatch {
                    expected: out * fan_in,
                    actual: layer.weights.len(),
                });
            }
        }
        if !params.all_finite() {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(Self { config, params })
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                actual: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input features".into()));
        }
        Ok(())
    }

    fn forward_cache(&self, x: &ArrayView2<f64>) -> Result<ForwardCache> {
        let layers = &self.params.layers;
        let mut zs: Vec<Array2<f64>> = Vec::with_capacity(layers.len());
        let mut activations: Vec<Array2<f64>> = Vec::with_capacity(layers.len() - 1);
        for (l, layer) in layers.iter().enumerate() {
            let input = if l == 0 {
                x.to_owned()
            } else {
                activations[l - 1].clone()
            };
            let mut z = input.dot(&layer.weights.t());
            for mut row in z.rows_mut() {
                row += &layer.bias;
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {l} pre-activation")));
            }
            if l < layers.len() - 1 {
                activations.push(z.mapv(|v| self.config.activation.apply(v)));
            }
            zs.push(z);
        }
        Ok(ForwardCache { zs, activations })
    }

    /// Raw head outputs for a batch: an (m x C) probability matrix for
    /// classification, an (m x 1) score column for regression.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let cache = self.forward_cache(&x)?;
        let logits = cache.zs.last().expect("at least one layer");
        match self.config.head {
            Head::Classification { .. } => Ok(softmax_rows(logits)),
            Head::Regression => Ok(logits.clone()),
        }
    }

    /// Head output for one sample.
    pub fn forward(&self, x: ArrayView1<f64>) -> Result<HeadOutput> {
        let row = x.insert_axis(Axis(0));
        let out = self.forward_batch(row)?;
        match self.config.head {
            Head::Classification { .. } => Ok(HeadOutput::Probabilities(out.row(0).to_owned())),
            Head::Regression => Ok(HeadOutput::Score(out[[0, 0]])),
        }
    }

    fn check_targets(&self, m: usize, targets: &Targets) -> Result<()> {
        if targets.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: targets.len(),
            });
        }
        match (self.config.head, targets) {
            (Head::Classification { classes }, Targets::Classes(ts)) => {
                for &t in *ts {
                    if t >= classes {
                        return Err(Error::ClassOutOfRange { class: t, classes });
                    }
                }
                Ok(())
            }
            (Head::Regression, Targets::Values(ts)) => {
                if ts.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("regression targets".into()));
                }
                Ok(())
            }
            _ => Err(Error::InvalidConfig(
                "targets kind does not match network head".into(),
            )),
        }
    }

    /// Mean loss over a batch, computed through the numerically stable
    /// logit path.
    pub fn batch_loss(&self, x: ArrayView2<f64>, targets: &Targets) -> Result<f64> {
        self.check_input(&x)?;
        if x.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        self.check_targets(x.nrows(), targets)?;
        let cache = self.forward_cache(&x)?;
        let logits = cache.zs.last().expect("at least one layer");
        Ok(mean_loss(logits, targets))
    }

    /// Gradients of the mean batch loss with respect to every weight and
    /// bias, plus the mean loss itself.
    pub fn backward(&self, x: ArrayView2<f64>, targets: &Targets) -> Result<(MlpParams, f64)> {
        self.check_input(&x)?;
        let m = x.nrows();
        if m == 0 {
            return Err(Error::EmptyDataset);
        }
        self.check_targets(m, targets)?;
        let cache = self.forward_cache(&x)?;
        let logits = cache.zs.last().expect("at least one layer");
        let loss = mean_loss(logits, targets);

        // Head delta: d(mean loss)/d(logits).
        let mut delta = match targets {
            Targets::Classes(ts) => {
                let mut d = softmax_rows(logits);
                for (i, &t) in ts.iter().enumerate() {
                    d[[i, t]] -= 1.0;
                }
                d /= m as f64;
                d
            }
            Targets::Values(ts) => {
                let mut d = logits.clone();
                for (i, &t) in ts.iter().enumerate() {
                    d[[i, 0]] = 2.0 * (d[[i, 0]] - t) / m as f64;
                }
                d
            }
        };

        let mut grads = self.params.zeros_like();
        for l in (0..self.params.layers.len()).rev() {
            let input = if l == 0 {
                x.to_owned()
            } else {
                cache.activations[l - 1].clone()
            };
            grads.layers[l].weights = delta.t().dot(&input);
            grads.layers[l].bias = delta.sum_axis(Axis(0));
            if l > 0 {
                let upstream = delta.dot(&self.params.layers[l].weights);
                let dz = cache.zs[l - 1].mapv(|z| self.config.activation.derivative(z));
                delta = upstream * dz;
            }
            if grads.layers[l].weights.iter().any(|v| !v.is_finite())
                || grads.layers[l].bias.iter().any(|v| !v.is_finite())
            {
                return Err(Error::NonFinite(format!("layer {l} gradient")));
            }
        }
        Ok((grads, loss))
    }

    /// Central-difference gradient of the mean batch loss:
    /// `(L(p + h) - L(p - h)) / 2h` per parameter. Verification oracle for
    /// [`Mlp::backward`]; it shares only the forward/loss path.
    pub fn finite_difference_grad(
        &self,
        x: ArrayView2<f64>,
        targets: &Targets,
        h: f64,
    ) -> Result<MlpParams> {
        if !(h > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "finite-difference step must be positive, got {h}"
            )));
        }
        let mut probe = self.clone();
        let mut grads = self.params.zeros_like();
        for l in 0..self.params.layers.len() {
            for idx in 0..self.params.layers[l].weights.len() {
                let original = probe.params.layers[l].weights.as_slice().expect("standard layout")[idx];
                probe.params.layers[l].weights.as_slice_mut().expect("standard layout")[idx] =
                    original + h;
                let plus = probe.batch_loss(x, targets)?;
                probe.params.layers[l].weights.as_slice_mut().expect("standard layout")[idx] =
                    original - h;
                let minus = probe.batch_loss(x, targets)?;
                probe.params.layers[l].weights.as_slice_mut().expect("standard layout")[idx] =
                    original;
                grads.layers[l].weights.as_slice_mut().expect("standard layout")[idx] =
                    (plus - minus) / (2.0 * h);
            }
            for idx in 0..self.params.layers[l].bias.len() {
                let original = probe.params.layers[l].bias[idx];
                probe.params.layers[l].bias[idx] = original + h;
                let plus = probe.batch_loss(x, targets)?;
                probe.params.layers[l].bias[idx] = original - h;
                let minus = probe.batch_loss(x, targets)?;
                probe.params.layers[l].bias[idx] = original;
                grads.layers[l].bias[idx] = (plus - minus) / (2.0 * h);
            }
        }
        Ok(grads)
    }

    /// Smallest |pre-activation| over all hidden units for the batch.
    /// Finite differences are only trustworthy for the rectifier away from
    /// its kink; callers redraw configurations where this is tiny.
    pub fn min_hidden_preactivation(&self, x: ArrayView2<f64>) -> Result<f64> {
        self.check_input(&x)?;
        let cache = self.forward_cache(&x)?;
        let mut min = f64::INFINITY;
        for z in &cache.zs[..cache.zs.len() - 1] {
            for &v in z.iter() {
                min = min.min(v.abs());
            }
        }
        Ok(min)
    }
}

/// Relative error between analytic and finite-difference gradients,
/// floored so that round-off on near-zero gradients does not register.
pub fn gradient_rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-4)
}

/// Max [`gradient_rel_error`] over every parameter of the network.
pub fn gradient_check_max_rel_error(
    mlp: &Mlp,
    x: ArrayView2<f64>,
    targets: &Targets,
    h: f64,
) -> Result<f64> {
    let (analytic, _) = mlp.backward(x, targets)?;
    let numeric = mlp.finite_difference_grad(x, targets, h)?;
    let mut max = 0.0f64;
    for (a, n) in analytic.layers.iter().zip(&numeric.layers) {
        for (&av, &nv) in a.weights.iter().zip(n.weights.iter()) {
            max = max.max(gradient_rel_error(av, nv));
        }
        for (&av, &nv) in a.bias.iter().zip(n.bias.iter()) {
            max = max.max(gradient_rel_error(av, nv));
        }
    }
    Ok(max)
}

fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|z| (z - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

/// Mean batch loss from logits via log-sum-exp (classification) or the
/// squared-error definition (regression).
fn mean_loss(logits: &Array2<f64>, targets: &Targets) -> f64 {
    match targets {
        Targets::Classes(ts) => {
            let mut total = 0.0;
            for (row, &t) in logits.rows().into_iter().zip(ts.iter()) {
                let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = max + row.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
                total += lse - row[t];
            }
            total / ts.len() as f64
        }
        Targets::Values(ts) => {
            let mut total = 0.0;
            for (row, &t) in logits.rows().into_iter().zip(ts.iter()) {
                let d = row[0] - t;
                total += d * d;
            }
            total / ts.len() as f64
        }
    }
}
