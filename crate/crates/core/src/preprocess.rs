//! Train/test splitting, z-score normalization, and SMOTE class balancing.
//!
//! Pipeline order is split → fit normalizer on the training split →
//! normalize → oversample the normalized training set. Normalization
//! statistics fitted on training data are reused verbatim for test and
//! out-of-distribution cohorts.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Features with a population standard deviation below this are treated
/// as degenerate and get their std substituted with 1, so the normalized
/// column is identically zero instead of blowing up.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Per-feature mean and population standard deviation fitted on training
/// data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    mean: Array1<f64>,
    std: Array1<f64>,
}

impl NormalizationStats {
    /// Fit on a samples-by-features matrix (population std, divide by m).
    pub fn fit(matrix: &ArrayView2<f64>) -> Result<Self> {
        let (m, f) = matrix.dim();
        if m == 0 || f == 0 {
            return Err(Error::EmptyDataset);
        }
        let mean = matrix.mean_axis(Axis(0)).expect("m > 0");
        let mut std = Array1::zeros(f);
        for j in 0..f {
            let col = matrix.column(j);
            let var = col
                .iter()
                .map(|&x| {
                    let d = x - mean[j];
                    d * d
                })
                .sum::<f64>()
                / m as f64;
            let s = var.sqrt();
            std[j] = if s < DEGENERATE_STD { 1.0 } else { s };
        }
        Ok(Self { mean, std })
    }

    /// `(x - mean) / std` per cell. Values outside the training range map
    /// linearly, with no clamping.
    pub fn apply(&self, matrix: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if matrix.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: matrix.ncols(),
            });
        }
        let mut out = matrix.to_owned();
        for mut row in out.rows_mut() {
            for j in 0..row.len() {
                row[j] = (row[j] - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }

    /// Normalize a single raw feature row.
    pub fn apply_row(&self, row: &ArrayView1<f64>) -> Result<Array1<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: row.len(),
            });
        }
        Ok(Array1::from_iter(
            row.iter()
                .zip(self.mean.iter().zip(self.std.iter()))
                .map(|(&x, (&m, &s))| (x - m) / s),
        ))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn std(&self) -> &Array1<f64> {
        &self.std
    }
}

/// Fit normalization statistics on a training dataset.
pub fn fit_normalizer(train: &Dataset) -> Result<NormalizationStats> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    NormalizationStats::fit(&train.design_matrix().view())
}

/// Normalized design matrix of a dataset under the given statistics.
pub fn apply_normalizer(stats: &NormalizationStats, data: &Dataset) -> Result<Array2<f64>> {
    stats.apply(&data.design_matrix().view())
}

/// How samples are assigned to the train/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Uniform random partition of individual company-year samples.
    Sample,
    /// All of a company's years land on the same side. Train size then
    /// only approximates the requested fraction.
    Company,
}

/// A sample-disjoint train/test partition.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Random train/test partition, reproducible from `seed`. Train size is
/// `round(train_fraction * m)`, clamped so both sides are non-empty.
pub fn split(dataset: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitResult> {
    split_with_mode(dataset, train_fraction, seed, SplitMode::Sample)
}

pub fn split_with_mode(
    dataset: &Dataset,
    train_fraction: f64,
    seed: u64,
    mode: SplitMode,
) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let m = dataset.len();
    if m < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: m });
    }
    let target = ((train_fraction * m as f64).round() as usize).clamp(1, m - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut train_idx: Vec<usize>;
    match mode {
        SplitMode::Sample => {
            let mut indices: Vec<usize> = (0..m).collect();
            indices.shuffle(&mut rng);
            train_idx = indices[..target].to_vec();
        }
        SplitMode::Company => {
            let mut companies: Vec<&str> = Vec::new();
            for r in dataset.records() {
                if !companies.contains(&r.company_id.as_str()) {
                    companies.push(&r.company_id);
                }
            }
            companies.shuffle(&mut rng);
            train_idx = Vec::new();
            let mut taken = Vec::new();
            for company in companies {
                if train_idx.len() >= target {
                    break;
                }
                taken.push(company);
                train_idx.extend(
                    dataset
                        .records()
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| r.company_id == company)
                        .map(|(i, _)| i),
                );
            }
            if train_idx.len() >= m {
                // Give the last company to the test side instead.
                let last = taken.last().expect("at least one company taken");
                train_idx.retain(|&i| dataset.records()[i].company_id != *last);
            }
            if train_idx.is_empty() || train_idx.len() >= m {
                return Err(Error::TooFewSamples { needed: 2, got: m });
            }
        }
    }

    train_idx.sort_unstable();
    let test_idx: Vec<usize> = (0..m).filter(|i| !train_idx.contains(i)).collect();
    Ok(SplitResult {
        train: dataset.subset(&train_idx),
        test: dataset.subset(&test_idx),
        seed,
    })
}

/// Normalized design matrix with class targets and per-row synthetic
/// markers; the in-memory shape SMOTE and the trainer work on.
#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub features: Array2<f64>,
    pub targets: Vec<usize>,
    pub synthetic: Vec<bool>,
}

impl LabeledMatrix {
    pub fn new(features: Array2<f64>, targets: Vec<usize>) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                actual: targets.len(),
            });
        }
        let synthetic = vec![false; targets.len()];
        Ok(Self {
            features,
            targets,
            synthetic,
        })
    }

    /// Normalize a dataset's design matrix and pair it with class targets.
    pub fn from_dataset(dataset: &Dataset, stats: &NormalizationStats) -> Result<Self> {
        let features = apply_normalizer(stats, dataset)?;
        Self::new(features, dataset.class_indices())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Per-class row counts over `num_classes` classes.
    pub fn class_counts(&self, num_classes: usize) -> Result<Vec<usize>> {
        let mut counts = vec![0usize; num_classes];
        for &t in &self.targets {
            if t >= num_classes {
                return Err(Error::ClassOutOfRange {
                    class: t,
                    classes: num_classes,
                });
            }
            counts[t] += 1;
        }
        Ok(counts)
    }
}

/// Where one synthetic row came from: the interpolation endpoints, as row
/// indices into the input matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSource {
    /// Row index of the synthetic point in the output matrix.
    pub row: usize,
    pub source: usize,
    pub neighbor: usize,
}

/// SMOTE oversampling: augment every minority class with interpolated
/// synthetic rows until all class counts equal the majority count.
///
/// A synthetic row is `x + u * (nn - x)` with `u ~ Uniform(0, 1)` and `nn`
/// one of `x`'s `k` nearest same-class neighbors by Euclidean distance on
/// the (already normalized) features. Original rows are preserved
/// unchanged and come first in the output; synthetic rows follow, grouped
/// by class, and carry the synthetic flag.
pub fn smote(data: &LabeledMatrix, num_classes: usize, k: usize, seed: u64) -> Result<LabeledMatrix> {
    smote_with_sources(data, num_classes, k, seed).map(|(balanced, _)| balanced)
}

/// [`smote`] plus the interpolation endpoints of every synthetic row.
pub fn smote_with_sources(
    data: &LabeledMatrix,
    num_classes: usize,
    k: usize,
    seed: u64,
) -> Result<(LabeledMatrix, Vec<SyntheticSource>)> {
    if k == 0 {
        return Err(Error::InvalidConfig("smote neighbor count k must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = data.class_counts(num_classes)?;
    let majority = *counts.iter().max().expect("num_classes > 0");

    let mut features = data.features.clone();
    let mut targets = data.targets.clone();
    let mut synthetic = data.synthetic.clone();
    let mut sources = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in 0..num_classes {
        let need = majority - counts[class];
        if need == 0 {
            continue;
        }
        if counts[class] < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: counts[class],
            });
        }
        let rows: Vec<usize> = (0..data.len()).filter(|&i| data.targets[i] == class).collect();
        let k_class = if k > counts[class] - 1 {
            log::warn!(
                "smote: k={k} exceeds class {class} size - 1 ({}); clamping",
                counts[class] - 1
            );
            counts[class] - 1
        } else {
            k
        };

        // Brute-force k nearest same-class neighbors, ties broken by index.
        let neighbors: Vec<Vec<usize>> = rows
            .iter()
            .map(|&i| {
                let mut dist: Vec<(f64, usize)> = rows
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| {
                        let d = &data.features.row(i) - &data.features.row(j);
                        (d.dot(&d), j)
                    })
                    .collect();
                dist.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                dist.truncate(k_class);
                dist.into_iter().map(|(_, j)| j).collect()
            })
            .collect();

        let mut new_rows = Array2::zeros((need, data.features.ncols()));
        for t in 0..need {
            let src_pos = t % rows.len();
            let src = rows[src_pos];
            let nn = neighbors[src_pos][rng.random_range(0..k_class)];
            let u: f64 = rng.random();
            let x = data.features.row(src);
            let x_nn = data.features.row(nn);
            for j in 0..x.len() {
                new_rows[[t, j]] = x[j] + u * (x_nn[j] - x[j]);
            }
            sources.push(SyntheticSource {
                row: targets.len() + t,
                source: src,
                neighbor: nn,
            });
        }
        features.append(Axis(0), new_rows.view()).expect("same ncols");
        targets.extend(std::iter::repeat(class).take(need));
        synthetic.extend(std::iter::repeat(true).take(need));
    }

    Ok((
        LabeledMatrix {
            features,
            targets,
            synthetic,
        },
        sources,
    ))
}
