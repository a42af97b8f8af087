//! Measurement: accuracy, RMS on class indices, confusion matrices, notch
//! distance, per-company trend slopes, and rank/linear correlations.
//!
//! RMS conventions: the regression head is scored on its raw continuous
//! output (pre-rounding); the classification head on argmax indices. Both
//! are taken against true class indices. Reports label which convention
//! applies through the `head` field.

use std::collections::BTreeMap;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::{Head, HeadKind, HeadOutput, Mlp};

/// Raw scores and decided classes for a batch of rows.
#[derive(Debug, Clone)]
pub struct ModelPredictions {
    /// Regression: the continuous score. Classification: the argmax index
    /// as a real number.
    pub raw_scores: Vec<f64>,
    /// Decided class per row: argmax (ties toward the lower index) for
    /// classification, nearest integer clamped to `[0, C-1]` for
    /// regression.
    pub classes: Vec<usize>,
}

/// Decide a class from one head output.
pub fn decide_class(output: &HeadOutput, num_classes: usize) -> usize {
    match output {
        HeadOutput::Probabilities(p) => argmax(p.view()),
        HeadOutput::Score(s) => round_clamp(*s, num_classes),
    }
}

/// Predicted class for one normalized sample.
pub fn predict_class(mlp: &Mlp, x: ArrayView1<f64>) -> Result<usize> {
    let output = mlp.forward(x)?;
    let num_classes = match mlp.config.head {
        Head::Classification { classes } => classes,
        Head::Regression => usize::MAX, // no clamp bound known at the net level
    };
    Ok(decide_class(&output, num_classes))
}

/// Scores and classes for a normalized batch.
pub fn predictions(
    mlp: &Mlp,
    features: ArrayView2<f64>,
    num_classes: usize,
) -> Result<ModelPredictions> {
    let out = mlp.forward_batch(features)?;
    let mut raw_scores = Vec::with_capacity(out.nrows());
    let mut classes = Vec::with_capacity(out.nrows());
    match mlp.config.head {
        Head::Classification { classes: c } => {
            if c != num_classes {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: num_classes,
                });
            }
            for row in out.rows() {
                let class = argmax(row);
                raw_scores.push(class as f64);
                classes.push(class);
            }
        }
        Head::Regression => {
            for row in out.rows() {
                let score = row[0];
                raw_scores.push(score);
                classes.push(round_clamp(score, num_classes));
            }
        }
    }
    Ok(ModelPredictions {
        raw_scores,
        classes,
    })
}

fn argmax(row: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn round_clamp(score: f64, num_classes: usize) -> usize {
    let rounded = score.round();
    if rounded <= 0.0 {
        0
    } else {
        (rounded as usize).min(num_classes.saturating_sub(1))
    }
}

/// Fraction of rows whose decided class equals the target.
pub fn accuracy(classes: &[usize], targets: &[usize]) -> f64 {
    let hits = classes
        .iter()
        .zip(targets)
        .filter(|(c, t)| c == t)
        .count();
    hits as f64 / targets.len() as f64
}

/// Root mean squared difference between raw scores and integer targets.
pub fn rms(raw_scores: &[f64], targets: &[usize]) -> f64 {
    let total: f64 = raw_scores
        .iter()
        .zip(targets)
        .map(|(&s, &t)| {
            let d = s - t as f64;
            d * d
        })
        .sum();
    (total / targets.len() as f64).sqrt()
}

/// Accuracy, RMS, confusion matrix, and notch distance for one
/// model/dataset pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub head: HeadKind,
    pub accuracy: f64,
    pub rms: f64,
    /// Rows = true class, columns = predicted class.
    pub confusion: Vec<Vec<u64>>,
    pub mean_notch_distance: f64,
    pub n: usize,
}

/// Evaluate a network on a normalized, labeled batch.
pub fn eval_report(
    mlp: &Mlp,
    features: ArrayView2<f64>,
    targets: &[usize],
    num_classes: usize,
) -> Result<EvalReport> {
    if features.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if features.nrows() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            actual: targets.len(),
        });
    }
    for &t in targets {
        if t >= num_classes {
            return Err(Error::ClassOutOfRange {
                class: t,
                classes: num_classes,
            });
        }
    }
    let preds = predictions(mlp, features, num_classes)?;
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in targets.iter().zip(&preds.classes) {
        confusion[t][p] += 1;
    }
    let n = targets.len();
    let trace: u64 = (0..num_classes).map(|i| confusion[i][i]).sum();
    let report = EvalReport {
        head: mlp.config.head.kind(),
        accuracy: trace as f64 / n as f64,
        rms: rms(&preds.raw_scores, targets),
        mean_notch_distance: mean_notch_distance(&confusion),
        confusion,
        n,
    };
    debug_assert_eq!(report.accuracy, trace as f64 / n as f64);
    debug_assert!(
        (report.mean_notch_distance == 0.0) == (report.accuracy == 1.0)
            || report.n == 0
    );
    Ok(report)
}

/// Average |true - predicted| in notches: `sum count(i,j) * |i-j| / n`.
pub fn mean_notch_distance(confusion: &[Vec<u64>]) -> f64 {
    let mut total = 0.0;
    let mut n = 0u64;
    for (i, row) in confusion.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            total += count as f64 * (i as f64 - j as f64).abs();
            n += count;
        }
    }
    if n == 0 {
        0.0
    } else {
        total / n as f64
    }
}

/// One company's score time series.
#[derive(Debug, Clone)]
pub struct CompanySeries {
    pub company_id: String,
    /// (year, raw score) points.
    pub points: Vec<(i32, f64)>,
}

/// Per-company least-squares fit of score against year.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompanyTrend {
    pub company_id: String,
    pub slope: f64,
    pub intercept: f64,
    pub years_used: usize,
}

/// Cohort trend summary. A positive slope means deteriorating credit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendResult {
    pub companies: Vec<CompanyTrend>,
    /// Mean of per-company slopes.
    pub mean_slope: f64,
    /// Companies excluded for having fewer than two distinct years.
    pub excluded: Vec<String>,
    /// Cross-company mean score per year, over all input points.
    pub yearly_mean: Vec<(i32, f64)>,
}

/// Ordinary least-squares slope of score vs year per company, plus the
/// cohort mean slope and the per-year mean-score series.
pub fn trend_slope(series: &[CompanySeries]) -> Result<TrendResult> {
    if series.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut companies = Vec::new();
    let mut excluded = Vec::new();
    let mut by_year: BTreeMap<i32, (f64, usize)> = BTreeMap::new();

    for s in series {
        for &(year, score) in &s.points {
            let entry = by_year.entry(year).or_insert((0.0, 0));
            entry.0 += score;
            entry.1 += 1;
        }
        let mut distinct_years: Vec<i32> = s.points.iter().map(|p| p.0).collect();
        distinct_years.sort_unstable();
        distinct_years.dedup();
        if distinct_years.len() < 2 {
            log::warn!(
                "trend: company {} has fewer than two distinct years; excluded",
                s.company_id
            );
            excluded.push(s.company_id.clone());
            continue;
        }
        let (slope, intercept) = ols(&s.points);
        companies.push(CompanyTrend {
            company_id: s.company_id.clone(),
            slope,
            intercept,
            years_used: distinct_years.len(),
        });
    }

    if companies.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: series.iter().map(|s| s.points.len()).max().unwrap_or(0),
        });
    }
    let mean_slope =
        companies.iter().map(|c| c.slope).sum::<f64>() / companies.len() as f64;
    let yearly_mean = by_year
        .into_iter()
        .map(|(year, (total, count))| (year, total / count as f64))
        .collect();
    Ok(TrendResult {
        companies,
        mean_slope,
        excluded,
        yearly_mean,
    })
}

fn ols(points: &[(i32, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &(x, y) in points {
        let dx = x as f64 - mean_x;
        sxy += dx * (y - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

/// Pearson and Spearman correlation; `None` when undefined because one
/// side has zero variance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub n: usize,
}

/// Pearson on values, Spearman on average ranks.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: xs.len(),
        });
    }
    Ok(CorrelationResult {
        pearson: pearson(xs, ys),
        spearman: pearson(&average_ranks(xs), &average_ranks(ys)),
        n: xs.len(),
    })
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// 1-based ranks with ties assigned the average of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite scores"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0; // average of 1-based positions i+1..=j+1
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spread diagnostics for a scored cohort.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRange {
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

pub fn score_range(scores: &[f64]) -> Result<ScoreRange> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScoreRange {
        min,
        max,
        spread: max - min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{Activation, MlpConfig, MlpParams};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};

    #[test]
    fn argmax_decides_and_breaks_ties_low() {
        let p = HeadOutput::Probabilities(array![0.1, 0.7, 0.2]);
        assert_eq!(decide_class(&p, 3), 1);
        let tie = HeadOutput::Probabilities(array![0.4, 0.4, 0.2]);
        assert_eq!(decide_class(&tie, 3), 0);
    }

    #[test]
    fn regression_rounding_and_clamping() {
        assert_eq!(decide_class(&HeadOutput::Score(3.4), 6), 3);
        assert_eq!(decide_class(&HeadOutput::Score(7.2), 6), 5);
        assert_eq!(decide_class(&HeadOutput::Score(-0.7), 6), 0);
        assert_eq!(decide_class(&HeadOutput::Score(4.5), 6), 5);
    }

    fn identity_regression_mlp() -> Mlp {
        // One hidden relu unit passing x through: score(x) = x for x >= 0.
        let config = MlpConfig {
            input_dim: 1,
            hidden_layers: 1,
            hidden_width: 1,
            head: Head::Regression,
            activation: Activation::Relu,
        };
        let mut params = MlpParams::zeros(&config).unwrap();
        params.layers[0].weights[[0, 0]] = 1.0;
        params.layers[1].weights[[0, 0]] = 1.0;
        Mlp::with_params(config, params).unwrap()
    }

    #[test]
    fn perfect_predictions_give_trivial_report() {
        let mlp = identity_regression_mlp();
        let features = array![[0.0], [1.0], [2.0], [1.0], [0.0], [2.0], [1.0], [0.0], [2.0], [1.0]];
        let targets = vec![0, 1, 2, 1, 0, 2, 1, 0, 2, 1];
        let report = eval_report(&mlp, features.view(), &targets, 3).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.rms, 0.0);
        assert_eq!(report.mean_notch_distance, 0.0);
        for (i, row) in report.confusion.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                assert_eq!(c > 0, i == j, "confusion[{i}][{j}]");
            }
        }
    }

    #[test]
    fn one_notch_miss_on_three_samples() {
        let mlp = identity_regression_mlp();
        let features = array![[0.0], [1.0], [3.0]];
        let targets = vec![0, 1, 2];
        let report = eval_report(&mlp, features.view(), &targets, 4).unwrap();
        assert_abs_diff_eq!(report.accuracy, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(report.mean_notch_distance, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn regression_rms_uses_raw_scores() {
        let mlp = identity_regression_mlp();
        let features = array![[0.0], [1.5]];
        let targets = vec![0, 1];
        let report = eval_report(&mlp, features.view(), &targets, 2).unwrap();
        assert_abs_diff_eq!(report.rms, (0.25f64 / 2.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.rms, 0.3536, epsilon = 1e-4);
    }

    #[test]
    fn empty_dataset_rejected() {
        let mlp = identity_regression_mlp();
        let features = ndarray::Array2::<f64>::zeros((0, 1));
        assert!(matches!(
            eval_report(&mlp, features.view(), &[], 2),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn notch_distance_hand_values() {
        let diagonal = vec![vec![3, 0], vec![0, 2]];
        assert_eq!(mean_notch_distance(&diagonal), 0.0);

        let mut far = vec![vec![0u64; 6]; 6];
        far[0][5] = 1;
        assert_eq!(mean_notch_distance(&far), 5.0);

        let mixed = vec![vec![8, 2], vec![0, 0]];
        assert_abs_diff_eq!(mean_notch_distance(&mixed), 0.2, epsilon = 1e-15);
    }

    fn series(company: &str, points: &[(i32, f64)]) -> CompanySeries {
        CompanySeries {
            company_id: company.into(),
            points: points.to_vec(),
        }
    }

    #[test]
    fn exact_line_has_unit_slope() {
        let result = trend_slope(&[series("C1", &[(2016, 1.0), (2017, 2.0), (2018, 3.0)])]).unwrap();
        assert_abs_diff_eq!(result.companies[0].slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(result.mean_slope, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_series_has_zero_slope() {
        let result = trend_slope(&[series("C1", &[(2016, 2.0), (2017, 2.0), (2018, 2.0)])]).unwrap();
        assert_eq!(result.companies[0].slope, 0.0);
    }

    #[test]
    fn ols_hand_value() {
        let result = trend_slope(&[series("C1", &[(2016, 0.0), (2017, 2.0), (2018, 1.0)])]).unwrap();
        assert_abs_diff_eq!(result.companies[0].slope, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn single_year_company_is_excluded_with_notice() {
        let result = trend_slope(&[
            series("C1", &[(2016, 1.0), (2017, 2.0)]),
            series("C2", &[(2016, 5.0)]),
        ])
        .unwrap();
        assert_eq!(result.companies.len(), 1);
        assert_eq!(result.excluded, vec!["C2".to_string()]);
        // Excluded companies still contribute to the yearly mean.
        assert_abs_diff_eq!(result.yearly_mean[0].1, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn slope_is_invariant_under_constant_shift() {
        let base = [(2016, 0.3), (2017, 1.1), (2018, 0.9), (2019, 1.6)];
        let shifted: Vec<(i32, f64)> = base.iter().map(|&(y, s)| (y, s + 11.5)).collect();
        let a = trend_slope(&[series("C1", &base)]).unwrap();
        let b = trend_slope(&[series("C1", &shifted)]).unwrap();
        assert_abs_diff_eq!(a.companies[0].slope, b.companies[0].slope, epsilon = 1e-12);
        assert_abs_diff_eq!(
            b.companies[0].intercept - a.companies[0].intercept,
            11.5,
            epsilon = 1e-9
        );
    }

    #[test]
    fn perfect_linear_relation_has_unit_correlations() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let r = correlation(&xs, &ys).unwrap();
        assert_abs_diff_eq!(r.pearson.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.spearman.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn negated_relation_has_minus_one_correlations() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        let r = correlation(&xs, &ys).unwrap();
        assert_abs_diff_eq!(r.pearson.unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.spearman.unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn spearman_hand_value_0_8() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 3.0, 2.0, 4.0];
        let r = correlation(&xs, &ys).unwrap();
        assert_abs_diff_eq!(r.spearman.unwrap(), 0.8, epsilon = 1e-9);
    }

    #[test]
    fn zero_variance_is_undefined_not_nan() {
        let xs = [1.0, 1.0, 1.0];
        let ys = [1.0, 2.0, 3.0];
        let r = correlation(&xs, &ys).unwrap();
        assert!(r.pearson.is_none());
        assert!(r.spearman.is_none());
    }

    #[test]
    fn correlation_needs_three_pairs() {
        assert!(matches!(
            correlation(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn average_ranks_handle_ties() {
        let ranks = average_ranks(&[10.0, 20.0, 20.0, 30.0]);
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn score_range_hand_values() {
        let r = score_range(&[1.0, 1.1, 1.05]).unwrap();
        assert_abs_diff_eq!(r.spread, 0.1, epsilon = 1e-12);
        let single = score_range(&[2.5]).unwrap();
        assert_eq!(single.spread, 0.0);
        let wide = score_range(&[-1.0, 4.0]).unwrap();
        assert_eq!(wide.spread, 5.0);
    }

    #[test]
    fn classification_rms_uses_argmax_indices() {
        // Zero-parameter classifier: uniform probabilities, argmax = 0.
        let config = MlpConfig {
            input_dim: 1,
            hidden_layers: 1,
            hidden_width: 1,
            head: Head::Classification { classes: 3 },
            activation: Activation::Relu,
        };
        let mlp = Mlp::with_params(config.clone(), MlpParams::zeros(&config).unwrap()).unwrap();
        let features = array![[0.0], [0.0]];
        let targets = vec![0, 2];
        let report = eval_report(&mlp, features.view(), &targets, 3).unwrap();
        assert_abs_diff_eq!(report.accuracy, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(report.rms, (4.0f64 / 2.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn predictions_row_order_is_stable() {
        let mlp = identity_regression_mlp();
        let features = array![[0.2], [1.9], [0.8]];
        let preds = predictions(&mlp, features.view(), 3).unwrap();
        assert_eq!(preds.classes, vec![0, 2, 1]);
        let scores: Vec<f64> = vec![0.2, 1.9, 0.8];
        for (a, b) in preds.raw_scores.iter().zip(&scores) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn spearman_invariant_under_monotone_transforms(
            values in proptest::collection::vec(-50.0f64..50.0, 5..40),
            offset in -10.0f64..10.0,
        ) {
            // Quantize so a strictly increasing transform cannot merge two
            // nearly equal values into a new tie.
            let xs: Vec<f64> = values.iter().map(|v| (v * 1e4).round() / 1e4).collect();
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, v)| v * ((i % 3) as f64 - 1.0)).collect();
            let base = correlation(&xs, &ys).unwrap();
            let tx: Vec<f64> = xs.iter().map(|x| (x / 25.0).exp() * 3.0 + offset).collect();
            let transformed = correlation(&tx, &ys).unwrap();
            match (base.spearman, transformed.spearman) {
                (Some(a), Some(b)) => proptest::prop_assert!((a - b).abs() < 1e-9),
                (a, b) => proptest::prop_assert_eq!(a.is_none(), b.is_none()),
            }
        }

        #[test]
        fn accuracy_is_trace_over_n(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..60)
        ) {
            let targets: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let classes: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let mut confusion = vec![vec![0u64; 4]; 4];
            for (&t, &p) in targets.iter().zip(&classes) {
                confusion[t][p] += 1;
            }
            let trace: u64 = (0..4).map(|i| confusion[i][i]).sum();
            let acc = accuracy(&classes, &targets);
            proptest::prop_assert_eq!(acc, trace as f64 / targets.len() as f64);
            let notch = mean_notch_distance(&confusion);
            proptest::prop_assert_eq!(notch == 0.0, acc == 1.0);
        }
    }
}
