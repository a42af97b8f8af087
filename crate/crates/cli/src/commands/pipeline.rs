//! Shared pipeline stages: ingest, split, normalize, balance.

use std::path::Path;

use ratingnet::ingest::{self, Dataset, YearRange};
use ratingnet::preprocess::{
    self, LabeledMatrix, NormalizationStats, SplitResult,
};
use ratingnet::seeds;
use ratingnet::Error;

use crate::config::{NormalizationMode, Resolved};
use crate::error::{CliError, CliResult, Stage};

/// Load features + labels and run the completeness filter.
pub fn load_dataset(res: &Resolved) -> CliResult<Dataset> {
    let features_path = res.features_path();
    let labels_path = res.labels_path();
    let records = ingest::load_financials(&features_path, &res.manifest).stage("ingest")?;
    let records = ingest::join_labels(records, &labels_path, &res.scale).stage("label join")?;
    let period = resolve_period(res, &records)?;
    ingest::filter_complete(&records, &res.manifest, &res.scale, period)
        .stage("completeness filter")
}

fn resolve_period(
    res: &Resolved,
    records: &[ingest::CompanyYearRecord],
) -> CliResult<YearRange> {
    match res.config.preprocess.period {
        Some([start, end]) => YearRange::new(start, end).stage("period"),
        None => YearRange::covering(records).ok_or(CliError::Stage {
            stage: "period",
            source: Error::EmptyDataset,
        }),
    }
}

/// Everything the training stages produce before the optimizer runs.
pub struct Prepared {
    pub dataset: Dataset,
    pub split: SplitResult,
    pub stats: NormalizationStats,
    /// Balanced, normalized training matrix.
    pub balanced_train: LabeledMatrix,
    /// Normalized (un-balanced) test matrix.
    pub test: LabeledMatrix,
}

/// split -> fit normalizer -> normalize -> SMOTE on the training side.
pub fn prepare(res: &Resolved, dataset: Dataset) -> CliResult<Prepared> {
    if dataset.is_empty() {
        return Err(CliError::Stage {
            stage: "completeness filter",
            source: Error::EmptyDataset,
        });
    }
    let pre = &res.config.preprocess;
    let split = preprocess::split_with_mode(
        &dataset,
        pre.train_fraction,
        seeds::derive(res.config.seed, seeds::stream::SPLIT),
        pre.split_mode,
    )
    .stage("split")?;

    let stats = match pre.normalization {
        NormalizationMode::TrainOnly => preprocess::fit_normalizer(&split.train),
        NormalizationMode::FullSet => preprocess::fit_normalizer(&dataset),
    }
    .stage("normalize")?;

    let train_matrix = LabeledMatrix::from_dataset(&split.train, &stats).stage("normalize")?;
    let test = LabeledMatrix::from_dataset(&split.test, &stats).stage("normalize")?;

    let num_classes = dataset.class_map.num_classes();
    for class in 0..num_classes {
        if !train_matrix.targets.contains(&class) {
            return Err(CliError::Stage {
                stage: "split",
                source: Error::InvalidConfig(format!(
                    "class {class} ('{}') has no training samples after the split; \
                     try another seed or more data",
                    dataset.class_map.grade_of(class).unwrap_or("?")
                )),
            });
        }
    }

    let balanced_train = preprocess::smote(
        &train_matrix,
        num_classes,
        pre.smote_k,
        seeds::derive(res.config.seed, seeds::stream::SMOTE),
    )
    .stage("smote")?;

    Ok(Prepared {
        dataset,
        split,
        stats,
        balanced_train,
        test,
    })
}

/// One row of a scored cohort file.
#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub company_id: String,
    pub fiscal_year: i32,
    pub raw_score: f64,
}

/// Read a `score` output file (needs company_id, fiscal_year, raw_score).
pub fn read_scores(path: &Path, stage: &'static str) -> CliResult<Vec<ScoreRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(ratingnet::Error::from)
        .stage(stage)?;
    let headers = reader
        .headers()
        .map_err(ratingnet::Error::from)
        .stage(stage)?
        .clone();
    let position_of = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut missing = Vec::new();
    let company_idx = position_of("company_id");
    let year_idx = position_of("fiscal_year");
    let score_idx = position_of("raw_score");
    for (idx, name) in [
        (company_idx, "company_id"),
        (year_idx, "fiscal_year"),
        (score_idx, "raw_score"),
    ] {
        if idx.is_none() {
            missing.push(name.to_string());
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Stage {
            stage,
            source: Error::MissingColumns {
                path: path.display().to_string(),
                missing,
            },
        });
    }
    let (company_idx, year_idx, score_idx) =
        (company_idx.unwrap(), year_idx.unwrap(), score_idx.unwrap());

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(ratingnet::Error::from).stage(stage)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |message: String| CliError::Stage {
            stage,
            source: Error::MalformedRow {
                path: path.display().to_string(),
                row: line,
                message,
            },
        };
        let company_id = record.get(company_idx).unwrap_or("").trim().to_string();
        if company_id.is_empty() {
            return Err(malformed("empty company_id".into()));
        }
        let fiscal_year: i32 = record
            .get(year_idx)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| malformed("bad fiscal_year".into()))?;
        let raw_score: f64 = record
            .get(score_idx)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| malformed("bad raw_score".into()))?;
        rows.push(ScoreRow {
            company_id,
            fiscal_year,
            raw_score,
        });
    }
    Ok(rows)
}
