//! `score`: apply a saved model to a cohort feature file.

use ndarray::Array2;
use ratingnet::evaluate;
use ratingnet::ingest;
use ratingnet::model_file::TrainedModel;
use ratingnet::Error;

use crate::args::ScoreArgs;
use crate::commands::write_table;
use crate::config::Resolved;
use crate::error::{CliError, CliResult, Stage};

pub fn run(res: &Resolved, args: &ScoreArgs) -> CliResult<()> {
    let model_path = args.model.clone().unwrap_or_else(|| res.model_path());
    let model = TrainedModel::load(&model_path).stage("model load")?;
    if res.manifest.len() != model.input_dim() {
        return Err(CliError::Stage {
            stage: "score",
            source: Error::DimensionMismatch {
                expected: model.input_dim(),
                actual: res.manifest.len(),
            },
        });
    }

    let records = ingest::load_financials(&args.features, &res.manifest).stage("score")?;
    if records.is_empty() {
        return Err(CliError::Stage {
            stage: "score",
            source: Error::EmptyDataset,
        });
    }
    if let Some(bad) = records.iter().find(|r| !r.is_complete()) {
        return Err(CliError::Stage {
            stage: "score",
            source: Error::IncompleteRecord {
                company_id: bad.company_id.clone(),
                fiscal_year: bad.fiscal_year,
            },
        });
    }

    let mut raw = Array2::zeros((records.len(), model.input_dim()));
    for (i, r) in records.iter().enumerate() {
        for (j, v) in r.values.iter().enumerate() {
            raw[[i, j]] = v.expect("checked complete");
        }
    }
    let preds = model.score_rows(raw.view()).stage("score")?;

    let rows: Vec<Vec<String>> = records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                r.company_id.clone(),
                r.fiscal_year.to_string(),
                preds.raw_scores[i].to_string(),
                preds.classes[i].to_string(),
                model.grade_of(preds.classes[i]).unwrap_or("?").to_string(),
            ]
        })
        .collect();
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| res.out_dir.join("scores.csv"));
    write_table(
        &output,
        "score",
        &["company_id", "fiscal_year", "raw_score", "class_index", "grade"],
        &rows,
    )?;

    let range = evaluate::score_range(&preds.raw_scores).stage("score")?;
    println!(
        "scored {} rows with the {} head",
        records.len(),
        model.config.head.kind().as_str()
    );
    println!(
        "score range: min {:.4}, max {:.4}, spread {:.4}",
        range.min, range.max, range.spread
    );
    println!("wrote {}", output.display());
    Ok(())
}
