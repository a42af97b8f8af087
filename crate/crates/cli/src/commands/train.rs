//! `train`: the full pipeline from files to a persisted model, history,
//! and evaluation reports.

use std::path::Path;

use ratingnet::evaluate::{self, EvalReport};
use ratingnet::ingest::{write_financials, write_labels, Dataset};
use ratingnet::model_file::TrainedModel;
use ratingnet::trainer::{self, TrainHistory};

use crate::args::TrainArgs;
use crate::commands::pipeline::{self, Prepared};
use crate::commands::{write_json, write_table};
use crate::config::Resolved;
use crate::error::{CliResult, Stage};
use crate::plot;

pub fn run(res: &Resolved, args: &TrainArgs) -> CliResult<()> {
    let dataset = pipeline::load_dataset(res)?;
    let class_map = dataset.class_map.clone();
    let num_classes = class_map.num_classes();
    let prepared = pipeline::prepare(res, dataset)?;

    let mlp_config = res.mlp_config(args.head.map(Into::into), args.width, num_classes);
    let train_config = res.train_config(args.epochs)?;
    let (mlp, history) = trainer::train(
        &mlp_config,
        &train_config,
        &prepared.balanced_train,
        Some(&prepared.test),
    )
    .stage("train")?;

    let report = evaluate::eval_report(
        &mlp,
        prepared.test.features.view(),
        &prepared.test.targets,
        num_classes,
    )
    .stage("evaluate")?;

    let model = TrainedModel::new(
        mlp.config.clone(),
        mlp.params.clone(),
        prepared.stats.clone(),
        class_map,
    )
    .stage("persist")?;
    let model_path = res.model_path();
    model.save(&model_path).stage("persist")?;

    write_history(&res.out_dir, &history)?;
    write_report(&res.out_dir, &report, &model)?;
    write_test_split(&res.out_dir, &prepared, &model)?;

    println!(
        "dataset: {} samples, {} companies, {} classes",
        prepared.dataset.len(),
        prepared.dataset.num_companies(),
        num_classes
    );
    println!(
        "split: {} train / {} test; balanced train: {} rows",
        prepared.split.train.len(),
        prepared.split.test.len(),
        prepared.balanced_train.len()
    );
    println!(
        "trained {} head, width {}, {} epochs",
        model.config.head.kind().as_str(),
        model.config.hidden_width,
        train_config.epochs
    );
    println!(
        "test: accuracy {:.4}, rms {:.4}, mean notch distance {:.4} (n = {})",
        report.accuracy, report.rms, report.mean_notch_distance, report.n
    );
    println!("wrote {}", model_path.display());
    println!("wrote {}", res.out_dir.join("history.csv").display());
    println!("wrote {}", res.out_dir.join("report.json").display());
    Ok(())
}

fn write_history(out_dir: &Path, history: &TrainHistory) -> CliResult<()> {
    let metric = &history.metric_name;
    let header_train = format!("train_{metric}");
    let header_test = format!("test_{metric}");
    let header: Vec<&str> = vec!["epoch", "train_loss", &header_train, &header_test];
    let rows: Vec<Vec<String>> = history
        .snapshots
        .iter()
        .map(|s| {
            vec![
                s.epoch.to_string(),
                s.train_loss.to_string(),
                s.train_metric.to_string(),
                s.test_metric.map(|m| m.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&out_dir.join("history.csv"), "history", &header, &rows)?;

    let loss_series = plot::Series::new(
        "train loss",
        history
            .snapshots
            .iter()
            .map(|s| (s.epoch as f64, s.train_loss))
            .collect(),
    );
    let mut metric_series = vec![plot::Series::new(
        format!("train {metric}"),
        history
            .snapshots
            .iter()
            .map(|s| (s.epoch as f64, s.train_metric))
            .collect(),
    )];
    if history.snapshots.iter().all(|s| s.test_metric.is_some()) {
        metric_series.push(plot::Series::new(
            format!("test {metric}"),
            history
                .snapshots
                .iter()
                .map(|s| (s.epoch as f64, s.test_metric.unwrap()))
                .collect(),
        ));
    }
    plot::dual_axis_plot(
        &out_dir.join("history.svg"),
        "Training history",
        "epoch",
        "loss",
        metric,
        &[loss_series],
        &metric_series,
    )
    .stage("history")
}

fn write_report(out_dir: &Path, report: &EvalReport, model: &TrainedModel) -> CliResult<()> {
    write_json(&out_dir.join("report.json"), "report", report)?;

    let rows = vec![
        vec!["head".to_string(), report.head.as_str().to_string()],
        vec!["n".to_string(), report.n.to_string()],
        vec!["accuracy".to_string(), report.accuracy.to_string()],
        vec!["rms".to_string(), report.rms.to_string()],
        vec![
            "mean_notch_distance".to_string(),
            report.mean_notch_distance.to_string(),
        ],
    ];
    write_table(&out_dir.join("report.csv"), "report", &["metric", "value"], &rows)?;

    let grades: Vec<String> = (0..model.num_classes())
        .map(|c| model.grade_of(c).unwrap_or("?").to_string())
        .collect();
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(grades.iter().cloned());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let confusion_rows: Vec<Vec<String>> = report
        .confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut cells = vec![grades[i].clone()];
            cells.extend(row.iter().map(u64::to_string));
            cells
        })
        .collect();
    write_table(
        &out_dir.join("confusion.csv"),
        "report",
        &header_refs,
        &confusion_rows,
    )?;

    plot::confusion_grid(
        &out_dir.join("confusion.svg"),
        &format!("Confusion matrix ({})", report.head.as_str()),
        &grades,
        &report.confusion,
    )
    .stage("report")
}

/// Persist the raw test split (ingest format) and its predictions, so
/// `score` can be replayed on exactly the held-out cohort.
fn write_test_split(out_dir: &Path, prepared: &Prepared, model: &TrainedModel) -> CliResult<()> {
    let test: &Dataset = &prepared.split.test;
    write_financials(
        &out_dir.join("test_features.csv"),
        &test.manifest,
        test.records(),
    )
    .stage("persist")?;
    write_labels(&out_dir.join("test_labels.csv"), test.records()).stage("persist")?;

    let preds = evaluate::predictions(
        &model.mlp(),
        prepared.test.features.view(),
        model.num_classes(),
    )
    .stage("persist")?;
    let rows: Vec<Vec<String>> = test
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let true_grade = r.label.as_deref().unwrap_or("?");
            let true_class = prepared.test.targets[i];
            let predicted = preds.classes[i];
            vec![
                r.company_id.clone(),
                r.fiscal_year.to_string(),
                true_grade.to_string(),
                true_class.to_string(),
                preds.raw_scores[i].to_string(),
                predicted.to_string(),
                model.grade_of(predicted).unwrap_or("?").to_string(),
            ]
        })
        .collect();
    write_table(
        &out_dir.join("test_predictions.csv"),
        "persist",
        &[
            "company_id",
            "fiscal_year",
            "true_grade",
            "true_class",
            "raw_score",
            "predicted_class",
            "predicted_grade",
        ],
        &rows,
    )
}
