//! `sweep`: train both heads across hidden widths and tabulate metrics.

use ratingnet::mlp::HeadKind;
use ratingnet::trainer;

use crate::args::SweepArgs;
use crate::commands::{pipeline, write_table};
use crate::config::Resolved;
use crate::error::{CliError, CliResult, Stage};
use crate::plot;

pub fn run(res: &Resolved, args: &SweepArgs) -> CliResult<()> {
    if args.widths.is_empty() {
        return Err(CliError::Usage("sweep needs at least one width".into()));
    }
    let dataset = pipeline::load_dataset(res)?;
    let num_classes = dataset.class_map.num_classes();
    let prepared = pipeline::prepare(res, dataset)?;

    let template = res.mlp_config(Some(HeadKind::Classification), None, num_classes);
    let train_config = res.train_config(args.epochs)?;
    let rows = trainer::sweep(
        &args.widths,
        &prepared.balanced_train,
        &prepared.test,
        num_classes,
        &template,
        &train_config,
    )
    .stage("sweep")?;

    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.width.to_string(),
                r.head.as_str().to_string(),
                r.train_accuracy.to_string(),
                r.train_rms.to_string(),
                r.test_accuracy.to_string(),
                r.test_rms.to_string(),
            ]
        })
        .collect();
    let table_path = res.out_dir.join("sweep.csv");
    write_table(
        &table_path,
        "sweep",
        &[
            "width",
            "head",
            "train_accuracy",
            "train_rms",
            "test_accuracy",
            "test_rms",
        ],
        &table_rows,
    )?;

    let series_for = |head: HeadKind, accuracy: bool| -> plot::Series {
        let points = rows
            .iter()
            .filter(|r| r.head == head)
            .map(|r| {
                (
                    r.width as f64,
                    if accuracy { r.test_accuracy } else { r.test_rms },
                )
            })
            .collect();
        let metric = if accuracy { "accuracy" } else { "rms" };
        plot::Series::new(format!("{} {metric}", head.as_str()), points)
    };
    let plot_path = res.out_dir.join("sweep.svg");
    plot::dual_axis_plot(
        &plot_path,
        "Test accuracy and RMS vs nodes per layer",
        "nodes per layer",
        "accuracy",
        "rms",
        &[
            series_for(HeadKind::Classification, true),
            series_for(HeadKind::Regression, true),
        ],
        &[
            series_for(HeadKind::Classification, false),
            series_for(HeadKind::Regression, false),
        ],
    )
    .stage("sweep")?;

    println!("width  head            test_accuracy  test_rms");
    for r in &rows {
        println!(
            "{:>5}  {:<14}  {:>13.4}  {:>8.4}",
            r.width,
            r.head.as_str(),
            r.test_accuracy,
            r.test_rms
        );
    }
    println!("wrote {}", table_path.display());
    println!("wrote {}", plot_path.display());
    Ok(())
}
