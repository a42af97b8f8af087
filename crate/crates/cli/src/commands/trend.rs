//! `trend`: per-company score slopes over a scored cohort.

use ratingnet::evaluate::{self, CompanySeries};

use crate::args::TrendArgs;
use crate::commands::pipeline::{self, ScoreRow};
use crate::commands::{write_json, write_table};
use crate::config::Resolved;
use crate::error::{CliResult, Stage};
use crate::plot;

pub fn run(res: &Resolved, args: &TrendArgs) -> CliResult<()> {
    let rows = pipeline::read_scores(&args.scores, "trend")?;
    let series = group_by_company(&rows);
    let result = evaluate::trend_slope(&series).stage("trend")?;

    let table_rows: Vec<Vec<String>> = result
        .companies
        .iter()
        .map(|c| {
            vec![
                c.company_id.clone(),
                c.slope.to_string(),
                c.intercept.to_string(),
                c.years_used.to_string(),
            ]
        })
        .collect();
    let table_path = res.out_dir.join("trend.csv");
    write_table(
        &table_path,
        "trend",
        &["company_id", "slope", "intercept", "years_used"],
        &table_rows,
    )?;

    let yearly_rows: Vec<Vec<String>> = result
        .yearly_mean
        .iter()
        .map(|(year, mean)| vec![year.to_string(), mean.to_string()])
        .collect();
    write_table(
        &res.out_dir.join("trend_yearly.csv"),
        "trend",
        &["fiscal_year", "mean_score"],
        &yearly_rows,
    )?;
    write_json(&res.out_dir.join("trend.json"), "trend", &result)?;

    let mut plot_series: Vec<plot::Series> = series
        .iter()
        .map(|s| {
            plot::Series::new(
                s.company_id.clone(),
                s.points.iter().map(|&(y, v)| (y as f64, v)).collect(),
            )
        })
        .collect();
    plot_series.push(plot::Series::new(
        "cohort mean",
        result
            .yearly_mean
            .iter()
            .map(|&(y, v)| (y as f64, v))
            .collect(),
    ));
    let plot_path = res.out_dir.join("trend.svg");
    plot::line_plot(
        &plot_path,
        "Predicted score by year (higher = worse credit)",
        "fiscal year",
        "raw score",
        &plot_series,
    )
    .stage("trend")?;

    println!("company          slope");
    for c in &result.companies {
        println!("{:<15} {:>8.4}", c.company_id, c.slope);
    }
    if !result.excluded.is_empty() {
        println!("excluded (single year): {}", result.excluded.join(", "));
    }
    println!("cohort mean slope: {:.4}", result.mean_slope);
    println!("wrote {}", table_path.display());
    println!("wrote {}", plot_path.display());
    Ok(())
}

/// Group scored rows by company in first-appearance order.
fn group_by_company(rows: &[ScoreRow]) -> Vec<CompanySeries> {
    let mut series: Vec<CompanySeries> = Vec::new();
    for row in rows {
        match series.iter_mut().find(|s| s.company_id == row.company_id) {
            Some(s) => s.points.push((row.fiscal_year, row.raw_score)),
            None => series.push(CompanySeries {
                company_id: row.company_id.clone(),
                points: vec![(row.fiscal_year, row.raw_score)],
            }),
        }
    }
    series
}
