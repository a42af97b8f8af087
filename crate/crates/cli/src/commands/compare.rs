//! `compare-external`: correlate model scores against an external risk
//! score, joined on company_id.

use std::collections::BTreeMap;
use std::path::Path;

use ratingnet::evaluate;
use ratingnet::Error;

use crate::args::CompareArgs;
use crate::commands::pipeline;
use crate::commands::{write_json, write_table};
use crate::config::Resolved;
use crate::error::{CliError, CliResult, Stage};
use crate::plot;

pub fn run(res: &Resolved, args: &CompareArgs) -> CliResult<()> {
    let score_rows = pipeline::read_scores(&args.scores, "compare")?;
    let mut model_scores: BTreeMap<String, f64> = BTreeMap::new();
    for row in &score_rows {
        if model_scores.insert(row.company_id.clone(), row.raw_score).is_some() {
            return Err(CliError::Stage {
                stage: "compare",
                source: Error::DuplicateRecord {
                    company_id: row.company_id.clone(),
                    fiscal_year: row.fiscal_year,
                },
            });
        }
    }
    let external_scores = read_external(&args.external)?;

    let mut joined: Vec<(String, f64, f64)> = Vec::new();
    for (company, &model_score) in &model_scores {
        if let Some(&external) = external_scores.get(company) {
            joined.push((company.clone(), model_score, external));
        }
    }
    if joined.len() < 3 {
        return Err(CliError::Stage {
            stage: "compare",
            source: Error::TooFewSamples {
                needed: 3,
                got: joined.len(),
            },
        });
    }

    let model: Vec<f64> = joined.iter().map(|j| j.1).collect();
    let external: Vec<f64> = joined.iter().map(|j| j.2).collect();
    let result = evaluate::correlation(&model, &external).stage("compare")?;

    write_json(&res.out_dir.join("correlation.json"), "compare", &result)?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "undefined".into());
    write_table(
        &res.out_dir.join("correlation.csv"),
        "compare",
        &["metric", "value"],
        &[
            vec!["n".into(), result.n.to_string()],
            vec!["pearson".into(), fmt(result.pearson)],
            vec!["spearman".into(), fmt(result.spearman)],
        ],
    )?;

    let pairs_rows: Vec<Vec<String>> = joined
        .iter()
        .map(|(company, m, e)| vec![company.clone(), m.to_string(), e.to_string()])
        .collect();
    write_table(
        &res.out_dir.join("comparison_pairs.csv"),
        "compare",
        &["company_id", "model_score", "external_score"],
        &pairs_rows,
    )?;

    let scatter_path = res.out_dir.join("comparison.svg");
    plot::scatter_plot(
        &scatter_path,
        "Model score vs external score",
        "external score",
        "model score (higher = riskier)",
        &[plot::Series::new(
            "companies",
            joined.iter().map(|(_, m, e)| (*e, *m)).collect(),
        )],
    )
    .stage("compare")?;

    // The model score is higher-is-riskier by construction.
    let expected = if args.higher_is_better {
        "negative"
    } else {
        "positive"
    };
    println!("joined companies: {}", result.n);
    println!(
        "external score direction: higher is {}",
        if args.higher_is_better { "better (lower risk)" } else { "worse (higher risk)" }
    );
    println!("expected correlation sign under that direction: {expected}");
    match (result.pearson, result.spearman) {
        (Some(r), Some(rho)) => {
            println!("pearson r: {r:.4}");
            println!("spearman rho: {rho:.4}");
        }
        _ => println!("correlation undefined (zero variance in one input)"),
    }
    println!("wrote {}", res.out_dir.join("correlation.json").display());
    println!("wrote {}", scatter_path.display());
    Ok(())
}

/// External file: company_id plus a `score` column.
fn read_external(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let stage = "compare";
    let mut reader = csv::Reader::from_path(path)
        .map_err(ratingnet::Error::from)
        .stage(stage)?;
    let headers = reader
        .headers()
        .map_err(ratingnet::Error::from)
        .stage(stage)?
        .clone();
    let company_idx = headers.iter().position(|h| h.trim() == "company_id");
    let score_idx = headers.iter().position(|h| h.trim() == "score");
    let mut missing = Vec::new();
    if company_idx.is_none() {
        missing.push("company_id".to_string());
    }
    if score_idx.is_none() {
        missing.push("score".to_string());
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
    let (company_idx, score_idx) = (company_idx.unwrap(), score_idx.unwrap());

    let mut scores = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(ratingnet::Error::from).stage(stage)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let company = record.get(company_idx).unwrap_or("").trim().to_string();
        let value: f64 = record
            .get(score_idx)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| CliError::Stage {
                stage,
                source: Error::MalformedRow {
                    path: path.display().to_string(),
                    row: line,
                    message: "bad score".into(),
                },
            })?;
        if scores.insert(company.clone(), value).is_some() {
            return Err(CliError::Stage {
                stage,
                source: Error::DuplicateRecord {
                    company_id: company,
                    fiscal_year: 0,
                },
            });
        }
    }
    Ok(scores)
}
