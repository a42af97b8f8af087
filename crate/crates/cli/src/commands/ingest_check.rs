//! `ingest-check`: load, join, filter, and print dataset diagnostics.

use ratingnet::ingest;

use crate::commands::pipeline;
use crate::config::Resolved;
use crate::error::{CliResult, Stage};

pub fn run(res: &Resolved) -> CliResult<()> {
    let features_path = res.features_path();
    let records = ingest::load_financials(&features_path, &res.manifest).stage("ingest")?;
    let total_rows = records.len();
    let complete_rows = records.iter().filter(|r| r.is_complete()).count();

    let records =
        ingest::join_labels(records, &res.labels_path(), &res.scale).stage("label join")?;
    let labeled_rows = records.iter().filter(|r| r.label.is_some()).count();

    let dataset = pipeline::load_dataset(res)?;

    println!("feature file:       {}", features_path.display());
    println!("feature fields:     {}", res.manifest.len());
    println!("rows read:          {total_rows}");
    println!("complete rows:      {complete_rows}");
    println!("labeled rows:       {labeled_rows}");
    println!("usable companies:   {}", dataset.num_companies());
    println!("usable samples:     {}", dataset.len());
    println!("observed classes:   {}", dataset.class_map.num_classes());
    if !dataset.is_empty() {
        let counts = dataset.class_counts();
        println!("class distribution:");
        for (class, count) in counts.iter().enumerate() {
            let grade = dataset.class_map.grade_of(class).unwrap_or("?");
            println!("  {class} {grade:>5}: {count}");
        }
    }
    Ok(())
}
