//! `generate`: write a synthetic panel in ingest format.

use ratingnet::ingest::{write_financials, write_labels};
use ratingnet::synth;

use crate::args::GenerateArgs;
use crate::config::Resolved;
use crate::error::{CliResult, Stage};

pub fn run(res: &Resolved, args: &GenerateArgs) -> CliResult<()> {
    let mut config = res.synth_config()?;
    if let Some(companies) = args.companies {
        config.companies = companies;
        config.incomplete_companies = config.incomplete_companies.min(companies);
    }
    if let Some(years) = args.years {
        config.years = years;
    }
    if let Some(p) = args.transition_prob {
        config.transition_prob = p;
    }
    if let Some(b) = args.downgrade_bias {
        config.downgrade_bias = b;
    }
    if let Some(n) = args.incomplete {
        config.incomplete_companies = n;
    }
    if let Some(f) = args.noise_scale {
        config.scale_noise(f);
    }

    let output = synth::generate(&config).stage("generate")?;

    let features_path = res.features_path();
    let labels_path = res.labels_path();
    let manifest_path = res.out_dir.join("manifest.csv");
    write_financials(&features_path, &res.manifest, &output.records).stage("generate")?;
    write_labels(&labels_path, &output.records).stage("generate")?;
    res.manifest.write_csv(&manifest_path).stage("generate")?;

    let complete = config.companies - config.incomplete_companies;
    println!(
        "generated {} companies x {} years ({} rows, {} with missing cells)",
        config.companies,
        config.years,
        output.records.len(),
        config.incomplete_companies,
    );
    println!(
        "complete companies: {complete} -> {} usable samples after filtering",
        complete * config.years
    );
    println!(
        "observed rating-change fraction: {:.4}",
        output.truth.transition_change_fraction()
    );
    println!("wrote {}", features_path.display());
    println!("wrote {}", labels_path.display());
    println!("wrote {}", manifest_path.display());
    Ok(())
}
