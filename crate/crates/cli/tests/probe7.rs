use ratingnet::evaluate;
use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, MlpConfig};
use ratingnet::preprocess::{self, LabeledMatrix};
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::{self, SynthConfig};
use ratingnet::trainer::{self, TrainConfig};

/// Ordinal signal on a few dims plus non-adjacent class aliasing on others,
/// mimicking statement data where distant rating classes can look alike.
fn aliased_prototypes(config: &SynthConfig) -> Vec<Vec<f64>> {
    let f = config.feature_dim();
    (0..config.num_classes())
        .map(|c| {
            (0..f)
                .map(|j| {
                    let scale = config.noise_std[j];
                    let offset = 1.5 + 0.35 * (j % 5) as f64;
                    let direction = if (j / 4) % 2 == 0 { 1.0 } else { -1.0 };
                    let core = if j % 8 == 0 {
                        offset + 0.5 * c as f64 * direction
                    } else if j % 8 == 4 {
                        offset + 0.8 * (c % 3) as f64 * direction
                    } else {
                        offset
                    };
                    scale * core
                })
                .collect()
        })
        .collect()
}

#[test]
#[ignore]
fn probe_alias() {
    let companies = 250;
    for epochs in [400usize, 1500, 3000] {
        let mut wins = [0usize; 3];
        for seed in 0..3u64 {
            let manifest = FeatureManifest::default_manifest();
            let scale = RatingScale::default_scale();
            let mut config = SynthConfig::default_config(manifest.len(), seed);
            config.companies = companies;
            config.incomplete_companies = 0;
            config.class_weights = vec![0.30, 0.10, 0.30, 0.15, 0.10, 0.05];
            config.prototypes = aliased_prototypes(&config);
            let output = synth::generate(&config).unwrap();
            let dataset = output.complete_dataset(&config, &manifest, &scale).unwrap();
            let split = preprocess::split(&dataset, 0.8, seed + 500).unwrap();
            let stats = preprocess::fit_normalizer(&split.train).unwrap();
            let train = LabeledMatrix::from_dataset(&split.train, &stats).unwrap();
            let test = LabeledMatrix::from_dataset(&split.test, &stats).unwrap();
            let c = dataset.class_map.num_classes();
            let balanced = preprocess::smote(&train, c, 5, seed + 900).unwrap();
            let mut rows = Vec::new();
            for head in [Head::Classification { classes: c }, Head::Regression] {
                let mlp_config = MlpConfig {
                    input_dim: 43,
                    hidden_layers: 3,
                    hidden_width: 50,
                    head,
                    activation: Activation::Relu,
                };
                let train_config = TrainConfig {
                    epochs,
                    seed: seed + 77,
                    eval_every: epochs,
                    ..TrainConfig::default()
                };
                let (mlp, _) = trainer::train(&mlp_config, &train_config, &balanced, None).unwrap();
                let r = evaluate::eval_report(&mlp, test.features.view(), &test.targets, c).unwrap();
                rows.push((r.accuracy, r.rms, r.mean_notch_distance));
            }
            let (c0, r0) = (rows[0], rows[1]);
            println!(
                "epochs {epochs} seed {seed}: cls {:.3}/{:.3}/{:.3} | reg {:.3}/{:.3}/{:.3}",
                c0.0, c0.1, c0.2, r0.0, r0.1, r0.2
            );
            if c0.0 >= r0.0 { wins[0] += 1; }
            if r0.1 <= c0.1 { wins[1] += 1; }
            if r0.2 <= c0.2 { wins[2] += 1; }
        }
        println!("epochs {epochs} wins: acc {} rms {} notch {}", wins[0], wins[1], wins[2]);
    }
}
