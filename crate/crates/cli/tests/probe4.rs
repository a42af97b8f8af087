use ratingnet::evaluate;
use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, MlpConfig};
use ratingnet::preprocess::{self, LabeledMatrix};
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::{self, SynthConfig};
use ratingnet::trainer::{self, TrainConfig};

/// Every feature carries the class signal: one gap unit per class step.
fn dense_prototypes(config: &SynthConfig) -> Vec<Vec<f64>> {
    let f = config.feature_dim();
    (0..config.num_classes())
        .map(|c| {
            (0..f)
                .map(|j| {
                    let scale = config.noise_std[j];
                    let direction = if j % 2 == 0 { 1.0 } else { -1.0 };
                    scale * (1.5 + 0.35 * (j % 5) as f64 + 0.8 * c as f64 * direction)
                })
                .collect()
        })
        .collect()
}

fn run_case(companies: usize, noise: f64, seed: u64) -> f64 {
    let manifest = FeatureManifest::default_manifest();
    let scale = RatingScale::default_scale();
    let mut config = SynthConfig::default_config(manifest.len(), seed);
    config.companies = companies;
    config.incomplete_companies = 0;
    config.class_weights = vec![0.30, 0.10, 0.30, 0.15, 0.10, 0.05];
    config.prototypes = dense_prototypes(&config);
    config.scale_noise(noise);
    let output = synth::generate(&config).unwrap();
    let dataset = output.complete_dataset(&config, &manifest, &scale).unwrap();
    let split = preprocess::split(&dataset, 0.8, seed + 500).unwrap();
    let stats = preprocess::fit_normalizer(&split.train).unwrap();
    let train = LabeledMatrix::from_dataset(&split.train, &stats).unwrap();
    let test = LabeledMatrix::from_dataset(&split.test, &stats).unwrap();
    let c = dataset.class_map.num_classes();
    let balanced = preprocess::smote(&train, c, 5, seed + 900).unwrap();
    let mlp_config = MlpConfig {
        input_dim: 43,
        hidden_layers: 3,
        hidden_width: 50,
        head: Head::Classification { classes: c },
        activation: Activation::Relu,
    };
    let train_config = TrainConfig {
        epochs: 3000,
        seed: seed + 77,
        eval_every: 1000,
        ..TrainConfig::default()
    };
    let (mlp, _) = trainer::train(&mlp_config, &train_config, &balanced, None).unwrap();
    evaluate::eval_report(&mlp, test.features.view(), &test.targets, c)
        .unwrap()
        .accuracy
}

#[test]
#[ignore]
fn probe_dense() {
    for seed in 0..5u64 {
        let start = std::time::Instant::now();
        let acc = run_case(150, 0.25, seed);
        println!(
            "dense companies=150 noise=0.25: seed {seed} acc {acc:.4} ({:.0}s)",
            start.elapsed().as_secs_f64()
        );
    }
}
