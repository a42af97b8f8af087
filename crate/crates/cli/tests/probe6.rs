use ratingnet::evaluate;
use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, MlpConfig};
use ratingnet::preprocess::{self, LabeledMatrix};
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::{self, SynthConfig};
use ratingnet::trainer::{self, TrainConfig};

#[test]
#[ignore]
fn probe_heads_diag() {
    let companies = 250;
    let noise = 1.2;
    for epochs in [300usize, 600, 1000] {
    let mut wins = [0usize; 3];
    for seed in 0..3u64 {
        let manifest = FeatureManifest::default_manifest();
        let scale = RatingScale::default_scale();
        let mut config = SynthConfig::default_config(manifest.len(), seed);
        config.companies = companies;
        config.incomplete_companies = 0;
        config.class_weights = vec![0.30, 0.10, 0.30, 0.15, 0.10, 0.05];
        config.scale_noise(noise);
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
            let (mlp, hist) = trainer::train(&mlp_config, &train_config, &balanced, None).unwrap();
            let r = evaluate::eval_report(&mlp, test.features.view(), &test.targets, c).unwrap();
            let last = hist.snapshots.last().unwrap();
            rows.push((r.accuracy, r.rms, r.mean_notch_distance, last.train_loss, last.train_metric));
        }
        let (c0, r0) = (rows[0], rows[1]);
        println!(
            "seed {seed}: cls test {:.3}/{:.3}/{:.3} (train loss {:.4} metric {:.3}) | reg test {:.3}/{:.3}/{:.3} (train loss {:.4} metric {:.3})",
            c0.0, c0.1, c0.2, c0.3, c0.4, r0.0, r0.1, r0.2, r0.3, r0.4
        );
        if c0.0 >= r0.0 { wins[0] += 1; }
        if r0.1 <= c0.1 { wins[1] += 1; }
        if r0.2 <= c0.2 { wins[2] += 1; }
    }
    println!("epochs {epochs} wins: acc {} rms {} notch {}", wins[0], wins[1], wins[2]);
    }
}
