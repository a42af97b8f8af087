use ratingnet::evaluate;
use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, MlpConfig};
use ratingnet::preprocess::{self, LabeledMatrix};
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::{self, SynthConfig};
use ratingnet::trainer::{self, TrainConfig};

fn heads_case(companies: usize, noise: f64, epochs: usize, seed: u64) -> (f64, f64, f64, f64, f64, f64) {
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
    let mut out = Vec::new();
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
        out.push((r.accuracy, r.rms, r.mean_notch_distance));
    }
    (out[0].0, out[0].1, out[0].2, out[1].0, out[1].1, out[1].2)
}

#[test]
#[ignore]
fn probe_heads_grid() {
    for &(noise, epochs) in &[(1.5f64, 3000usize), (2.0, 3000)] {
        let mut wins = [0usize; 3];
        for seed in 0..3u64 {
            let (ca, cr, cn, ra, rr, rn) = heads_case(120, noise, epochs, seed);
            println!("noise {noise} epochs {epochs} seed {seed}: cls {ca:.3}/{cr:.3}/{cn:.3} reg {ra:.3}/{rr:.3}/{rn:.3}");
            if ca >= ra { wins[0] += 1; }
            if rr <= cr { wins[1] += 1; }
            if rn <= cn { wins[2] += 1; }
        }
        println!("noise {noise} epochs {epochs} wins: acc {} rms {} notch {}", wins[0], wins[1], wins[2]);
    }
}
