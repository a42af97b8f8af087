use ratingnet::evaluate;
use ratingnet::ingest::FeatureManifest;
use ratingnet::mlp::{Activation, Head, MlpConfig};
use ratingnet::preprocess::{self, LabeledMatrix};
use ratingnet::rating_scale::RatingScale;
use ratingnet::synth::{self, SynthConfig};
use ratingnet::trainer::{self, TrainConfig};
use ratingnet::optimizer::OptimizerKind;

#[test]
#[ignore]
fn probe_one() {
    let manifest = FeatureManifest::default_manifest();
    let scale = RatingScale::default_scale();
    let mut config = SynthConfig::default_config(manifest.len(), 0);
    config.companies = 60;
    config.incomplete_companies = 0;
    config.scale_noise(0.25);
    let output = synth::generate(&config).unwrap();
    let dataset = output.complete_dataset(&config, &manifest, &scale).unwrap();
    println!("class counts: {:?}", dataset.class_counts());
    let split = preprocess::split(&dataset, 0.8, 500).unwrap();
    let stats = preprocess::fit_normalizer(&split.train).unwrap();
    let train = LabeledMatrix::from_dataset(&split.train, &stats).unwrap();
    let test = LabeledMatrix::from_dataset(&split.test, &stats).unwrap();
    let c = dataset.class_map.num_classes();
    println!("train counts: {:?}", train.class_counts(c).unwrap());
    println!("test counts: {:?}", test.class_counts(c).unwrap());
    let balanced = preprocess::smote(&train, c, 5, 900).unwrap();

    for lr in [1e-3, 3e-3] {
        let mlp_config = MlpConfig {
            input_dim: 43,
            hidden_layers: 3,
            hidden_width: 50,
            head: Head::Classification { classes: c },
            activation: Activation::Relu,
        };
        let train_config = TrainConfig {
            epochs: 3000,
            seed: 77,
            eval_every: 500,
            optimizer: OptimizerKind::adam(lr),
        };
        let (mlp, history) = trainer::train(&mlp_config, &train_config, &balanced, Some(&test)).unwrap();
        println!("lr {lr}:");
        for s in &history.snapshots {
            println!("  epoch {:>5} loss {:.5} train_acc {:.4} test_acc {:.4}", s.epoch, s.train_loss, s.train_metric, s.test_metric.unwrap());
        }
        let report = evaluate::eval_report(&mlp, test.features.view(), &test.targets, c).unwrap();
        println!("  final test acc {:.4} rms {:.4}", report.accuracy, report.rms);
        println!("  confusion: {:?}", report.confusion);
    }
}
