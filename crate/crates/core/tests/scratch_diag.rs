use topoweight::data::synthetic_digits;
use topoweight::model::Activation;
use topoweight::train::{accuracy, train_mlp, TrainConfig};
use topoweight::shift::{run_detection_experiment, CorruptionKind, ExperimentConfig, Method};

#[test]
fn noise_sweep() {
    for noise in [0.2f64, 0.25, 0.3] {
        let train_data = synthetic_digits(300, noise, 7001);
        let detect_data = synthetic_digits(250, noise, 7002);
        let mut cfg = TrainConfig::new(vec![32], Activation::Tanh, 10, 7003);
        cfg.quarter_epoch_checkpoints = false;
        let outcome = train_mlp(&train_data, &cfg).unwrap();
        let net = outcome.checkpoints.last().unwrap().network.clone();
        let acc = accuracy(&net, &train_data).unwrap();
        let held = accuracy(&net, &detect_data).unwrap();
        let mut line = format!("noise {noise}: train {acc:.3} heldout {held:.3} |");
        for method in Method::ALL {
            let mut exp = ExperimentConfig::new(method, CorruptionKind::GaussianNoise, (8, 8), 7004);
            exp.intensity_levels = vec![1];
            exp.corrupted_ratios = vec![0.0];
            exp.sample_sizes = vec![50];
            exp.trials = 200;
            let rows = run_detection_experiment(&net, &detect_data, &exp).unwrap();
            line.push_str(&format!(" {}={:.3}", method.name(), rows[0].detection_ratio));
        }
        // DGP ratios over n at max intensity, fully corrupted.
        let mut exp = ExperimentConfig::new(Method::Dgp, CorruptionKind::GaussianNoise, (8, 8), 7005);
        exp.intensity_levels = vec![6];
        exp.corrupted_ratios = vec![1.0];
        exp.sample_sizes = vec![10, 50, 200];
        exp.trials = 100;
        let rows = run_detection_experiment(&net, &detect_data, &exp).unwrap();
        let ratios: Vec<f64> = rows.iter().map(|r| r.detection_ratio).collect();
        line.push_str(&format!(" | dgp ratios {ratios:?}"));
        println!("{line}");
    }
}
