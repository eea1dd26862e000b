//! End-to-end training behavior on small problems.

use qnoisegen::datasets::{ring_y_ensemble, ring_z_ensemble, ring_y_state};
use qnoisegen::rng::{stream_rng, Stream};
use qnoisegen::training::{
    train_conditional, train_ensemble, train_entropy_series, AuxMetric, Category, TrainConfig,
};
use qnoisegen::{GeneratorConfig, PureEnsemble, ThetaTensor};

fn quick(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn single_target_collapses() {
    let target = PureEnsemble::new(vec![ring_y_state(1.1)]).unwrap();
    let cfg = GeneratorConfig::new(1, 4);
    let tc = TrainConfig {
        batch_generated: Some(8),
        ..quick(200, 3)
    };
    let out = train_ensemble(&cfg, &target, &tc).unwrap();
    assert_eq!(out.log.len(), 200);
    let last = out.log.last().unwrap().loss;
    assert!(last < 0.05, "final loss {last}");
}

#[test]
fn zero_epochs_returns_initial_parameters() {
    let data = ring_y_ensemble(10, 0).unwrap();
    let cfg = GeneratorConfig::new(1, 3);
    let out = train_ensemble(&cfg, &data, &quick(0, 4)).unwrap();
    assert!(out.log.is_empty());
    assert_eq!(out.theta, ThetaTensor::random(&cfg, &mut stream_rng(4, Stream::Init)));
}

#[test]
fn training_is_deterministic() {
    let data = ring_y_ensemble(20, 1).unwrap();
    let cfg = GeneratorConfig::new(1, 4);
    let a = train_ensemble(&cfg, &data, &quick(15, 9)).unwrap();
    let b = train_ensemble(&cfg, &data, &quick(15, 9)).unwrap();
    assert_eq!(a.theta, b.theta);
    let losses = |o: &qnoisegen::training::TrainOutcome| o.log.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>();
    assert_eq!(losses(&a), losses(&b));
    let c = train_ensemble(&cfg, &data, &quick(15, 10)).unwrap();
    assert_ne!(a.theta, c.theta);
}

#[test]
fn ring_loss_decreases() {
    let data = ring_y_ensemble(50, 2).unwrap();
    let cfg = GeneratorConfig::new(1, 8);
    let tc = TrainConfig {
        aux: AuxMetric::MeanSquaredY,
        ..quick(200, 2)
    };
    let out = train_ensemble(&cfg, &data, &tc).unwrap();
    let mean = |r: &[qnoisegen::training::EpochRecord]| r.iter().map(|e| e.loss).sum::<f64>() / r.len() as f64;
    assert!(mean(&out.log[150..]) < mean(&out.log[..50]));
}

#[test]
fn conditional_loss_decreases_for_both_categories() {
    let cfg = GeneratorConfig::new(1, 40);
    let cats = [
        Category { train_set: ring_y_ensemble(30, 5).unwrap(), interval: (-0.1, -0.05), aux: AuxMetric::MeanSquaredY },
        Category { train_set: ring_z_ensemble(30, 5).unwrap(), interval: (0.05, 0.1), aux: AuxMetric::MeanSquaredZ },
    ];
    let out = train_conditional(&cfg, &cats, &quick(200, 5)).unwrap();
    let mean = |r: &[qnoisegen::training::EpochRecord]| r.iter().map(|e| e.loss).sum::<f64>() / r.len() as f64;

    assert!(mean(&out.log[150..]) < 0.8 * mean(&out.log[..20]), "{} vs {}", mean(&out.log[150..]), mean(&out.log[..20]));
    let again = train_conditional(&cfg, &cats, &quick(200, 5)).unwrap();
    assert_eq!(out.theta, again.theta);
}

#[test]
fn overlapping_intervals_are_rejected() {
    let cfg = GeneratorConfig::new(1, 2);
    let a = ring_y_ensemble(5, 0).unwrap();
    let b = ring_z_ensemble(5, 0).unwrap();
    let cats = [
        Category { train_set: a, interval: (-0.1, 0.02), aux: AuxMetric::None },
        Category { train_set: b, interval: (0.0, 0.1), aux: AuxMetric::None },
    ];
    assert!(train_conditional(&cfg, &cats, &quick(1, 0)).is_err());
}

#[test]
fn entropy_endpoints_are_reached() {
    let cfg = GeneratorConfig::new(2, 4);
    let runs = train_entropy_series(&cfg, &[0.0, 1.0], &quick(400, 1)).unwrap();
    assert!(runs[0].result.mean_deviation() < 0.01, "{}", runs[0].result.mean_deviation());
    assert!(runs[1].result.mean_deviation() < 0.02, "{}", runs[1].result.mean_deviation());
    assert!(train_entropy_series(&cfg, &[1.2], &quick(1, 1)).is_err());
    assert!(train_entropy_series(&GeneratorConfig::new(3, 1), &[0.5], &quick(1, 1)).is_err());
}
