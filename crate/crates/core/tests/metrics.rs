//! Metrics against independent oracles.

use qnoisegen::metrics::{distribution_distance_1d, magnetization, mean_squared_pauli};
use qnoisegen::statevec::{hadamard, Pauli};
use qnoisegen::transport::{exact_assignment, CostMatrix};
use qnoisegen::{PureEnsemble, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn distance_1d_equals_assignment_lp() {
    // With equal sizes the 1-D transport LP has a permutation optimum.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..3 {
        let a: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
        let entries = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).abs())).collect();
        let lp = exact_assignment(&CostMatrix::new(100, 100, entries).unwrap()).unwrap().value;
        let got = distribution_distance_1d(&a, &b).unwrap();
        assert!((got - lp).abs() < 1e-9, "{got} vs {lp}");
    }
}

/// `∫ |F_a − F_b|` by evaluating both step CDFs between consecutive breakpoints.
fn cdf_integral(a: &[f64], b: &[f64]) -> f64 {
    let mut pts: Vec<f64> = a.iter().chain(b).cloned().collect();
    pts.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], t: f64| s.iter().filter(|v| **v <= t).count() as f64 / s.len() as f64;
    pts.windows(2).map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0])).sum()
}

#[test]
fn distance_1d_unequal_sizes_matches_cdf_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (na, nb) in [(7, 13), (50, 3), (1, 20)] {
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..3.0)).collect();
        let got = distribution_distance_1d(&a, &b).unwrap();
        let oracle = cdf_integral(&a, &b);
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }
}

#[test]
fn metric_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states: Vec<StateVector> = (0..50)
        .map(|_| {
            let amps: Vec<qnoisegen::C64> = (0..8)
                .map(|_| qnoisegen::C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            StateVector::from_amplitudes(amps.into_iter().map(|a| a / n).collect()).unwrap()
        })
        .collect();
    let m = magnetization(&PureEnsemble::new(states).unwrap()).unwrap();
    assert!(m.details.unwrap().iter().all(|v| (-1.0..=1.0).contains(v)));

    let single: Vec<StateVector> = (0..20)
        .map(|_| {
            let mut s = qnoisegen::statevec::zero_state(1).unwrap();
            s.apply_single_qubit(0, &hadamard()).unwrap();
            s.apply_single_qubit(0, &qnoisegen::statevec::rz(rng.random_range(0.0..6.3))).unwrap();
            s
        })
        .collect();
    let single = PureEnsemble::new(single).unwrap();
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        let v = mean_squared_pauli(&single, p).unwrap().value;
        assert!((0.0..=1.0).contains(&v));
    }
    // Equator states have ⟨Z⟩ = 0.
    assert!(mean_squared_pauli(&single, Pauli::Z).unwrap().value < 1e-28);
}
