//! Evaluation metrics for generated ensembles.

use serde::Serialize;

use crate::ensemble::PureEnsemble;
use crate::error::{validation, Result};
use crate::statevec::{pauli_expectation, Pauli, PauliString};
use crate::transport::{wasserstein_distance, OverlapMode, SinkhornConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
    pub sample_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Vec<f64>>,
}

/// `(1/M)·Σ ⟨P_i⟩²` over a single-qubit ensemble, with the per-state
/// expectations kept as details.
pub fn mean_squared_pauli(ensemble: &PureEnsemble, pauli: Pauli) -> Result<MetricReport> {
    if ensemble.n_qubits() != 1 {
        return Err(validation(format!(
            "mean squared Pauli needs single-qubit states, got {}",
            ensemble.n_qubits()
        )));
    }
    let name = match pauli {
        Pauli::I => "mean_sq_i",
        Pauli::X => "mean_sq_x",
        Pauli::Y => "mean_sq_y",
        Pauli::Z => "mean_sq_z",
    };
    let op = PauliString::new(vec![pauli]);
    let values = ensemble
        .iter()
        .map(|s| pauli_expectation(s, &op))
        .collect::<Result<Vec<_>>>()?;
    let value = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    Ok(MetricReport {
        name: name.into(),
        value,
        sample_count: values.len(),
        details: Some(values),
    })
}

/// Transport distance between generated and test states with exact overlaps.
pub fn evaluate_generation(
    generated: &PureEnsemble,
    test: &PureEnsemble,
    sinkhorn_config: &SinkhornConfig,
) -> Result<MetricReport> {
    let value = wasserstein_distance(generated, test, sinkhorn_config, OverlapMode::Exact)?;
    Ok(MetricReport {
        name: "wasserstein".into(),
        value,
        sample_count: generated.len(),
        details: Some(vec![generated.len() as f64, test.len() as f64]),
    })
}

/// Per-state `(1/N)·Σ_n ⟨X_n⟩`; the report value is the ensemble mean.
pub fn magnetization(ensemble: &PureEnsemble) -> Result<MetricReport> {
    let n = ensemble.n_qubits();
    let ops: Vec<PauliString> = (0..n).map(|k| PauliString::single(n, k, Pauli::X)).collect();
    let values = ensemble
        .iter()
        .map(|s| {
            ops.iter()
                .map(|op| pauli_expectation(s, op))
                .sum::<Result<f64>>()
                .map(|t| t / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let value = values.iter().sum::<f64>() / values.len() as f64;
    Ok(MetricReport {
        name: "magnetization".into(),
        value,
        sample_count: values.len(),
        details: Some(values),
    })
}

/// Empirical 1-Wasserstein distance between two samples on the line,
/// `∫ |F_a(t) − F_b(t)| dt`. For equal sizes this is the mean absolute
/// difference of the sorted samples.
pub fn distribution_distance_1d(values_a: &[f64], values_b: &[f64]) -> Result<f64> {
    if values_a.is_empty() || values_b.is_empty() {
        return Err(validation("distribution distance needs nonempty samples"));
    }
    if values_a.iter().chain(values_b).any(|v| !v.is_finite()) {
        return Err(validation("distribution samples must be finite"));
    }
    let mut a = values_a.to_vec();
    let mut b = values_b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }
    // Merge-walk the two step CDFs.
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = a[0].min(b[0]);
    let mut dist = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        dist += (i as f64 / na - j as f64 / nb).abs() * (next - prev);
        while i < a.len() && a[i] <= next {
            i += 1;
        }
        while j < b.len() && b[j] <= next {
            j += 1;
        }
        prev = next;
    }
    Ok(dist)
}

/// Outcome of training towards one entropy target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyTargetResult {
    pub target: f64,
    /// Entropies of the evaluation batch.
    pub achieved: Vec<f64>,
}

impl EntropyTargetResult {
    pub fn mean_entropy(&self) -> f64 {
        self.achieved.iter().sum::<f64>() / self.achieved.len() as f64
    }

    pub fn mean_deviation(&self) -> f64 {
        self.achieved.iter().map(|s| (s - self.target).abs()).sum::<f64>()
            / self.achieved.len() as f64
    }

    pub fn max_deviation(&self) -> f64 {
        self.achieved
            .iter()
            .map(|s| (s - self.target).abs())
            .fold(0.0, f64::max)
    }
}

/// One report per target: value is the mean achieved entropy, details are
/// `[target, mean |S − target|, max |S − target|]`.
pub fn entropy_series_report(results: &[EntropyTargetResult]) -> Result<Vec<MetricReport>> {
    if results.is_empty() {
        return Err(validation("entropy series is empty"));
    }
    results
        .iter()
        .map(|r| {
            if r.achieved.is_empty() {
                return Err(validation(format!("no evaluations for target {}", r.target)));
            }
            Ok(MetricReport {
                name: format!("entropy_target_{:.2}", r.target),
                value: r.mean_entropy(),
                sample_count: r.achieved.len(),
                details: Some(vec![r.target, r.mean_deviation(), r.max_deviation()]),
            })
        })
        .collect()
}
