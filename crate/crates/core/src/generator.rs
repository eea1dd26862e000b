//! The noise-reuploading generator circuit.
//!
//! Starting from |0…0⟩, each of the `P` repetitions applies, on every qubit
//! `n`, the encoding gate `R(x, x, x)` followed by the trainable gate
//! `R(θ_{p,n})`, and then the entangling layer when the circuit has more than
//! one qubit. The same noise value `x` is reuploaded in every repetition.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::PureEnsemble;
use crate::error::{validation, Error, Result};
use crate::statevec::{
    apply_entangler, apply_mat2, euler_gate, mat_mul, EntanglerTopology, EulerAngles, Mat2, StateVector,
    C64, MAX_QUBITS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_qubits: usize,
    pub reps: usize,
    #[serde(default)]
    pub entangler: EntanglerTopology,
    /// Ignored (treated as false) for single-qubit circuits.
    #[serde(default = "default_true")]
    pub use_entangler: bool,
}

fn default_true() -> bool {
    true
}

impl GeneratorConfig {
    pub fn new(n_qubits: usize, reps: usize) -> Self {
        Self {
            n_qubits,
            reps,
            entangler: EntanglerTopology::LinearCz,
            use_entangler: n_qubits >= 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn entangles(&self) -> bool {
        self.use_entangler && self.n_qubits >= 2
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self)
    }
}

/// `3·P·N`.
pub fn parameter_count(config: &GeneratorConfig) -> usize {
    3 * config.reps * config.n_qubits
}

/// Trainable angles `θ_{p,n,k}` stored flat in `(p, n, k)` row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTensor {
    reps: usize,
    n_qubits: usize,
    angles: Vec<f64>,
}

impl ThetaTensor {
    pub fn zeros(reps: usize, n_qubits: usize) -> Self {
        Self {
            reps,
            n_qubits,
            angles: vec![0.0; 3 * reps * n_qubits],
        }
    }

    pub fn from_vec(reps: usize, n_qubits: usize, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != 3 * reps * n_qubits {
            return Err(validation(format!(
                "{} angles do not fit shape {reps}×{n_qubits}×3",
                angles.len()
            )));
        }
        if let Some(i) = angles.iter().position(|a| !a.is_finite()) {
            return Err(validation(format!("angle {i} is not finite")));
        }
        Ok(Self {
            reps,
            n_qubits,
            angles,
        })
    }

    /// Independent draws from `U[−π, π)`.
    pub fn random<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Self {
        Self::random_within(config, PI, rng)
    }

    /// Independent draws from `U[−half_width, half_width)`.
    pub fn random_within<R: Rng + ?Sized>(config: &GeneratorConfig, half_width: f64, rng: &mut R) -> Self {
        let angles = (0..parameter_count(config))
            .map(|_| rng.random_range(-half_width..half_width))
            .collect();
        Self {
            reps: config.reps,
            n_qubits: config.n_qubits,
            angles,
        }
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn index(&self, rep: usize, qubit: usize, k: usize) -> usize {
        (rep * self.n_qubits + qubit) * 3 + k
    }

    pub fn euler(&self, rep: usize, qubit: usize) -> EulerAngles {
        let i = self.index(rep, qubit, 0);
        EulerAngles::new(self.angles[i], self.angles[i + 1], self.angles[i + 2])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.angles
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn check_matches(&self, config: &GeneratorConfig) -> Result<()> {
        if self.reps != config.reps || self.n_qubits != config.n_qubits {
            return Err(validation(format!(
                "theta shape {}×{}×3 does not match generator {}×{}×3",
                self.reps, self.n_qubits, config.reps, config.n_qubits
            )));
        }
        Ok(())
    }
}

/// One draw of the scalar classical noise fed to the circuit.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseSample(pub f64);

impl NoiseSample {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(validation(format!("noise sample {x} is not finite")));
        }
        Ok(Self(x))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub(crate) fn encoding_gate(x: f64) -> Mat2 {
    euler_gate(EulerAngles::uniform(x))
}

/// Runs the circuit on |0…0⟩ and returns the raw amplitudes.
pub(crate) fn run_circuit(config: &GeneratorConfig, theta: &ThetaTensor, x: f64) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); 1 << config.n_qubits];
    amps[0] = C64::new(1.0, 0.0);
    let enc = encoding_gate(x);
    for p in 0..config.reps {
        for n in 0..config.n_qubits {
            apply_mat2(&mut amps, n, &mat_mul(&euler_gate(theta.euler(p, n)), &enc));
        }
        if config.entangles() {
            apply_entangler(&mut amps, config.n_qubits, config.entangler);
        }
    }
    amps
}

fn check_inputs(config: &GeneratorConfig, theta: &ThetaTensor) -> Result<()> {
    config.validate()?;
    theta.check_matches(config)
}

pub fn generate_state(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noise: NoiseSample,
) -> Result<StateVector> {
    check_inputs(config, theta)?;
    let x = NoiseSample::new(noise.0)?.0;
    Ok(StateVector::from_raw(
        config.n_qubits,
        run_circuit(config, theta, x),
    ))
}

/// One circuit execution per noise sample, output in input order.
pub fn generate_ensemble(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    noises: &[NoiseSample],
) -> Result<PureEnsemble> {
    if noises.is_empty() {
        return Err(validation("noise list is empty"));
    }
    check_inputs(config, theta)?;
    if let Some(bad) = noises.iter().find(|x| !x.0.is_finite()) {
        return Err(validation(format!("noise sample {} is not finite", bad.0)));
    }
    let states: Vec<StateVector> = noises
        .par_iter()
        .map(|x| StateVector::from_raw(config.n_qubits, run_circuit(config, theta, x.0)))
        .collect();
    debug_assert_eq!(states.len(), noises.len());
    PureEnsemble::new(states)
}
