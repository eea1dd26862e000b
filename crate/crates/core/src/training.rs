//! Adam and the training loops.
//!
//! Every loop draws its initial angles, its per-epoch noise and its
//! evaluation noise from separate seeded streams (see [`crate::rng`]), so a
//! run is fully determined by its configuration and seed.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datasets::{NoiseKind, NoiseSampler};
use crate::ensemble::PureEnsemble;
use crate::error::{validation, Error, Result};
use crate::generator::{generate_ensemble, GeneratorConfig, ThetaTensor};
use crate::gradients::{entropy_loss_gradient, evaluate_ensemble_loss, generated_entropies, GradientTensor};
use crate::metrics::{magnetization, mean_squared_pauli, EntropyTargetResult};
use crate::rng::{stream_rng, stream_rng_indexed, Stream};
use crate::statevec::Pauli;
use crate::transport::SinkhornConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_hat: f64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps_hat: 1e-8,
        }
    }

    pub fn from_config(len: usize, config: &TrainConfig) -> Self {
        Self {
            beta1: config.beta1,
            beta2: config.beta2,
            eps_hat: config.adam_eps,
            ..Self::new(len, config.lr)
        }
    }
}

/// One bias-corrected Adam update of `theta` in place.
pub fn adam_step(state: &mut AdamState, theta: &mut ThetaTensor, grad: &GradientTensor) -> Result<()> {
    if !grad.matches(theta) || state.m.len() != theta.len() || state.v.len() != theta.len() {
        return Err(validation("Adam state, theta and gradient shapes differ"));
    }
    if let Some(k) = grad.as_slice().iter().position(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite gradient entry {k} at Adam step {}",
            state.t + 1
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for (((p, g), m), v) in theta
        .as_mut_slice()
        .iter_mut()
        .zip(grad.as_slice())
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps_hat);
    }
    Ok(())
}

/// Per-epoch diagnostic computed on the generated batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxMetric {
    /// `⟨Y⟩²` of single-qubit states.
    MeanSquaredY,
    /// `⟨Z⟩²` of single-qubit states.
    MeanSquaredZ,
    /// Mean of `(1/N) Σ ⟨X_n⟩`.
    Magnetization,
    #[default]
    None,
}

impl AuxMetric {
    pub fn evaluate(self, ensemble: &PureEnsemble) -> Result<f64> {
        match self {
            AuxMetric::MeanSquaredY => Ok(mean_squared_pauli(ensemble, Pauli::Y)?.value),
            AuxMetric::MeanSquaredZ => Ok(mean_squared_pauli(ensemble, Pauli::Z)?.value),
            AuxMetric::Magnetization => Ok(magnetization(ensemble)?.value),
            AuxMetric::None => Ok(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Initial angles are drawn from `U[−init_scale, init_scale)`.
    pub init_scale: f64,
    /// Generated samples per epoch; `None` uses the training-set size (or
    /// [`DEFAULT_ENTROPY_BATCH`] for the entropy task).
    pub batch_generated: Option<usize>,
    pub sinkhorn: SinkhornConfig,
    pub noise: NoiseKind,
    pub aux: AuxMetric,
    /// Noise samples used to evaluate each entropy target after training.
    pub eval_count: usize,
    pub divergence_factor: f64,
    pub divergence_window: usize,
}

pub const DEFAULT_ENTROPY_BATCH: usize = 16;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            lr: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            init_scale: std::f64::consts::PI,
            batch_generated: None,
            sinkhorn: SinkhornConfig::default(),
            noise: NoiseKind::Uniform { lo: -0.1, hi: 0.1 },
            aux: AuxMetric::None,
            eval_count: 100,
            divergence_factor: 10.0,
            divergence_window: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config(format!("init_scale must be positive, got {}", self.init_scale)));
        }
        if self.batch_generated == Some(0) {
            return Err(Error::Config("batch_generated must be at least 1".into()));
        }
        if self.eval_count == 0 {
            return Err(Error::Config("eval_count must be at least 1".into()));
        }
        if !(self.divergence_factor >= 1.0 && self.divergence_factor.is_finite()) {
            return Err(Error::Config(format!(
                "divergence_factor must be finite and at least 1, got {}",
                self.divergence_factor
            )));
        }
        self.sinkhorn.validate()?;
        self.noise.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub aux_metric: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub theta: ThetaTensor,
    pub log: Vec<EpochRecord>,
}

/// Aborts when the loss stays above `factor ×` its first value for `window`
/// consecutive epochs. A first loss of (numerically) zero disables the guard.
struct DivergenceGuard {
    factor: f64,
    window: usize,
    first: Option<f64>,
    streak: usize,
}

impl DivergenceGuard {
    fn new(config: &TrainConfig) -> Self {
        Self {
            factor: config.divergence_factor,
            window: config.divergence_window,
            first: None,
            streak: 0,
        }
    }

    fn observe(&mut self, epoch: usize, loss: f64) -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                reason: format!("loss is {loss}"),
            });
        }
        let first = *self.first.get_or_insert(loss);
        if first <= 1e-12 || self.window == 0 {
            return Ok(());
        }
        if loss > self.factor * first {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        if self.streak >= self.window {
            return Err(Error::Diverged {
                epoch,
                reason: format!(
                    "loss above {}× its initial value {first:e} for {} epochs",
                    self.factor, self.window
                ),
            });
        }
        Ok(())
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Matches the generator output to `train_set` under the transport loss.
pub fn train_ensemble(
    config: &GeneratorConfig,
    train_set: &PureEnsemble,
    train_config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_ensemble_observed(config, train_set, train_config, |_| {})
}

/// [`train_ensemble`] with a callback invoked after every epoch.
pub fn train_ensemble_observed<F: FnMut(&EpochRecord)>(
    config: &GeneratorConfig,
    train_set: &PureEnsemble,
    train_config: &TrainConfig,
    mut observer: F,
) -> Result<TrainOutcome> {
    config.validate()?;
    train_config.validate()?;
    if train_set.n_qubits() != config.n_qubits {
        return Err(validation(format!(
            "training states have {} qubits, generator {}",
            train_set.n_qubits(),
            config.n_qubits
        )));
    }
    let seed = train_config.seed;
    let mut theta = ThetaTensor::random_within(config, train_config.init_scale, &mut stream_rng(seed, Stream::Init));
    let mut sampler = NoiseSampler::new(train_config.noise, stream_rng(seed, Stream::TrainNoise))?;
    let batch = train_config.batch_generated.unwrap_or(train_set.len());
    let mut adam = AdamState::from_config(theta.len(), train_config);
    let mut guard = DivergenceGuard::new(train_config);
    let mut warm: Option<Vec<f64>> = None;
    let mut log = Vec::with_capacity(train_config.epochs);
    let start = Instant::now();
    for epoch in 0..train_config.epochs {
        let noises = sampler.sample(batch, None)?;
        let eval = evaluate_ensemble_loss(
            config,
            &theta,
            &noises,
            train_set,
            &train_config.sinkhorn,
            warm.as_deref(),
        )?;
        assert_eq!(eval.generated.len(), batch, "one state per circuit execution");
        let record = EpochRecord {
            epoch,
            loss: eval.loss,
            aux_metric: train_config.aux.evaluate(&eval.generated)?,
            wall_ms: elapsed_ms(start),
        };
        observer(&record);
        log.push(record);
        guard.observe(epoch, eval.loss)?;
        adam_step(&mut adam, &mut theta, &eval.gradient)?;
        warm = Some(eval.plan.g);
    }
    Ok(TrainOutcome { theta, log })
}

/// One target category of conditional generation.
#[derive(Clone, Debug)]
pub struct Category {
    pub train_set: PureEnsemble,
    pub interval: (f64, f64),
    pub aux: AuxMetric,
}

/// Trains a single θ on two categories, each fed noise from its own interval.
/// The epoch loss is the sum of the two transport losses; the recorded aux
/// metric is the mean of the per-category ones.
pub fn train_conditional(
    config: &GeneratorConfig,
    categories: &[Category; 2],
    train_config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_conditional_observed(config, categories, train_config, |_| {})
}

pub fn train_conditional_observed<F: FnMut(&EpochRecord)>(
    config: &GeneratorConfig,
    categories: &[Category; 2],
    train_config: &TrainConfig,
    mut observer: F,
) -> Result<TrainOutcome> {
    config.validate()?;
    train_config.validate()?;
    let [(lo1, hi1), (lo2, hi2)] = [categories[0].interval, categories[1].interval];
    let kind = NoiseKind::TwoInterval { lo1, hi1, lo2, hi2 };
    kind.validate()?;
    for c in categories {
        if c.train_set.n_qubits() != config.n_qubits {
            return Err(validation("category states do not match the generator qubit count"));
        }
    }
    let seed = train_config.seed;
    let mut theta = ThetaTensor::random_within(config, train_config.init_scale, &mut stream_rng(seed, Stream::Init));
    let mut sampler = NoiseSampler::new(kind, stream_rng(seed, Stream::TrainNoise))?;
    let mut adam = AdamState::from_config(theta.len(), train_config);
    let mut guard = DivergenceGuard::new(train_config);
    let mut warm: [Option<Vec<f64>>; 2] = [None, None];
    let mut log = Vec::with_capacity(train_config.epochs);
    let start = Instant::now();
    for epoch in 0..train_config.epochs {
        let mut loss = 0.0;
        let mut aux = 0.0;
        let mut gradient = GradientTensor::like(&theta);
        for (k, cat) in categories.iter().enumerate() {
            let batch = train_config.batch_generated.unwrap_or(cat.train_set.len());
            let noises = sampler.sample(batch, Some(k + 1))?;
            let eval = evaluate_ensemble_loss(
                config,
                &theta,
                &noises,
                &cat.train_set,
                &train_config.sinkhorn,
                warm[k].as_deref(),
            )?;
            assert_eq!(eval.generated.len(), batch, "one state per circuit execution");
            loss += eval.loss;
            aux += cat.aux.evaluate(&eval.generated)? / 2.0;
            for (g, d) in gradient.as_mut_slice().iter_mut().zip(eval.gradient.as_slice()) {
                *g += d;
            }
            warm[k] = Some(eval.plan.g);
        }
        let record = EpochRecord {
            epoch,
            loss,
            aux_metric: aux,
            wall_ms: elapsed_ms(start),
        };
        observer(&record);
        log.push(record);
        guard.observe(epoch, loss)?;
        adam_step(&mut adam, &mut theta, &gradient)?;
    }
    Ok(TrainOutcome { theta, log })
}

/// Trained parameters and evaluation for one entropy target.
#[derive(Clone, Debug)]
pub struct EntropyRun {
    pub target: f64,
    pub theta: ThetaTensor,
    pub log: Vec<EpochRecord>,
    pub result: EntropyTargetResult,
}

/// Trains an independent θ for each target entropy of qubit 0 of a
/// two-qubit generator, then evaluates it on a fresh noise batch.
pub fn train_entropy_series(
    config: &GeneratorConfig,
    targets: &[f64],
    train_config: &TrainConfig,
) -> Result<Vec<EntropyRun>> {
    train_entropy_series_observed(config, targets, train_config, |_, _| {})
}

/// The observer receives the target index with every epoch record.
pub fn train_entropy_series_observed<F: FnMut(usize, &EpochRecord)>(
    config: &GeneratorConfig,
    targets: &[f64],
    train_config: &TrainConfig,
    mut observer: F,
) -> Result<Vec<EntropyRun>> {
    config.validate()?;
    train_config.validate()?;
    if config.n_qubits != 2 {
        return Err(validation(format!(
            "entropy series needs 2 qubits, got {}",
            config.n_qubits
        )));
    }
    if targets.is_empty() {
        return Err(validation("no entropy targets"));
    }
    if let Some(t) = targets.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(validation(format!("entropy target {t} outside [0, 1]")));
    }
    let batch = train_config.batch_generated.unwrap_or(DEFAULT_ENTROPY_BATCH);
    let seed = train_config.seed;
    let mut runs = Vec::with_capacity(targets.len());
    for (idx, &target) in targets.iter().enumerate() {
        let idx64 = idx as u64;
        let mut theta =
            ThetaTensor::random_within(config, train_config.init_scale, &mut stream_rng_indexed(seed, Stream::Init, idx64));
        let mut sampler = NoiseSampler::new(
            train_config.noise,
            stream_rng_indexed(seed, Stream::TrainNoise, idx64),
        )?;
        let mut adam = AdamState::from_config(theta.len(), train_config);
        let mut guard = DivergenceGuard::new(train_config);
        let mut log = Vec::with_capacity(train_config.epochs);
        let start = Instant::now();
        for epoch in 0..train_config.epochs {
            let noises = sampler.sample(batch, None)?;
            let lg = entropy_loss_gradient(config, &theta, &noises, target)?;
            let batch_s = generated_entropies(config, &theta, &noises)?;
            let record = EpochRecord {
                epoch,
                loss: lg.loss,
                aux_metric: batch_s.iter().map(|s| (s - target).abs()).sum::<f64>()
                    / batch_s.len() as f64,
                wall_ms: elapsed_ms(start),
            };
            observer(idx, &record);
            log.push(record);
            guard.observe(epoch, lg.loss)?;
                adam_step(&mut adam, &mut theta, &lg.gradient)?;
        }
        let result = evaluate_entropy_target(config, &theta, target, train_config, idx)?;
        runs.push(EntropyRun {
            target,
            theta,
            log,
            result,
        });
    }
    Ok(runs)
}

/// Entropies of `theta` on the evaluation noise batch of target `index`,
/// the same batch [`train_entropy_series`] reports.
pub fn evaluate_entropy_target(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    target: f64,
    train_config: &TrainConfig,
    index: usize,
) -> Result<EntropyTargetResult> {
    let mut sampler = NoiseSampler::new(
        train_config.noise,
        stream_rng_indexed(train_config.seed, Stream::EvalNoise, index as u64),
    )?;
    let noise = sampler.sample(train_config.eval_count, None)?;
    let achieved = generated_entropies(config, theta, &noise)?;
    Ok(EntropyTargetResult { target, achieved })
}

/// Generates `count` states from noise drawn by `sampler`; exactly `count`
/// circuit executions, none discarded.
pub fn generate_from_sampler(
    config: &GeneratorConfig,
    theta: &ThetaTensor,
    sampler: &mut NoiseSampler,
    count: usize,
    category: Option<usize>,
) -> Result<PureEnsemble> {
    let noises = sampler.sample(count, category)?;
    let out = generate_ensemble(config, theta, &noises)?;
    assert_eq!(out.len(), count, "one state per circuit execution");
    Ok(out)
}
