//! Experiment configuration files.
//!
//! A config file is a JSON object. Every key is optional except `task`; the
//! file is merged over the defaults of that task, so a minimal file is
//! `{"task": "ring_y"}`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qnoisegen::datasets::NoiseKind;
use qnoisegen::training::{AuxMetric, TrainConfig};
use qnoisegen::{GeneratorConfig, SinkhornConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "ring_y")]
    RingY,
    #[serde(rename = "ring_conditional")]
    RingConditional,
    #[serde(rename = "tfim")]
    Tfim,
    #[serde(rename = "entropy_series")]
    EntropySeries,
    #[serde(rename = "sweep_P")]
    SweepP,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::RingY,
        Task::RingConditional,
        Task::Tfim,
        Task::EntropySeries,
        Task::SweepP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::RingY => "ring_y",
            Task::RingConditional => "ring_conditional",
            Task::Tfim => "tfim",
            Task::EntropySeries => "entropy_series",
            Task::SweepP => "sweep_P",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<_> = Task::ALL.iter().map(|t| t.name()).collect();
            CliError::Usage(format!("unknown task {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// States drawn per category; the first `train_count` train, the rest test.
    pub count: usize,
    pub train_count: usize,
    pub n_sites: usize,
    pub g_lo: f64,
    pub g_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub count: usize,
    pub category: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub p_values: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub targets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckConfig {
    pub h: f64,
    /// Relative tolerance for finite differences.
    pub tolerance: f64,
    /// Relative tolerance for adjoint against parameter shift.
    pub shift_tolerance: f64,
    /// Entropic regularization of the transport instances.
    pub epsilon: f64,
    /// Flips the sign of every analytic gradient; the check must then fail.
    pub inject_wrong_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub generator: GeneratorConfig,
    pub train: TrainConfig,
    /// Aux metric of the second conditional category.
    pub aux_second: AuxMetric,
    pub data: DataConfig,
    pub generate: GenerateConfig,
    pub sweep: SweepConfig,
    pub entropy: EntropyConfig,
    pub gradcheck: GradcheckConfig,
}

pub const RING_NOISE: NoiseKind = NoiseKind::Uniform { lo: -0.1, hi: 0.1 };
pub const TFIM_NOISE: NoiseKind = NoiseKind::Uniform { lo: -0.01, hi: 0.01 };
pub const CONDITIONAL_NOISE: NoiseKind = NoiseKind::TwoInterval {
    lo1: -0.1,
    hi1: -0.05,
    lo2: 0.05,
    hi2: 0.1,
};
pub const CONDITIONAL_REPS: usize = 60;
pub const TFIM_REPS: usize = 10;
/// Neighbouring ground states differ by infidelities near 4e-4, so the
/// blur must sit well below that.
pub const TFIM_EPSILON: f64 = 1e-5;
pub const TFIM_SINKHORN_ITERATIONS: usize = 5000;
/// Starting near the identity circuit; full-range starts settle in poorer
/// minima on this task.
pub const TFIM_INIT_SCALE: f64 = 0.1;
pub const ENTROPY_REPS: usize = 4;

impl ExperimentConfig {
    pub fn defaults(task: Task) -> Self {
        let train = TrainConfig {
            aux: AuxMetric::MeanSquaredY,
            noise: RING_NOISE,
            ..TrainConfig::default()
        };
        let mut cfg = Self {
            task,
            seed: 0,
            out_dir: PathBuf::from("out"),
            generator: GeneratorConfig::new(1, 20),
            train,
            aux_second: AuxMetric::None,
            data: DataConfig {
                count: 1100,
                train_count: 100,
                n_sites: 10,
                g_lo: 1.3,
                g_hi: 1.5,
            },
            generate: GenerateConfig {
                count: 1000,
                category: None,
            },
            sweep: SweepConfig {
                p_values: (1..=20).map(|t| 4 * t).collect(),
                seeds: vec![0, 1, 2],
            },
            entropy: EntropyConfig {
                targets: (0..=10).map(|k| k as f64 / 10.0).collect(),
            },
            gradcheck: GradcheckConfig {
                h: 1e-4,
                tolerance: 1e-3,
                shift_tolerance: 1e-8,
                epsilon: 0.05,
                inject_wrong_sign: false,
            },
        };
        match task {
            Task::RingY | Task::SweepP => {}
            Task::RingConditional => {
                // Each category maps an interval a quarter as wide as the
                // ring noise onto a full great circle.
                cfg.generator = GeneratorConfig::new(1, CONDITIONAL_REPS);
                cfg.train.noise = CONDITIONAL_NOISE;
                cfg.aux_second = AuxMetric::MeanSquaredZ;
            }
            Task::Tfim => {
                cfg.generator = GeneratorConfig::new(10, TFIM_REPS);
                cfg.train.noise = TFIM_NOISE;
                cfg.train.aux = AuxMetric::Magnetization;
                cfg.train.sinkhorn = SinkhornConfig {
                    epsilon: TFIM_EPSILON,
                    max_iterations: TFIM_SINKHORN_ITERATIONS,
                    ..SinkhornConfig::default()
                };
                cfg.train.init_scale = TFIM_INIT_SCALE;
                cfg.data.count = 100;
                cfg.data.train_count = 100;
                cfg.generate.count = 100;
            }
            Task::EntropySeries => {
                cfg.generator = GeneratorConfig::new(2, ENTROPY_REPS);
                cfg.train.aux = AuxMetric::None;
            }
        }
        cfg
    }

    /// Parses a config file body, filling absent keys from the task defaults.
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let user: Value = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let Value::Object(map) = &user else {
            return Err(CliError::Usage("config must be a JSON object".into()));
        };
        let task = match map.get("task") {
            Some(Value::String(s)) => s.parse::<Task>()?,
            Some(other) => return Err(CliError::Usage(format!("task must be a string, got {other}"))),
            None => return Err(CliError::Usage("config is missing \"task\"".into())),
        };
        let mut merged = serde_json::to_value(Self::defaults(task))
            .map_err(|e| CliError::Usage(format!("serializing defaults: {e}")))?;
        merge(&mut merged, user);
        let cfg: Self = serde_json::from_value(merged)
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: qnoisegen::Error| CliError::Usage(e.to_string());
        self.generator.validate().map_err(usage)?;
        self.train.validate().map_err(usage)?;
        if self.data.count == 0 || self.data.train_count == 0 || self.data.train_count > self.data.count {
            return Err(CliError::Usage(format!(
                "data needs 1 ≤ train_count ≤ count, got {} and {}",
                self.data.train_count, self.data.count
            )));
        }
        let needs_test = matches!(self.task, Task::RingY | Task::RingConditional | Task::SweepP);
        if needs_test && self.data.train_count == self.data.count {
            return Err(CliError::Usage(format!(
                "task {} needs test states: train_count must be below count",
                self.task
            )));
        }
        if self.sweep.p_values.is_empty() || self.sweep.p_values.contains(&0) {
            return Err(CliError::Usage("sweep.p_values must be nonempty and positive".into()));
        }
        if self.sweep.seeds.is_empty() {
            return Err(CliError::Usage("sweep.seeds must be nonempty".into()));
        }
        if self.entropy.targets.iter().any(|t| !(0.0..=1.0).contains(t)) || self.entropy.targets.is_empty() {
            return Err(CliError::Usage("entropy.targets must be a nonempty list in [0, 1]".into()));
        }
        match self.task {
            Task::RingY | Task::RingConditional | Task::SweepP if self.generator.n_qubits != 1 => {
                Err(CliError::Usage(format!("task {} uses a single qubit", self.task)))
            }
            Task::Tfim if self.generator.n_qubits != self.data.n_sites => Err(CliError::Usage(format!(
                "generator has {} qubits but the chain has {} sites",
                self.generator.n_qubits, self.data.n_sites
            ))),
            Task::EntropySeries if self.generator.n_qubits != 2 => {
                Err(CliError::Usage("entropy_series uses two qubits".into()))
            }
            Task::RingConditional if !matches!(self.train.noise, NoiseKind::TwoInterval { .. }) => {
                Err(CliError::Usage("ring_conditional needs two_interval noise".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Recursive object merge; non-object values in `patch` replace `base`.
/// Tagged objects (those with a `kind` key) are replaced whole so variants
/// never mix fields.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() && v.get("kind").is_none() => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_task_defaults() {
        let cfg = ExperimentConfig::from_json_str(r#"{"task": "ring_y"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::defaults(Task::RingY));
        assert_eq!(cfg.generator.reps, 20);
        assert_eq!(cfg.train.lr, 0.05);
        assert_eq!(cfg.train.epochs, 1000);
        assert_eq!(cfg.sweep.p_values.len(), 20);
    }

    #[test]
    fn nested_override_keeps_siblings() {
        let cfg = ExperimentConfig::from_json_str(
            r#"{"task": "tfim", "train": {"epochs": 3, "sinkhorn": {"epsilon": 0.02}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.sinkhorn.epsilon, 0.02);
        assert_eq!(cfg.train.sinkhorn.max_iterations, TFIM_SINKHORN_ITERATIONS);
        assert_eq!(cfg.train.init_scale, TFIM_INIT_SCALE);
        assert_eq!(cfg.train.noise, TFIM_NOISE);
    }

    #[test]
    fn defaults_round_trip() {
        for task in Task::ALL {
            let cfg = ExperimentConfig::defaults(task);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_json_str(&cfg.to_json_string()).unwrap(), cfg);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"task": "ring_x"}"#,
            r#"{"seed": 1}"#,
            r#"{"task": "ring_y", "unknown": 1}"#,
            r#"{"task": "ring_y", "train": {"lr": -1}}"#,
            r#"{"task": "ring_y", "data": {"train_count": 1100}}"#,
            r#"[1, 2]"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json_str(text), Err(CliError::Usage(_))), "{text}");
        }
    }
}
