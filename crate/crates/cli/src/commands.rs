//! The six subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{error, info};
use qnoisegen::datasets::{
    load_ensemble, load_theta, ring_y_ensemble, ring_z_ensemble, save_ensemble, save_theta,
    tfim_ground_states, NoiseKind, NoiseSampler, TfimConfig,
};
use qnoisegen::gradients::{
    ensemble_loss_gradient, ensemble_regularized_loss, entropy_loss_gradient, finite_difference_check,
    overlap_gradient, parameter_shift_overlap, GradientTensor,
};
use qnoisegen::metrics::{
    distribution_distance_1d, entropy_series_report, evaluate_generation, magnetization,
    mean_squared_pauli, MetricReport,
};
use qnoisegen::rng::{stream_rng, stream_rng_indexed, Stream};
use qnoisegen::statevec::Pauli;
use qnoisegen::training::{
    evaluate_entropy_target, generate_from_sampler, train_conditional_observed,
    train_ensemble_observed, train_entropy_series_observed, Category, EpochRecord, TrainConfig,
};
use qnoisegen::transport::{wasserstein_distance, OverlapMode};
use qnoisegen::{generate_state, GeneratorConfig, NoiseSample, PureEnsemble, SinkhornConfig, ThetaTensor};
use serde::Serialize;

use crate::config::{ExperimentConfig, Task};
use crate::{io_err, CliError, OutputPaths};

type CliResult<T> = Result<T, CliError>;

/// Shortest round-trip text, switching to exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    failed: Option<std::io::Error>,
}

impl CsvWriter {
    fn create(path: PathBuf, header: &str) -> CliResult<Self> {
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        let mut w = Self {
            path,
            out: BufWriter::new(file),
            failed: None,
        };
        w.line(header);
        Ok(w)
    }

    // Errors are kept until `finish` so the writer can sit in an observer.
    fn line(&mut self, text: &str) {
        if self.failed.is_none() {
            if let Err(e) = writeln!(self.out, "{text}") {
                self.failed = Some(e);
            }
        }
    }

    fn epoch(&mut self, r: &EpochRecord) {
        let text = format!("{},{},{},{}", r.epoch, fmt_f64(r.loss), fmt_f64(r.aux_metric), r.wall_ms);
        self.line(&text);
    }

    fn finish(mut self) -> CliResult<()> {
        if let Some(e) = self.failed.take() {
            return Err(io_err(&self.path, e));
        }
        self.out.flush().map_err(|e| io_err(&self.path, e))
    }
}

pub const METRICS_HEADER: &str = "epoch,loss,aux_metric,wall_ms";
pub const SWEEP_HEADER: &str = "P,wasserstein,success_probability";

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("missing input file {}", path.display())))
    }
}

fn read_ensemble(path: &Path) -> CliResult<PureEnsemble> {
    require_file(path)?;
    load_ensemble(path).map_err(|e| match e {
        qnoisegen::Error::Io(io) => io_err(path, io),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn read_theta(path: &Path) -> CliResult<(ThetaTensor, GeneratorConfig)> {
    require_file(path)?;
    load_theta(path).map_err(|e| match e {
        qnoisegen::Error::Io(io) => io_err(path, io),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

fn write_ensemble(path: &Path, ensemble: &PureEnsemble) -> CliResult<()> {
    save_ensemble(path, ensemble).map_err(|e| io_err(path, e))
}

fn write_theta(path: &Path, theta: &ThetaTensor, config: &GeneratorConfig) -> CliResult<()> {
    save_theta(path, theta, config).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn train_config(cfg: &ExperimentConfig) -> TrainConfig {
    TrainConfig {
        seed: cfg.seed,
        ..cfg.train.clone()
    }
}

/// Reports the divergence guard with the last logged epoch.
fn training_error(e: qnoisegen::Error, log_path: &Path, last_epoch: Option<usize>) -> CliError {
    let err = CliError::from(e);
    if let CliError::Diverged(msg) = &err {
        match last_epoch {
            Some(ep) => error!("{msg}; last epoch {ep} logged to {}", log_path.display()),
            None => error!("{msg}"),
        }
    }
    err
}

/// Writes the task's datasets. Returns a one-line summary.
pub fn cmd_gen_data(cfg: &ExperimentConfig) -> CliResult<String> {
    let paths = OutputPaths::new(&cfg.out_dir);
    ensure_dir(&paths.dir)?;
    let (count, n_train, seed) = (cfg.data.count, cfg.data.train_count, cfg.seed);
    match cfg.task {
        Task::RingY | Task::SweepP => {
            let (train, test) = ring_y_ensemble(count, seed)?.split_at(n_train)?;
            write_ensemble(&paths.train(None), &train)?;
            write_ensemble(&paths.test(None), &test)?;
            Ok(format!("ring_y: {} train, {} test states, seed {seed}", train.len(), test.len()))
        }
        Task::RingConditional => {
            let mut parts = Vec::new();
            for (k, states) in [(1, ring_y_ensemble(count, seed)?), (2, ring_z_ensemble(count, seed)?)] {
                let (train, test) = states.split_at(n_train)?;
                write_ensemble(&paths.train(Some(k)), &train)?;
                write_ensemble(&paths.test(Some(k)), &test)?;
                parts.push(format!("category {k}: {} train, {} test", train.len(), test.len()));
            }
            Ok(format!("ring_conditional: {}, seed {seed}", parts.join("; ")))
        }
        Task::Tfim => {
            let data = tfim_ground_states(&TfimConfig {
                n_sites: cfg.data.n_sites,
                g_lo: cfg.data.g_lo,
                g_hi: cfg.data.g_hi,
                count,
                seed,
            })?;
            let mut g_csv = String::from("index,g,energy,residual\n");
            for (i, ((g, e), r)) in data.g_values.iter().zip(&data.energies).zip(&data.residuals).enumerate() {
                g_csv.push_str(&format!("{i},{},{},{}\n", fmt_f64(*g), fmt_f64(*e), fmt_f64(*r)));
            }
            write_text(&paths.g_values(), &g_csv)?;
            let n = data.ensemble.len();
            if n_train < n {
                let (train, test) = data.ensemble.split_at(n_train)?;
                write_ensemble(&paths.train(None), &train)?;
                write_ensemble(&paths.test(None), &test)?;
            } else {
                write_ensemble(&paths.train(None), &data.ensemble)?;
            }
            Ok(format!(
                "tfim: {n} ground states, N = {}, g in [{}, {}), seed {seed}",
                cfg.data.n_sites, cfg.data.g_lo, cfg.data.g_hi
            ))
        }
        Task::EntropySeries => Err(CliError::Usage(
            "entropy_series optimizes entropy targets directly and has no dataset".into(),
        )),
    }
}

/// Trains the task's model, writing θ and the per-epoch CSV.
pub fn cmd_train(cfg: &ExperimentConfig) -> CliResult<String> {
    let paths = OutputPaths::new(&cfg.out_dir);
    let tc = train_config(cfg);
    match cfg.task {
        Task::RingY | Task::Tfim => {
            let train = read_ensemble(&paths.train(None))?;
            ensure_dir(&paths.dir)?;
            let mut csv = CsvWriter::create(paths.metrics(), METRICS_HEADER)?;
            let mut last = None;
            let result = train_ensemble_observed(&cfg.generator, &train, &tc, |r| {
                csv.epoch(r);
                last = Some(r.epoch);
            });
            csv.finish()?;
            let outcome = result.map_err(|e| training_error(e, &paths.metrics(), last))?;
            write_theta(&paths.theta(), &outcome.theta, &cfg.generator)?;
            Ok(summary_line(cfg.task, &outcome.log))
        }
        Task::RingConditional => {
            let NoiseKind::TwoInterval { lo1, hi1, lo2, hi2 } = tc.noise else {
                return Err(CliError::Usage("ring_conditional needs two_interval noise".into()));
            };
            let categories = [
                Category {
                    train_set: read_ensemble(&paths.train(Some(1)))?,
                    interval: (lo1, hi1),
                    aux: tc.aux,
                },
                Category {
                    train_set: read_ensemble(&paths.train(Some(2)))?,
                    interval: (lo2, hi2),
                    aux: cfg.aux_second,
                },
            ];
            ensure_dir(&paths.dir)?;
            let mut csv = CsvWriter::create(paths.metrics(), METRICS_HEADER)?;
            let mut last = None;
            let result = train_conditional_observed(&cfg.generator, &categories, &tc, |r| {
                csv.epoch(r);
                last = Some(r.epoch);
            });
            csv.finish()?;
            let outcome = result.map_err(|e| training_error(e, &paths.metrics(), last))?;
            write_theta(&paths.theta(), &outcome.theta, &cfg.generator)?;
            Ok(summary_line(cfg.task, &outcome.log))
        }
        Task::EntropySeries => {
            ensure_dir(&paths.dir)?;
            let targets = &cfg.entropy.targets;
            let mut writers = (0..targets.len())
                .map(|i| CsvWriter::create(paths.entropy_metrics(i), METRICS_HEADER))
                .collect::<CliResult<Vec<_>>>()?;
            let mut last = None;
            let result = train_entropy_series_observed(&cfg.generator, targets, &tc, |i, r| {
                writers[i].epoch(r);
                last = Some((i, r.epoch));
            });
            for w in writers {
                w.finish()?;
            }
            let runs = result.map_err(|e| {
                let (i, ep) = last.unzip();
                training_error(e, &paths.entropy_metrics(i.unwrap_or(0)), ep)
            })?;
            let mut table =
                String::from("target,mean_entropy,mean_abs_deviation,max_abs_deviation\n");
            let mut worst: f64 = 0.0;
            for (i, run) in runs.iter().enumerate() {
                write_theta(&paths.entropy_theta(i), &run.theta, &cfg.generator)?;
                let r = &run.result;
                worst = worst.max(r.mean_deviation());
                table.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(r.target),
                    fmt_f64(r.mean_entropy()),
                    fmt_f64(r.mean_deviation()),
                    fmt_f64(r.max_deviation())
                ));
            }
            write_text(&paths.entropy_results(), &table)?;
            Ok(format!(
                "entropy_series: {} targets, worst mean |S - target| = {}",
                runs.len(),
                fmt_f64(worst)
            ))
        }
        Task::SweepP => Err(CliError::Usage("sweep_P is run with the sweep-p command".into())),
    }
}

fn summary_line(task: Task, log: &[EpochRecord]) -> String {
    match log.last() {
        Some(r) => format!(
            "{task}: {} epochs, final loss {}, aux {}",
            log.len(),
            fmt_f64(r.loss),
            fmt_f64(r.aux_metric)
        ),
        None => format!("{task}: 0 epochs, initial parameters saved"),
    }
}

#[derive(Clone, Debug, Default)]
pub struct GenerateRequest {
    pub theta: Option<PathBuf>,
    pub count: Option<usize>,
    pub category: Option<usize>,
    pub output: Option<PathBuf>,
}

/// Generates `count` states in one pass: one circuit execution per state.
pub fn cmd_generate(cfg: &ExperimentConfig, req: &GenerateRequest) -> CliResult<String> {
    let paths = OutputPaths::new(&cfg.out_dir);
    let theta_path = req.theta.clone().unwrap_or_else(|| paths.theta());
    let (theta, gen_cfg) = read_theta(&theta_path)?;
    let count = req.count.unwrap_or(cfg.generate.count);
    if count == 0 {
        return Err(CliError::Usage("generate count must be at least 1".into()));
    }
    let category = req.category.or(cfg.generate.category);
    if category.is_some() && !matches!(cfg.train.noise, NoiseKind::TwoInterval { .. }) {
        return Err(CliError::Usage("a category needs two_interval noise".into()));
    }
    let rng = stream_rng_indexed(cfg.seed, Stream::Generate, category.unwrap_or(0) as u64);
    let mut sampler = NoiseSampler::new(cfg.train.noise, rng)?;
    let generated = generate_from_sampler(&gen_cfg, &theta, &mut sampler, count, category)?;
    ensure_dir(&paths.dir)?;
    let out = req.output.clone().unwrap_or_else(|| paths.generated(category));
    write_ensemble(&out, &generated)?;
    Ok(format!(
        "generated {} states from {} circuit executions into {}",
        generated.len(),
        count,
        out.display()
    ))
}

#[derive(Clone, Debug, Default)]
pub struct EvalRequest {
    pub generated: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub metrics: Option<Vec<String>>,
}

pub fn default_metrics(task: Task) -> Vec<&'static str> {
    match task {
        Task::RingY | Task::SweepP => vec!["wasserstein", "mean_sq_y"],
        Task::RingConditional => vec!["wasserstein", "mean_sq_y", "mean_sq_z"],
        Task::Tfim => vec!["wasserstein", "magnetization", "magnetization_distance"],
        Task::EntropySeries => vec!["entropy"],
    }
}

#[derive(Serialize)]
struct Report<'a> {
    task: Task,
    generated: Option<String>,
    test: Option<String>,
    metrics: &'a [MetricReport],
}

/// Computes the requested metrics and writes `report.json` and `report.csv`.
pub fn cmd_eval(cfg: &ExperimentConfig, req: &EvalRequest) -> CliResult<Vec<MetricReport>> {
    let paths = OutputPaths::new(&cfg.out_dir);
    let names: Vec<String> = match &req.metrics {
        Some(m) if !m.is_empty() => m.clone(),
        _ => default_metrics(cfg.task).iter().map(|s| s.to_string()).collect(),
    };
    let needs_states = names.iter().any(|n| n != "entropy");
    let mut files = (None, None);
    let mut states = None;
    if needs_states {
        let category = cfg.generate.category;
        let gen_path = req.generated.clone().unwrap_or_else(|| paths.generated(category));
        let test_path = req.test.clone().unwrap_or_else(|| match cfg.task {
            Task::Tfim => paths.train(None),
            Task::RingConditional => paths.test(Some(category.unwrap_or(1))),
            _ => paths.test(None),
        });
        let generated = read_ensemble(&gen_path)?;
        let test = read_ensemble(&test_path)?;
        if generated.n_qubits() != test.n_qubits() {
            return Err(CliError::Usage(format!(
                "generated states have {} qubits, test states {}",
                generated.n_qubits(),
                test.n_qubits()
            )));
        }
        files = (Some(gen_path.display().to_string()), Some(test_path.display().to_string()));
        states = Some((generated, test));
    }
    let mut reports = Vec::new();
    for name in &names {
        let pair = states.as_ref();
        let need = || pair.ok_or_else(|| CliError::Usage("no states loaded".into()));
        match name.as_str() {
            "wasserstein" => {
                let (g, t) = need()?;
                reports.push(evaluate_generation(g, t, &cfg.train.sinkhorn)?);
            }
            "mean_sq_x" | "mean_sq_y" | "mean_sq_z" => {
                let pauli = match name.as_str() {
                    "mean_sq_x" => Pauli::X,
                    "mean_sq_y" => Pauli::Y,
                    _ => Pauli::Z,
                };
                reports.push(mean_squared_pauli(&need()?.0, pauli)?);
            }
            "magnetization" => reports.push(magnetization(&need()?.0)?),
            "magnetization_distance" => {
                let (g, t) = need()?;
                let mg = magnetization(g)?;
                let mt = magnetization(t)?;
                let d = distribution_distance_1d(
                    mg.details.as_deref().unwrap_or_default(),
                    mt.details.as_deref().unwrap_or_default(),
                )?;
                reports.push(MetricReport {
                    name: "magnetization_distance".into(),
                    value: d,
                    sample_count: g.len(),
                    details: Some(vec![mg.value, mt.value]),
                });
            }
            "entropy" => {
                if cfg.task != Task::EntropySeries {
                    return Err(CliError::Usage("the entropy metric belongs to entropy_series".into()));
                }
                let tc = train_config(cfg);
                let mut results = Vec::new();
                for (i, &target) in cfg.entropy.targets.iter().enumerate() {
                    let (theta, gen_cfg) = read_theta(&paths.entropy_theta(i))?;
                    results.push(evaluate_entropy_target(&gen_cfg, &theta, target, &tc, i)?);
                }
                reports.extend(entropy_series_report(&results)?);
            }
            other => {
                return Err(CliError::Usage(format!("unknown metric {other:?}")));
            }
        }
    }
    ensure_dir(&paths.dir)?;
    let report = Report {
        task: cfg.task,
        generated: files.0,
        test: files.1,
        metrics: &reports,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_text(&paths.report_json(), &(json + "\n"))?;
    let mut csv = String::from("name,value,sample_count\n");
    for r in &reports {
        csv.push_str(&format!("{},{},{}\n", r.name, fmt_f64(r.value), r.sample_count));
    }
    write_text(&paths.report_csv(), &csv)?;
    Ok(reports)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub reps: usize,
    pub wasserstein: f64,
    pub success_probability: f64,
}

/// Trains one ring model per (P, seed) and writes the seed-averaged distance.
pub fn cmd_sweep_p(cfg: &ExperimentConfig, p_values: Option<&[usize]>) -> CliResult<Vec<SweepRow>> {
    let p_values = p_values.unwrap_or(&cfg.sweep.p_values);
    if p_values.is_empty() || p_values.contains(&0) {
        return Err(CliError::Usage("P list must be nonempty and positive".into()));
    }
    let paths = OutputPaths::new(&cfg.out_dir);
    ensure_dir(&paths.dir)?;
    let mut runs = CsvWriter::create(paths.sweep_runs(), "P,seed,wasserstein,mean_sq_y,success_probability")?;
    let mut rows = Vec::new();
    let count = cfg.generate.count;
    for &p in p_values {
        let gen_cfg = GeneratorConfig { reps: p, ..cfg.generator };
        let mut w_sum = 0.0;
        let mut success: f64 = 1.0;
        for &seed in &cfg.sweep.seeds {
            let (train, test) = ring_y_ensemble(cfg.data.count, seed)?.split_at(cfg.data.train_count)?;
            let tc = TrainConfig { seed, ..cfg.train.clone() };
            let outcome = train_ensemble_observed(&gen_cfg, &train, &tc, |_| {})
                .map_err(|e| training_error(e, &paths.sweep_runs(), None))?;
            let mut sampler = NoiseSampler::new(tc.noise, stream_rng(seed, Stream::Generate))?;
            let generated = generate_from_sampler(&gen_cfg, &outcome.theta, &mut sampler, count, None)?;
            let p_success = generated.len() as f64 / count as f64;
            let w = wasserstein_distance(&generated, &test, &cfg.train.sinkhorn, OverlapMode::Exact)?;
            let y2 = mean_squared_pauli(&generated, Pauli::Y)?.value;
            info!("P = {p}, seed {seed}: W = {w:.6}, <Y>^2 = {y2:.6}");
            runs.line(&format!("{p},{seed},{},{},{}", fmt_f64(w), fmt_f64(y2), fmt_f64(p_success)));
            w_sum += w;
            success = success.min(p_success);
        }
        rows.push(SweepRow {
            reps: p,
            wasserstein: w_sum / cfg.sweep.seeds.len() as f64,
            success_probability: success,
        });
    }
    runs.finish()?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            r.reps,
            fmt_f64(r.wasserstein),
            fmt_f64(r.success_probability)
        ));
    }
    write_text(&paths.sweep(), &csv)?;
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradcheckReport {
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

fn negate_if(mut g: GradientTensor, flip: bool) -> GradientTensor {
    if flip {
        g.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
    }
    g
}

/// Adjoint gradients against parameter shift and central differences on
/// small instances. Writes `gradcheck.json`; the report says whether all
/// suites passed.
pub fn cmd_gradcheck(cfg: &ExperimentConfig) -> CliResult<GradcheckReport> {
    let gc = &cfg.gradcheck;
    let flip = gc.inject_wrong_sign;
    let seed = cfg.seed;
    let mut init = stream_rng(seed, Stream::Init);
    let ring = NoiseKind::Uniform { lo: -0.1, hi: 0.1 };
    let mut suites = Vec::new();

    for (i, (n, p)) in [(1, 2), (2, 2), (3, 1)].into_iter().enumerate() {
        let gen_cfg = GeneratorConfig::new(n, p);
        let theta = ThetaTensor::random(&gen_cfg, &mut init);
        let target_theta = ThetaTensor::random(&gen_cfg, &mut init);
        let x = NoiseSampler::new(ring, stream_rng_indexed(seed, Stream::TrainNoise, i as u64))?
            .sample(2, None)?;
        let target = generate_state(&gen_cfg, &target_theta, x[1])?;
        let adj = overlap_gradient(&gen_cfg, &theta, x[0], &target)?;
        let shift = parameter_shift_overlap(&gen_cfg, &theta, x[0], &target)?;
        let scale = shift.iter().fold(0.0f64, |m, d| m.max(d.norm()));
        let sign = if flip { -1.0 } else { 1.0 };
        let max_rel = adj
            .derivatives
            .iter()
            .zip(&shift)
            .map(|(a, s)| {
                let a = a * sign;
                (a - s).norm() / a.norm().max(s.norm()).max(1e-3 * scale).max(1e-12)
            })
            .fold(0.0f64, f64::max);
        suites.push(SuiteResult {
            name: format!("adjoint_vs_shift_n{n}_p{p}"),
            max_relative_error: max_rel,
            tolerance: gc.shift_tolerance,
            passed: max_rel < gc.shift_tolerance,
        });
    }

    let tight = SinkhornConfig {
        epsilon: gc.epsilon,
        max_iterations: 200_000,
        marginal_tolerance: 1e-14,
    };
    for (n, p, m) in [(1, 2, 4), (2, 1, 4)] {
        let gen_cfg = GeneratorConfig::new(n, p);
        let theta = ThetaTensor::random(&gen_cfg, &mut init);
        let mut sampler = NoiseSampler::new(ring, stream_rng_indexed(seed, Stream::TrainNoise, 100 + n as u64))?;
        let noises: Vec<NoiseSample> = sampler.sample(m, None)?;
        let target_noise = sampler.sample(m, None)?;
        let target_theta = ThetaTensor::random(&gen_cfg, &mut init);
        let targets = PureEnsemble::new(
            target_noise
                .iter()
                .map(|&x| generate_state(&gen_cfg, &target_theta, x))
                .collect::<qnoisegen::Result<Vec<_>>>()?,
        )?;
        let report = finite_difference_check(
            |t| {
                let lg = ensemble_loss_gradient(&gen_cfg, t, &noises, &targets, &tight)?;
                let value = ensemble_regularized_loss(&gen_cfg, t, &noises, &targets, &tight)?;
                Ok((value, negate_if(lg.gradient, flip)))
            },
            &theta,
            gc.h,
            gc.tolerance,
        )?;
        suites.push(SuiteResult {
            name: format!("transport_fd_n{n}_p{p}_{m}x{m}"),
            max_relative_error: report.max_relative_error,
            tolerance: gc.tolerance,
            passed: report.passed,
        });
    }

    let gen_cfg = GeneratorConfig::new(2, 2);
    let theta = ThetaTensor::random(&gen_cfg, &mut init);
    let noises = NoiseSampler::new(ring, stream_rng_indexed(seed, Stream::TrainNoise, 200))?.sample(4, None)?;
    let report = finite_difference_check(
        |t| {
            let lg = entropy_loss_gradient(&gen_cfg, t, &noises, 0.5)?;
            Ok((lg.loss, negate_if(lg.gradient, flip)))
        },
        &theta,
        gc.h,
        gc.tolerance,
    )?;
    suites.push(SuiteResult {
        name: "entropy_fd_n2_p2".into(),
        max_relative_error: report.max_relative_error,
        tolerance: gc.tolerance,
        passed: report.passed,
    });

    let passed = suites.iter().all(|s| s.passed);
    let result = GradcheckReport { suites, passed };
    let paths = OutputPaths::new(&cfg.out_dir);
    ensure_dir(&paths.dir)?;
    let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Io(e.to_string()))?;
    write_text(&paths.gradcheck(), &(json + "\n"))?;
    Ok(result)
}
