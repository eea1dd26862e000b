use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use qnoisegen_cli::{
    cmd_eval, cmd_gen_data, cmd_generate, cmd_gradcheck, cmd_sweep_p, cmd_train, CliError,
    EvalRequest, ExperimentConfig, GenerateRequest, Task,
};

/// Noise-reuploading quantum generator: data, training, generation, evaluation.
#[derive(Parser)]
#[command(name = "qnoisegen", version)]
struct Cli {
    /// JSON experiment config; absent keys take the task defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Task whose defaults to use when no config file is given.
    #[arg(long, global = true)]
    task: Option<String>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for per-state parallel work.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the task's training and test ensembles.
    GenData,
    /// Train and write theta plus the per-epoch metrics CSV.
    Train,
    /// Generate states from a trained theta.
    Generate {
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        /// Forces noise from interval 1 or 2 of a two-interval law.
        #[arg(long)]
        category: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare generated states with test states.
    Eval {
        #[arg(long)]
        generated: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Comma-separated: wasserstein, mean_sq_x, mean_sq_y, mean_sq_z,
        /// magnetization, magnetization_distance, entropy.
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<String>,
    },
    /// Train and evaluate one ring model per repetition count.
    SweepP {
        /// Comma-separated repetition counts.
        #[arg(long, value_delimiter = ',')]
        p_list: Vec<usize>,
    },
    /// Check analytic gradients against parameter shift and finite differences.
    Gradcheck {
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, hide = true)]
        inject_wrong_sign: bool,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.task) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --config or --task, not both".into()))
        }
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(task)) => ExperimentConfig::defaults(task.parse::<Task>()?),
        (None, None) => ExperimentConfig::defaults(Task::RingY),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let mut cfg = load_config(&cli)?;
    info!("task {}, seed {}, output {}", cfg.task, cfg.seed, cfg.out_dir.display());
    match cli.command {
        Command::GenData => println!("{}", cmd_gen_data(&cfg)?),
        Command::Train => println!("{}", cmd_train(&cfg)?),
        Command::Generate { theta, count, category, output } => {
            let req = GenerateRequest { theta, count, category, output };
            println!("{}", cmd_generate(&cfg, &req)?);
        }
        Command::Eval { generated, test, metrics } => {
            let req = EvalRequest {
                generated,
                test,
                metrics: (!metrics.is_empty()).then_some(metrics),
            };
            for r in cmd_eval(&cfg, &req)? {
                println!("{} = {} (n = {})", r.name, r.value, r.sample_count);
            }
        }
        Command::SweepP { p_list } => {
            let list = (!p_list.is_empty()).then_some(p_list.as_slice());
            println!("P,wasserstein,success_probability");
            for r in cmd_sweep_p(&cfg, list)? {
                println!("{},{},{}", r.reps, r.wasserstein, r.success_probability);
            }
        }
        Command::Gradcheck { tolerance, inject_wrong_sign } => {
            if let Some(t) = tolerance {
                cfg.gradcheck.tolerance = t;
                cfg.gradcheck.shift_tolerance = cfg.gradcheck.shift_tolerance.min(t);
            }
            cfg.gradcheck.inject_wrong_sign |= inject_wrong_sign;
            let report = cmd_gradcheck(&cfg)?;
            for s in &report.suites {
                let verdict = if s.passed { "PASS" } else { "FAIL" };
                println!("{verdict} {} max rel error {:e} (tolerance {:e})", s.name, s.max_relative_error, s.tolerance);
            }
            if !report.passed {
                return Err(CliError::CheckFailed("gradient check failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qnoisegen: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
