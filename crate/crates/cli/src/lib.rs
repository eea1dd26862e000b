//! Command implementations behind the `qnoisegen` binary.
//!
//! Every command reads an [`ExperimentConfig`], writes its outputs under the
//! configured output directory and returns a [`CliError`] whose
//! [`exit_code`](CliError::exit_code) the binary reports.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::{Path, PathBuf};

pub use commands::{
    cmd_eval, cmd_gen_data, cmd_generate, cmd_gradcheck, cmd_sweep_p, cmd_train, EvalRequest,
    GenerateRequest, GradcheckReport,
};
pub use config::{ExperimentConfig, Task};

#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments, config or input files.
    Usage(String),
    /// The divergence guard tripped or the optimizer produced non-finite values.
    Diverged(String),
    Io(String),
    /// A gradient check ran and failed.
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Diverged(m) => write!(f, "training diverged: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qnoisegen::Error> for CliError {
    fn from(e: qnoisegen::Error) -> Self {
        use qnoisegen::Error as E;
        match e {
            E::Io(io) => CliError::Io(io.to_string()),
            E::Diverged { .. } | E::Numerical(_) => CliError::Diverged(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub(crate) fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// File names inside the output directory.
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub dir: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    fn suffixed(&self, stem: &str, category: Option<usize>, ext: &str) -> PathBuf {
        match category {
            Some(c) => self.dir.join(format!("{stem}_{c}.{ext}")),
            None => self.dir.join(format!("{stem}.{ext}")),
        }
    }

    pub fn train(&self, category: Option<usize>) -> PathBuf {
        self.suffixed("train", category, "json")
    }

    pub fn test(&self, category: Option<usize>) -> PathBuf {
        self.suffixed("test", category, "json")
    }

    pub fn generated(&self, category: Option<usize>) -> PathBuf {
        self.suffixed("generated", category, "json")
    }

    pub fn theta(&self) -> PathBuf {
        self.dir.join("theta.json")
    }

    pub fn metrics(&self) -> PathBuf {
        self.dir.join("metrics.csv")
    }

    pub fn g_values(&self) -> PathBuf {
        self.dir.join("g_values.csv")
    }

    pub fn entropy_theta(&self, index: usize) -> PathBuf {
        self.dir.join(format!("theta_{index:02}.json"))
    }

    pub fn entropy_metrics(&self, index: usize) -> PathBuf {
        self.dir.join(format!("metrics_{index:02}.csv"))
    }

    pub fn entropy_results(&self) -> PathBuf {
        self.dir.join("entropy_results.csv")
    }

    pub fn report_json(&self) -> PathBuf {
        self.dir.join("report.json")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.dir.join("report.csv")
    }

    pub fn sweep(&self) -> PathBuf {
        self.dir.join("sweep.csv")
    }

    pub fn sweep_runs(&self) -> PathBuf {
        self.dir.join("sweep_runs.csv")
    }

    pub fn gradcheck(&self) -> PathBuf {
        self.dir.join("gradcheck.json")
    }
}
