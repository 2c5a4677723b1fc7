//! Shared plumbing for the `heatrate` binary: run configuration, exit
//! codes, and the output helpers the subcommands build on.

pub mod check;
pub mod commands;

use std::fs;
use std::path::{Path, PathBuf};

use heatrate::{MaterialParams, ModelKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// A command abort: the process exit code plus the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INFEASIBLE,
            message: message.into(),
        }
    }
}

pub type CmdResult = Result<i32, Failure>;

/// One sweep axis `name:min:max:count`, endpoints inclusive.
#[derive(Clone, Debug)]
pub struct SweepAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn parse(spec: &str) -> Result<Self, Failure> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = |what: &str| Failure::config(format!("sweep axis `{spec}`: {what}"));
        if parts.len() != 4 {
            return Err(bad("expected name:min:max:count"));
        }
        let name = parts[0].trim().to_string();
        if name.is_empty() {
            return Err(bad("empty parameter name"));
        }
        let min: f64 = parts[1].parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = parts[2].parse().map_err(|_| bad("max is not a number"))?;
        if !min.is_finite() || !max.is_finite() {
            return Err(bad("endpoints must be finite"));
        }
        let count: usize = parts[3].parse().map_err(|_| bad("count is not an integer"))?;
        if count < 2 {
            return Err(bad("count must be at least 2"));
        }
        Ok(Self {
            name,
            min,
            max,
            count,
        })
    }

    /// The `count` grid values, both endpoints included.
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Options collected from the command line. Not every subcommand reads
/// every field.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    pub modes: usize,
    pub grid: usize,
    pub horizon: f64,
    pub sweep: Vec<SweepAxis>,
    pub seed: u64,
    pub fault: bool,
}

/// Reads and decodes the `--model` JSON file.
pub fn load_model(cfg: &RunConfig) -> Result<ModelKind, Failure> {
    let path = cfg
        .model
        .as_ref()
        .ok_or_else(|| Failure::config("this command needs --model FILE.json"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("decoding {}: {e}", path.display())))
}

/// Extracts second-order-law parameters or fails with a config error.
pub fn require_lso(model: &ModelKind) -> Result<MaterialParams, Failure> {
    match model {
        ModelKind::Lso(p) => Ok(*p),
        other => Err(Failure::config(format!(
            "this command needs a second-order (kind \"lso\") model, got \"{}\"",
            other.name()
        ))),
    }
}

/// Creates the output directory if needed and writes `name` inside it.
pub fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::config(format!("creating {}: {e}", cfg.out.display())))?;
    let path = cfg.out.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::config(format!("writing {}: {e}", path.display())))?;
    Ok(path)
}

/// Pretty JSON with a trailing newline, the format of every report file.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// A rayon pool honoring `HEATRATE_THREADS` (unset, empty, or 0 leaves
/// the rayon default).
pub fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HEATRATE_THREADS") {
        if !v.trim().is_empty() {
            let n: usize = v.trim().parse().map_err(|_| {
                Failure::config(format!(
                    "HEATRATE_THREADS must be a non-negative integer, got `{v}`"
                ))
            })?;
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

/// Joins presentation fields into one CSV line.
pub fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    fields
        .iter()
        .map(|f| f.as_ref())
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes `lines` (header first) to `name` in the output directory.
pub fn write_csv(cfg: &RunConfig, name: &str, lines: &[String]) -> Result<PathBuf, Failure> {
    let mut body = lines.join("\n");
    body.push('\n');
    write_out(cfg, name, &body)
}

pub use heatrate::sig17;

/// Resolved output path for the given report name (for messages).
pub fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.out).join(name)
}
