//! Experiment drivers behind the `nrmh` command-line tool.
//!
//! Configuration files are UTF-8 text with one `key = value` per line and `#`
//! comments. Matrices are referenced as CSV paths, resolved relative to the
//! configuration file. Command-line flags take precedence over the file.

mod discrete;
mod gaussian;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::gauss::{DriftBudget, GaussianError};
use crate::io::CsvError;

pub use discrete::{run_discrete_demo, write_discrete_demo, DiscreteReport};
pub use gaussian::{run_gaussian, write_gaussian, ChainReport, GaussianReport, Scenario};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical invariant violated: {0}")]
    Invariant(GaussianError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl ExperimentError {
    /// 2 for configuration errors, 3 for invariant violations, 4 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Invariant(_) => 3,
            ExperimentError::Numerical(_) | ExperimentError::Output(_) => 4,
        }
    }

    /// Classifies an error raised while building or running a sampler.
    pub(crate) fn from_model(e: GaussianError) -> Self {
        match e {
            GaussianError::InvalidParams(m) => ExperimentError::Config(m),
            GaussianError::InvariantViolation { .. } | GaussianError::UnstableStepSize { .. } => {
                ExperimentError::Invariant(e)
            }
            other => ExperimentError::Numerical(other.to_string()),
        }
    }

    /// Classifies an error raised while loading user inputs.
    pub(crate) fn from_input(e: GaussianError) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

impl From<CsvError> for ExperimentError {
    fn from(e: CsvError) -> Self {
        ExperimentError::Output(e.to_string())
    }
}

impl From<DiagnosticsError> for ExperimentError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Csv(c) => c.into(),
            other => ExperimentError::Numerical(other.to_string()),
        }
    }
}

/// Where the skew matrix `S` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SkewSource {
    /// The known optimal `S` for the 3-dimensional benchmark.
    Benchmark3d,
    /// Numerical search, see [`crate::gauss::optimize_skew_drift`].
    Optimize,
    /// `S = 0`: reversible drift.
    Zero,
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Covariance CSV; the benchmark covariance of the subcommand when absent.
    pub covariance: Option<PathBuf>,
    /// Defaults per subcommand: `Benchmark3d` for 3D, `Optimize` for 9D.
    pub skew: Option<SkewSource>,
    pub steps: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub h: Option<f64>,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
    /// Also run the reversible Langevin baseline.
    pub baseline: bool,
    pub max_lag: usize,
    /// Keep every `trace_thin`-th state in `trace.csv` (statistics use every state).
    pub trace_thin: usize,
    pub start: Option<Vec<f64>>,
    pub drift_budget: DriftBudget,
    pub instances: usize,
    pub functions: usize,
    pub measures: usize,
    pub lambda: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            covariance: None,
            skew: None,
            steps: 1_000_000,
            seed: 1,
            out: PathBuf::from("out"),
            h: None,
            sigma: None,
            c: None,
            baseline: true,
            max_lag: 500,
            trace_thin: 100,
            start: None,
            drift_budget: DriftBudget::default(),
            instances: 50,
            functions: 8,
            measures: 4,
            lambda: 1.0,
        }
    }
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Config(format!("line {line}: {msg}"))
}

/// Raw `key = value` pairs; duplicate keys are an error.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>, ExperimentError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| config_err(idx + 1, "expected `key = value`"))?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(config_err(idx + 1, "empty key"));
        }
        if out.insert(key.clone(), (idx + 1, v.trim().to_string())).is_some() {
            return Err(config_err(idx + 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ExperimentError> {
    v.parse().map_err(|_| config_err(line, format!("cannot parse `{v}` for `{key}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, ExperimentError> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(config_err(line, format!("`{key}` expects true or false, got `{v}`"))),
    }
}

impl ExperimentConfig {
    /// Applies a configuration file's settings on top of `self`. Relative
    /// paths are resolved against `base`.
    pub fn apply_text(&mut self, text: &str, base: &Path) -> Result<(), ExperimentError> {
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (key, (line, v)) in parse_key_values(text)? {
            let v = v.as_str();
            match key.as_str() {
                "covariance" => self.covariance = Some(resolve(v)),
                "skew" => {
                    self.skew = Some(match v {
                        "benchmark-3d" => SkewSource::Benchmark3d,
                        "optimize" => SkewSource::Optimize,
                        "zero" => SkewSource::Zero,
                        path => SkewSource::Csv(resolve(path)),
                    })
                }
                "steps" => self.steps = parse_num(line, &key, v)?,
                "seed" => self.seed = parse_num(line, &key, v)?,
                "out" => self.out = resolve(v),
                "h" => self.h = Some(parse_num(line, &key, v)?),
                "sigma" => self.sigma = Some(parse_num(line, &key, v)?),
                "c" => self.c = Some(parse_num(line, &key, v)?),
                "baseline" => self.baseline = parse_bool(line, &key, v)?,
                "max_lag" => self.max_lag = parse_num(line, &key, v)?,
                "trace_thin" => self.trace_thin = parse_num(line, &key, v)?,
                "start" => {
                    let xs: Result<Vec<f64>, _> = v.split(',').map(|t| parse_num(line, &key, t.trim())).collect();
                    self.start = Some(xs?);
                }
                "restarts" => self.drift_budget.restarts = parse_num(line, &key, v)?,
                "iterations" => self.drift_budget.iterations = parse_num(line, &key, v)?,
                "optimizer_seed" => self.drift_budget.seed = parse_num(line, &key, v)?,
                "instances" => self.instances = parse_num(line, &key, v)?,
                "functions" => self.functions = parse_num(line, &key, v)?,
                "measures" => self.measures = parse_num(line, &key, v)?,
                "lambda" => self.lambda = parse_num(line, &key, v)?,
                other => return Err(config_err(line, format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ExperimentError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub(crate) fn check_common(&self) -> Result<(), ExperimentError> {
        if self.trace_thin == 0 {
            return Err(ExperimentError::Config("trace_thin must be positive".into()));
        }
        if self.lambda <= 0.0 || !self.lambda.is_finite() {
            return Err(ExperimentError::Config("lambda must be positive".into()));
        }
        Ok(())
    }
}
