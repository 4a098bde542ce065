//! The `run` and `sweep` commands, independent of any argument parser.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use super::config::{apply_override, set_path, ConfigError, ExperimentConfig, ResolvedExperiment};
use super::output::{write_summary_file, write_trace_file, OutputError, SummaryRow};
use crate::protocol::{run_experiment, RegretTrace, RunError};

/// Process exit codes of the command-line driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 1,
    RuntimeError = 2,
    InvariantFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Runs `f` on a pool of `jobs` threads (`0` picks the rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Every repetition of one experiment, in repetition order.
pub fn run_repetitions(resolved: &ResolvedExperiment) -> Vec<Result<RegretTrace, RunError>> {
    (0..resolved.repetitions)
        .into_par_iter()
        .map(|j| run_experiment(&resolved.run_spec(j)))
        .collect()
}

/// Outcome of one experiment with its summary row.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub results: Vec<Result<RegretTrace, RunError>>,
    pub summary: SummaryRow,
}

impl ExperimentOutcome {
    pub fn from_results(config_id: &str, results: Vec<Result<RegretTrace, RunError>>) -> Self {
        let finals: Vec<f64> = results
            .iter()
            .filter_map(|r| r.as_ref().ok().map(RegretTrace::final_regret))
            .collect();
        let failures = results.len() - finals.len();
        Self {
            summary: SummaryRow::from_finals(config_id, &finals, failures),
            results,
        }
    }

    pub fn failures(&self) -> usize {
        self.summary.failures
    }

    /// Writes `{name}_rep{j}.csv` per repetition (partial traces for failures).
    pub fn write_traces(&self, dir: &Path, name: &str) -> Result<(), OutputError> {
        for (j, r) in self.results.iter().enumerate() {
            let trace = match r {
                Ok(t) => t,
                Err(e) => &e.partial,
            };
            write_trace_file(&dir.join(format!("{name}_rep{j}.csv")), trace)?;
        }
        Ok(())
    }
}

pub fn run_resolved(resolved: &ResolvedExperiment, config_id: &str) -> ExperimentOutcome {
    ExperimentOutcome::from_results(config_id, run_repetitions(resolved))
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

/// `run`: every repetition, one CSV each, plus `summary.csv`.
pub fn run_command(opts: &RunOptions, log: &mut dyn Write) -> ExitStatus {
    let cfg = match ExperimentConfig::load(&opts.config, &opts.overrides) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(log, "configuration error: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(log, "configuration error: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let dir = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = with_jobs(opts.jobs, || run_resolved(&resolved, &cfg.output.name));
    let written = outcome.write_traces(&dir, &cfg.output.name).and_then(|_| {
        write_summary_file(
            &dir.join("summary.csv"),
            std::slice::from_ref(&outcome.summary),
        )
    });
    if let Err(e) = written {
        let _ = writeln!(log, "cannot write output: {e}");
        return ExitStatus::RuntimeError;
    }
    for (j, r) in outcome.results.iter().enumerate() {
        if let Err(e) = r {
            let _ = writeln!(log, "repetition {j} failed: {e}");
        }
    }
    if outcome.failures() > 0 {
        ExitStatus::RuntimeError
    } else {
        ExitStatus::Success
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub values: Vec<Value>,
}

/// A base configuration and the axes whose cross product forms the cells.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Inline configuration, or a path relative to the sweep file.
    pub base: Value,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut spec: SweepSpec = serde_json::from_str(&text)?;
        if let Value::String(rel) = &spec.base {
            let base_path = path.parent().unwrap_or(Path::new(".")).join(rel);
            let text = std::fs::read_to_string(&base_path).map_err(|source| ConfigError::Io {
                path: base_path.display().to_string(),
                source,
            })?;
            spec.base = serde_json::from_str(&text)?;
        }
        Ok(spec)
    }

    /// Cell configurations in row-major order (last axis fastest) with their ids.
    pub fn cells(&self, overrides: &[String]) -> Result<Vec<(String, Value)>, ConfigError> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(ConfigError::Invalid(
                "a sweep needs at least one axis with values".into(),
            ));
        }
        let mut base = self.base.clone();
        for o in overrides {
            apply_override(&mut base, o)?;
        }
        let mut cells = vec![(Vec::<String>::new(), base)];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(cells.len() * axis.values.len());
            for (ids, cfg) in &cells {
                for value in &axis.values {
                    let mut cfg = cfg.clone();
                    set_path(&mut cfg, &axis.path, value.clone())?;
                    let mut ids = ids.clone();
                    ids.push(format!("{}={}", axis.path, value));
                    next.push((ids, cfg));
                }
            }
            cells = next;
        }
        Ok(cells
            .into_iter()
            .map(|(ids, cfg)| (ids.join(";"), cfg))
            .collect())
    }
}

/// One sweep cell: either a configuration error or the experiment outcome.
#[derive(Debug)]
pub struct CellOutcome {
    pub index: usize,
    pub config_id: String,
    pub outcome: Result<ExperimentOutcome, ConfigError>,
}

impl CellOutcome {
    pub fn summary(&self, repetitions: usize) -> SummaryRow {
        match &self.outcome {
            Ok(o) => SummaryRow {
                config_id: self.config_id.clone(),
                ..o.summary.clone()
            },
            Err(_) => SummaryRow::from_finals(self.config_id.clone(), &[], repetitions),
        }
    }
}

/// Runs every cell; cell failures are recorded and do not stop the sweep.
pub fn run_sweep(spec: &SweepSpec, overrides: &[String]) -> Result<Vec<CellOutcome>, ConfigError> {
    let cells = spec.cells(overrides)?;
    Ok(cells
        .into_par_iter()
        .enumerate()
        .map(|(index, (config_id, value))| {
            let outcome = ExperimentConfig::from_value(value)
                .and_then(|cfg| cfg.resolve())
                .map(|resolved| run_resolved(&resolved, &config_id));
            CellOutcome {
                index,
                config_id,
                outcome,
            }
        })
        .collect())
}

/// `sweep`: one directory per cell and a combined `summary.csv`.
pub fn sweep_command(opts: &RunOptions, log: &mut dyn Write) -> ExitStatus {
    let spec = match SweepSpec::load(&opts.config) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(log, "sweep configuration error: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let cells = match with_jobs(opts.jobs, || run_sweep(&spec, &opts.overrides)) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(log, "sweep configuration error: {e}");
            return ExitStatus::ConfigError;
        }
    };
    let dir = opts.out.clone().unwrap_or_else(|| {
        let d = spec
            .base
            .pointer("/output/dir")
            .and_then(Value::as_str)
            .unwrap_or("out");
        PathBuf::from(d)
    });
    let reps = spec
        .base
        .get("repetitions")
        .and_then(Value::as_u64)
        .unwrap_or(1) as usize;
    let mut rows = Vec::with_capacity(cells.len());
    let mut failed = false;
    for cell in &cells {
        match &cell.outcome {
            Ok(o) => {
                if let Err(e) = o.write_traces(&dir.join(format!("cell_{}", cell.index)), "run") {
                    let _ = writeln!(log, "cannot write output: {e}");
                    return ExitStatus::RuntimeError;
                }
                failed |= o.failures() > 0;
            }
            Err(e) => {
                let _ = writeln!(log, "cell {} ({}) failed: {e}", cell.index, cell.config_id);
                failed = true;
            }
        }
        rows.push(cell.summary(reps));
    }
    if let Err(e) = write_summary_file(&dir.join("summary.csv"), &rows) {
        let _ = writeln!(log, "cannot write output: {e}");
        return ExitStatus::RuntimeError;
    }
    if failed {
        ExitStatus::RuntimeError
    } else {
        ExitStatus::Success
    }
}
