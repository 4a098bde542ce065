//! CSV emission: per-repetition traces and the experiment summary.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::protocol::RegretTrace;

/// Bumped whenever the trace columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "cumulative_regret",
    "episode",
    "lambda_k",
    "beta_k",
    "norm_E_k",
    "norm_e_k",
    "theta_error",
    "min_eig_Lambda",
    "dp_noise_norm",
];

pub const SUMMARY_HEADER: [&str; 5] = [
    "config_id",
    "repetitions",
    "mean_final_regret",
    "std_final_regret",
    "failures",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Writes one row per step; episode-level columns repeat within an episode.
pub fn write_trace<W: Write>(out: W, trace: &RegretTrace) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (idx, regret) in trace.cumulative_regret.iter().enumerate() {
        let t = idx + 1;
        let mut row = vec![t.to_string(), regret.to_string()];
        match trace.episode_of(t) {
            Some(e) => row.extend([
                e.episode.to_string(),
                e.lambda_k.to_string(),
                e.beta_k.to_string(),
                e.norm_gram_error.to_string(),
                e.norm_feature_error.to_string(),
                e.theta_error.to_string(),
                e.min_eig_lambda.to_string(),
                e.dp_noise_norm.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 8)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &RegretTrace) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    write_trace(std::io::BufWriter::new(std::fs::File::create(path)?), trace)
}

/// Final-regret statistics of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config_id: String,
    pub repetitions: usize,
    pub mean_final_regret: f64,
    /// Sample standard deviation (zero for a single repetition).
    pub std_final_regret: f64,
    pub failures: usize,
}

impl SummaryRow {
    pub fn from_finals(config_id: impl Into<String>, finals: &[f64], failures: usize) -> Self {
        let n = finals.len();
        let mean = if n == 0 {
            f64::NAN
        } else {
            finals.iter().sum::<f64>() / n as f64
        };
        let std = if n < 2 {
            0.0
        } else {
            (finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self {
            config_id: config_id.into(),
            repetitions: n + failures,
            mean_final_regret: mean,
            std_final_regret: std,
            failures,
        }
    }
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.config_id.clone(),
            r.repetitions.to_string(),
            r.mean_final_regret.to_string(),
            r.std_final_regret.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_file(path: &Path, rows: &[SummaryRow]) -> Result<(), OutputError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    write_summary(std::io::BufWriter::new(std::fs::File::create(path)?), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let row = SummaryRow::from_finals("a", &[1.0, 3.0], 1);
        assert_eq!(row.mean_final_regret, 2.0);
        assert!((row.std_final_regret - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(row.repetitions, 3);
        let single = SummaryRow::from_finals("b", &[4.5], 0);
        assert_eq!(
            (single.mean_final_regret, single.std_final_regret),
            (4.5, 0.0)
        );
        let mut buf = Vec::new();
        write_summary(&mut buf, &[single]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "config_id,repetitions,mean_final_regret,std_final_regret,failures\nb,1,4.5,0,0\n"
        );
    }
}
