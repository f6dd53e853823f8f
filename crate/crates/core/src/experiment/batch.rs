use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{summarize, write_summary, write_trials_file, TrialRow};
use crate::engine::{run_trial_metrics, TrialConfig, TrialResult};
use crate::error::{Error, Result};
use crate::policy::Algorithm;

/// Caps the number of worker threads a batch may use.
pub const THREADS_ENV: &str = "PATROLSIM_THREADS";

/// A sweep over algorithms and robot counts. Trial `i` of every cell runs
/// with seed `base_seed + i`, so cells with the same index share their
/// initial deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchSpec {
    pub algorithms: Vec<Algorithm>,
    pub robot_counts: Vec<usize>,
    pub trials: u64,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Shared settings; `robots`, `seed` and `algorithm` are overwritten
    /// per trial.
    pub config: TrialConfig,
}

impl Default for BatchSpec {
    fn default() -> Self {
        BatchSpec {
            algorithms: Algorithm::ALL.to_vec(),
            robot_counts: vec![4, 8, 12],
            trials: 10,
            base_seed: 0,
            output_dir: PathBuf::from("results"),
            config: TrialConfig::default(),
        }
    }
}

impl BatchSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BatchSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::Input("batch file lists no algorithms".into()));
        }
        if self.robot_counts.is_empty() {
            return Err(Error::Input("batch file lists no robot counts".into()));
        }
        if self.trials == 0 {
            return Err(Error::Input("batch file asks for zero trials".into()));
        }
        if self.base_seed.checked_add(self.trials - 1).is_none() {
            return Err(Error::Input("seed range overflows".into()));
        }
        Ok(())
    }

    /// Every trial configuration, ordered by algorithm, N and seed.
    pub fn configs(&self) -> Vec<TrialConfig> {
        let mut algorithms = self.algorithms.clone();
        algorithms.sort();
        algorithms.dedup();
        let mut counts = self.robot_counts.clone();
        counts.sort();
        counts.dedup();
        let mut out = Vec::new();
        for &algorithm in &algorithms {
            for &robots in &counts {
                for i in 0..self.trials {
                    out.push(TrialConfig {
                        algorithm,
                        robots,
                        seed: self.base_seed + i,
                        ..self.config.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub algorithm: Algorithm,
    pub robots: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    /// Successful trials, ordered by algorithm, N and seed.
    pub results: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
}

impl BatchOutcome {
    pub fn rows(&self) -> Vec<TrialRow> {
        self.results.iter().map(TrialRow::from).collect()
    }

    /// Writes `trials.csv` and, when any trial succeeded, `summary.csv`
    /// into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let rows = self.rows();
        write_trials_file(&dir.join("trials.csv"), &rows)?;
        if !rows.is_empty() {
            let path = dir.join("summary.csv");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_summary(std::io::BufWriter::new(file), &summarize(&rows)?)?;
        }
        Ok(())
    }
}

/// Reads the thread cap from the environment. Unset means no cap.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Input(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Input(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs every trial of `spec`, on at most `threads` workers. A failing
/// trial does not stop the others.
pub fn run_batch(spec: &BatchSpec, threads: Option<usize>) -> Result<BatchOutcome> {
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Input(format!("cannot start worker threads: {e}")))?;

    let configs = spec.configs();
    // collect() keeps input order, so output does not depend on scheduling
    let outcomes: Vec<Result<TrialResult>> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| run_trial_metrics(c.clone()))
            .collect()
    });

    let mut out = BatchOutcome::default();
    for (config, outcome) in configs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => out.results.push(r),
            Err(e) => out.failures.push(TrialFailure {
                algorithm: config.algorithm,
                robots: config.robots,
                seed: config.seed,
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}
