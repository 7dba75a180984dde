use crate::config::{Experiment, ExperimentConfig};
use crate::experiments::{self, Outcome};
use crate::plot::PlotSpec;
use crate::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// One named assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Everything a run produced. CSV contents depend only on the config, so
/// re-running a config reproduces them byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct ResultBundle {
    pub experiment: Experiment,
    pub version: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub csv: Vec<PathBuf>,
    pub metrics: serde_json::Value,
    pub checks: Vec<Check>,
    pub plots: Vec<PlotSpec>,
    pub elapsed_seconds: f64,
    pub passed: bool,
}

impl ResultBundle {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.out_dir.join("summary.json")
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialises")
    }
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}

/// Runs `experiment` (or the one named in the config), writes its CSV files
/// and `summary.json` under the output directory and returns the bundle.
pub fn run_experiment(config: &ExperimentConfig, experiment: Option<Experiment>) -> Result<ResultBundle, CliError> {
    let experiment = config.resolve(experiment)?;
    let out_dir = config.out_dir(experiment);
    let started = std::time::Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let outcome: Outcome = pool.install(|| experiments::dispatch(experiment, config))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let mut csv = Vec::with_capacity(outcome.tables.len());
    for (name, content) in &outcome.tables {
        let path = out_dir.join(name);
        write(&path, content)?;
        csv.push(path);
    }
    let passed = outcome.checks.iter().all(|c| c.passed);
    let bundle = ResultBundle {
        experiment,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config: config.clone(),
        out_dir,
        csv,
        metrics: outcome.metrics,
        checks: outcome.checks,
        plots: outcome.plots,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        passed,
    };
    write(&bundle.summary_path(), &bundle.summary_json())?;
    Ok(bundle)
}
