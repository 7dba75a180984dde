//! One function per experiment; each returns its tables, metrics, checks
//! and plot descriptions without touching the file system.

mod ldp;
mod mol;
mod particles;
mod spectral;

use crate::bundle::Check;
use crate::config::{Experiment, ExperimentConfig};
use crate::plot::PlotSpec;
use crate::CliError;

pub use ldp::{rate_lemma_sweeps, LemmaSweep};

#[derive(Debug, Default)]
pub struct Outcome {
    /// `(file name, contents)` pairs.
    pub tables: Vec<(String, String)>,
    pub metrics: serde_json::Value,
    pub checks: Vec<Check>,
    pub plots: Vec<PlotSpec>,
}

pub fn dispatch(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match experiment {
        Experiment::MolConvergence => mol::mol_convergence(cfg),
        Experiment::MolProperties => mol::mol_properties(cfg),
        Experiment::EntropyDecay => mol::entropy_decay(cfg),
        Experiment::HydroLimit => particles::hydro_limit(cfg),
        Experiment::OneBlock => particles::one_block(cfg),
        Experiment::Attractiveness => particles::attractiveness(cfg),
        Experiment::Concentration => ldp::concentration(cfg),
        Experiment::RateLemmas => ldp::rate_lemmas(cfg),
        Experiment::SpectralGap => spectral::spectral_gap(cfg),
    }
}

/// Comma-separated table with a fixed header.
pub(crate) struct Table {
    text: String,
    width: usize,
}

impl Table {
    pub(crate) fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub(crate) fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub(crate) fn finish(self, name: &str) -> (String, String) {
        (name.to_string(), self.text)
    }
}

/// Shortest round-trip representation.
pub(crate) fn num(v: f64) -> String {
    format!("{v:?}")
}
