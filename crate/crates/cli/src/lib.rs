//! Experiment harness: JSON configs in, CSV tables, a JSON summary and SVG
//! plots out. Each experiment turns one family of numerical checks into a
//! list of named pass/fail assertions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod config;
pub mod experiments;
pub mod plot;
mod stats;

pub use bundle::{run_experiment, Check, ResultBundle};
pub use config::{Experiment, ExperimentConfig, ProfileSpec, TestFunction};
pub use plot::emit_plots;

use fdehydro_core::ensemble::EnsembleError;
use fdehydro_core::lattice::LatticeError;
use fdehydro_core::measures::MeasureError;
use fdehydro_core::mol::MolError;
use fdehydro_core::zrp::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed CSV {path}: {message}")]
    Csv { path: String, message: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mol(#[from] MolError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Self::Config { field: field.to_string(), message: message.into() }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}
