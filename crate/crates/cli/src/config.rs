use crate::CliError;
use fdehydro_core::ScalingParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Discrete scheme against the limiting equation, sup error per n.
    MolConvergence,
    /// Mass, maximum and comparison principles, energy, Poincaré.
    MolProperties,
    /// Empirical pairings of the particle system against the limit.
    HydroLimit,
    /// Time-averaged one-block statistic as n grows.
    OneBlock,
    /// Chernoff bounds against Monte Carlo tail frequencies.
    Concentration,
    /// Canonical-box gaps and equivalence of ensembles.
    SpectralGap,
    /// Closed-form relative entropy between scheme and limit.
    EntropyDecay,
    /// Grid sweeps of the rate-function inequalities.
    RateLemmas,
    /// Order preservation under the basic coupling.
    Attractiveness,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Self::MolConvergence,
        Self::MolProperties,
        Self::HydroLimit,
        Self::OneBlock,
        Self::Concentration,
        Self::SpectralGap,
        Self::EntropyDecay,
        Self::RateLemmas,
        Self::Attractiveness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MolConvergence => "mol-convergence",
            Self::MolProperties => "mol-properties",
            Self::HydroLimit => "hydro-limit",
            Self::OneBlock => "one-block",
            Self::Concentration => "concentration",
            Self::SpectralGap => "spectral-gap",
            Self::EntropyDecay => "entropy-decay",
            Self::RateLemmas => "rate-lemmas",
            Self::Attractiveness => "attractiveness",
        }
    }

    fn needs_scaling(self) -> bool {
        !matches!(self, Self::Concentration | Self::SpectralGap | Self::RateLemmas)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// Named initial-profile family on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `offset + amplitude·sin(2π·frequency·x)`.
    Sine {
        offset: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: u32,
    },
    Constant {
        value: f64,
    },
}

fn one() -> u32 {
    1
}

impl ProfileSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Sine { offset, amplitude, frequency } => offset + amplitude * (2.0 * PI * frequency as f64 * x).sin(),
            Self::Constant { value } => value,
        }
    }

    /// `inf u` over the torus.
    pub fn lower_bound(&self) -> f64 {
        match *self {
            Self::Sine { offset, amplitude, .. } => offset - amplitude.abs(),
            Self::Constant { value } => value,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        match *self {
            Self::Sine { offset, amplitude, .. } if !(offset - amplitude.abs() > 0.0) => Err(CliError::config(
                "profile",
                format!("offset - amplitude must be positive, got {offset} - {}", amplitude.abs()),
            )),
            Self::Constant { value } if !(value > 0.0) => {
                Err(CliError::config("profile", format!("constant profile must be positive, got {value}")))
            }
            _ => Ok(()),
        }
    }
}

/// Test function paired against empirical measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    One,
    Cos,
    Sin,
}

impl TestFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Cos => (2.0 * PI * x).cos(),
            Self::Sin => (2.0 * PI * x).sin(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::One => "one",
            Self::Cos => "cos",
            Self::Sin => "sin",
        }
    }
}

/// Either an explicit list of times or a count of equally spaced ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    Count(usize),
    Times(Vec<f64>),
}

/// One experiment run. Fields an experiment does not use are ignored;
/// fields it needs but that are missing produce a [`CliError::Config`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub scaling: Vec<ScalingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    /// Block size exponent, `ℓ = ⌊n^δ⌋`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<CheckpointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// Grid size of the reference solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ref: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<TestFunction>,
    /// Largest `ℓ + k` in the spectral sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sum: Option<usize>,
    /// Equivalence-of-ensembles table bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    /// Box size for concentration sums.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nalpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub upper_a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lower_a: Vec<f64>,
    /// Shared rings per coupled run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<u64>,
    /// Number of random initial profiles or ordered pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Number of random profiles for the Poincaré check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poincare_samples: Option<usize>,
    /// Added to the profile to build the upper member of ordered pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_shift: Option<f64>,
    /// Points per axis in grid sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

pub(crate) fn require<T: Copy>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::config(field, "missing"))
}

pub(crate) fn positive(value: Option<f64>, field: &str) -> Result<f64, CliError> {
    let v = require(value, field)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(field, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

pub(crate) fn at_least(value: Option<usize>, min: usize, field: &str) -> Result<usize, CliError> {
    let v = require(value, field)?;
    if v < min {
        return Err(CliError::config(field, format!("must be at least {min}, got {v}")));
    }
    Ok(v)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config("<root>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Picks the experiment from `requested` or the file, rejecting
    /// disagreement, then checks the fields that experiment relies on.
    pub fn resolve(&self, requested: Option<Experiment>) -> Result<Experiment, CliError> {
        let experiment = match (requested, self.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::config("experiment", format!("config is for `{b}`, not `{a}`")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(CliError::config("experiment", "missing")),
        };
        self.validate(experiment)?;
        Ok(experiment)
    }

    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if experiment.needs_scaling() && self.scaling.is_empty() {
            return Err(CliError::config("scaling", "list of (n, alpha) must not be empty"));
        }
        if let Some(p) = &self.profile {
            p.validate()?;
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config("t_end", format!("must be positive, got {t}")));
            }
        }
        if let Some(CheckpointSpec::Times(ts)) = &self.checkpoints {
            if ts.windows(2).any(|w| w[0] >= w[1]) || ts.first().is_some_and(|&t| t < 0.0) {
                return Err(CliError::config("checkpoints", "times must be nonnegative and strictly increasing"));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        if experiment == Experiment::OneBlock {
            let delta = positive(self.delta, "delta")?;
            for p in &self.scaling {
                if !(p.alpha() > 0.0 && 2.0 * p.alpha() + 3.0 * delta < 2.0) {
                    return Err(CliError::config(
                        "delta",
                        format!("need alpha > 0 and 2 alpha + 3 delta < 2, got alpha = {}, delta = {delta}", p.alpha()),
                    ));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn profile(&self) -> Result<ProfileSpec, CliError> {
        require(self.profile, "profile")
    }

    pub(crate) fn t_end(&self) -> Result<f64, CliError> {
        positive(self.t_end, "t_end")
    }

    pub(crate) fn replicas(&self) -> Result<usize, CliError> {
        at_least(self.replicas, 1, "replicas")
    }

    /// Checkpoint times in `[0, t_end]`. A count `k` gives `t_end·i/k` for
    /// `i = 0..=k`; an explicit list is clipped to `t_end`, and `t_end` is
    /// appended when missing.
    pub(crate) fn checkpoint_times(&self, t_end: f64) -> Result<Vec<f64>, CliError> {
        match self.checkpoints.as_ref().ok_or_else(|| CliError::config("checkpoints", "missing"))? {
            CheckpointSpec::Count(0) => Err(CliError::config("checkpoints", "count must be at least 1")),
            CheckpointSpec::Count(k) => Ok((0..=*k).map(|i| t_end * i as f64 / *k as f64).collect()),
            CheckpointSpec::Times(ts) => {
                let mut out: Vec<f64> = ts.iter().copied().filter(|&t| t <= t_end).collect();
                if out.last() != Some(&t_end) {
                    out.push(t_end);
                }
                Ok(out)
            }
        }
    }

    pub fn out_dir(&self, experiment: Experiment) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(experiment.name()))
    }
}
