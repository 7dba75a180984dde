use super::{num, Outcome, Table};
use crate::bundle::Check;
use crate::config::{at_least, positive, ExperimentConfig};
use crate::plot::{PlotSpec, Series, Style};
use crate::CliError;
use fdehydro_core::measures::{
    chernoff_lower, chernoff_upper, m_n, rate_comparison_quadratic, rate_comparison_scaled, rate_exponential,
    tilted_rate, tilted_rate_max, GeometricLaw, MnBound, RateFunctionParams,
};
use fdehydro_core::RngStream;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

const CHUNK: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Upper,
    Lower,
}

impl Tail {
    fn name(self) -> &'static str {
        match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
        }
    }
}

pub(crate) fn concentration(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let ell = at_least(cfg.ell, 1, "ell")?;
    let nalpha = positive(cfg.nalpha, "nalpha")?;
    let rho = positive(cfg.rho, "rho")?;
    let replicas = cfg.replicas()?;
    if cfg.upper_a.is_empty() && cfg.lower_a.is_empty() {
        return Err(CliError::config("upper_a", "no thresholds given in upper_a or lower_a"));
    }
    let params = RateFunctionParams::uniform(rho)?;
    let mut cases = Vec::new();
    for &a in &cfg.upper_a {
        cases.push((Tail::Upper, a, chernoff_upper(&params, nalpha, ell, a)?));
    }
    for &a in &cfg.lower_a {
        cases.push((Tail::Lower, a, chernoff_lower(&params, nalpha, ell, a)?));
    }
    let thresholds: Vec<f64> = cases.iter().map(|c| ell as f64 * c.1 * nalpha).collect();
    let law = GeometricLaw::scaled(rho, nalpha)?;

    // chunks have fixed boundaries and streams, so counts do not depend on
    // the thread count
    let chunks = replicas.div_ceil(CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::replica(cfg.seed, c as u64);
            let mut counts = vec![0u64; cases.len()];
            for _ in (c * CHUNK)..((c + 1) * CHUNK).min(replicas) {
                let s = (0..ell).map(|_| law.sample(&mut rng)).sum::<u64>() as f64;
                for (i, (tail, _, _)) in cases.iter().enumerate() {
                    let hit = match tail {
                        Tail::Upper => s >= thresholds[i],
                        Tail::Lower => s <= thresholds[i],
                    };
                    counts[i] += u64::from(hit);
                }
            }
            counts
        })
        .reduce(|| vec![0u64; cases.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());

    let mut table = Table::new(&["tail", "a", "threshold", "hits", "replicas", "frequency", "bound"]);
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (i, &(tail, a, bound)) in cases.iter().enumerate() {
        let freq = hits[i] as f64 / replicas as f64;
        table.row(&[
            tail.name().into(),
            num(a),
            num(thresholds[i]),
            hits[i].to_string(),
            replicas.to_string(),
            num(freq),
            num(bound),
        ]);
        checks.push(Check::new(
            format!("{} tail a = {a}: frequency <= Chernoff bound", tail.name()),
            freq <= bound,
            format!("frequency {freq:.3e}, bound {bound:.3e}"),
        ));
        rows.push(json!({ "tail": tail.name(), "a": a, "frequency": freq, "bound": bound }));
    }

    let mut plots = Vec::new();
    for tail in [Tail::Upper, Tail::Lower] {
        if cases.iter().any(|c| c.0 == tail) {
            let file = format!("concentration_{}.svg", tail.name());
            plots.push(
                PlotSpec::new(&file, &format!("{} tail frequency vs bound", tail.name()), "a", "probability")
                    .log_y()
                    .with(
                        Series::new("empirical", "concentration.csv", "a", "frequency", Style::Line)
                            .filtered("tail", tail.name()),
                    )
                    .with(
                        Series::new("Chernoff bound", "concentration.csv", "a", "bound", Style::Line)
                            .filtered("tail", tail.name()),
                    ),
            );
        }
    }

    Ok(Outcome {
        tables: vec![table.finish("concentration.csv")],
        metrics: json!({ "ell": ell, "nalpha": nalpha, "rho": rho, "replicas": replicas, "cases": rows }),
        checks,
        plots,
    })
}

/// Result of one inequality sweep. `min_slack` is the smallest value of
/// `rhs - lhs` seen; negative exactly when there are violations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSweep {
    pub lemma: &'static str,
    pub points: usize,
    pub violations: usize,
    pub min_slack: f64,
}

impl LemmaSweep {
    fn new(lemma: &'static str) -> Self {
        Self { lemma, points: 0, violations: 0, min_slack: f64::INFINITY }
    }

    fn record(&mut self, holds: bool, slack: f64) {
        self.points += 1;
        self.violations += usize::from(!holds);
        self.min_slack = self.min_slack.min(slack);
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

fn logspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    linspace(lo.ln(), hi.ln(), n).map(f64::exp)
}

/// Grid and random sweeps of the rate-function inequalities.
///
/// `grid` is the number of points per axis. The tilted-rate sweep draws
/// `trials` parameter sets with `z* > ρ/2`; draws outside that range are
/// still checked and reported under a separate name.
pub fn rate_lemma_sweeps(
    eps: f64,
    eps0: f64,
    grid: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<LemmaSweep>, CliError> {
    if grid < 2 {
        return Err(CliError::config("grid_points", "need at least 2 grid points"));
    }
    if !(eps < 1.0) {
        return Err(CliError::config("eps", format!("need eps < 1 so that [eps, 1/eps] is an interval, got {eps}")));
    }
    if !(eps0 < 10.0) {
        return Err(CliError::config("eps0", format!("need eps0 < 10, got {eps0}")));
    }
    let mut out = Vec::new();

    let bound = MnBound::new(eps, eps0)?;
    let mut mn = LemmaSweep::new("mn_bound");
    for nalpha in [1.0, 4.0, 32.0] {
        for u in logspace(eps, 1.0 / eps, grid) {
            let u = u.clamp(eps, 1.0 / eps);
            for v in logspace(eps0, 10.0, grid) {
                let v = v.max(eps0);
                let slack = bound.constant * rate_exponential(u, v)? - m_n(u, v, nalpha).abs();
                mn.record(bound.holds(u, v, nalpha)?, slack);
            }
        }
    }
    out.push(mn);

    let rhos = [0.5, 1.0, 2.0];
    let mut quad = LemmaSweep::new("rate_quadratic");
    for rho in rhos {
        // open at ρ/2
        for z in linspace(rho / 2.0, 20.0 * rho, grid + 1).skip(1) {
            let q = (z - rho) / rho;
            quad.record(rate_comparison_quadratic(rho, z)?, q * q - rate_exponential(rho, z)?);
        }
    }
    out.push(quad);

    let mut scaled = LemmaSweep::new("rate_scaled");
    for rho in rhos {
        for rho_plus in [rho, 1.5 * rho, 2.0 * rho] {
            let k_plus = (rho_plus / rho).powi(2);
            for a in linspace(k_plus * rho, 20.0 * rho, grid) {
                let a = a.max(k_plus * rho);
                let slack = 16.0 * k_plus * rate_exponential(rho_plus, a)? - rate_exponential(rho, a)?;
                scaled.record(rate_comparison_scaled(rho, rho_plus, a)?, slack);
            }
        }
    }
    out.push(scaled);

    let mut tilted = LemmaSweep::new("tilted_rate_max");
    let mut outside = LemmaSweep::new("tilted_rate_max_unrestricted");
    let mut rng = RngStream::new(seed);
    let log_uniform = |rng: &mut RngStream| (0.1f64.ln() + rng.uniform() * 50f64.ln()).exp();
    while tilted.points < trials {
        let rho = log_uniform(&mut rng);
        let rho_tilde = log_uniform(&mut rng);
        let kappa_tilde = rng.uniform_open0();
        let kappa = kappa_tilde * rng.uniform_open0();
        if !(kappa_tilde * rho > kappa * rho_tilde) {
            continue;
        }
        let m = tilted_rate_max(rho, rho_tilde, kappa, kappa_tilde)?;
        let z_lo = 1e-3 * rho.min(rho_tilde).min(m.z_star);
        let z_hi = 1e3 * rho.max(rho_tilde).max(m.z_star);
        let mut best = tilted_rate(rho, rho_tilde, kappa, kappa_tilde, m.z_star)?;
        for z in logspace(z_lo, z_hi, 20 * grid) {
            best = best.max(tilted_rate(rho, rho_tilde, kappa, kappa_tilde, z)?);
        }
        let slack = m.bound + 1e-9 - best;
        if m.bound_applies(rho) {
            tilted.record(slack >= 0.0, slack);
        } else {
            outside.record(slack >= 0.0, slack);
        }
    }
    out.push(tilted);
    out.push(outside);
    Ok(out)
}

pub(crate) fn rate_lemmas(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let eps = positive(cfg.eps, "eps")?;
    let eps0 = positive(cfg.eps0, "eps0")?;
    let grid = at_least(cfg.grid_points, 2, "grid_points")?;
    let trials = at_least(cfg.samples, 1, "samples")?;
    let sweeps = rate_lemma_sweeps(eps, eps0, grid, trials, cfg.seed)?;
    let mut table = Table::new(&["lemma", "points", "violations", "min_slack"]);
    let mut checks = Vec::new();
    for s in &sweeps {
        table.row(&[s.lemma.into(), s.points.to_string(), s.violations.to_string(), num(s.min_slack)]);
        // outside its hypothesis the tilted bound is only reported
        if s.lemma != "tilted_rate_max_unrestricted" {
            checks.push(Check::new(
                format!("{}: zero violations", s.lemma),
                s.violations == 0,
                format!("{} of {} points violate, min slack {:.3e}", s.violations, s.points, s.min_slack),
            ));
        }
    }
    Ok(Outcome {
        tables: vec![table.finish("rate_lemmas.csv")],
        metrics: json!({ "eps": eps, "eps0": eps0, "grid_points": grid, "trials": trials, "sweeps": sweeps }),
        checks,
        plots: Vec::new(),
    })
}
