use super::{num, Outcome, Table};
use crate::bundle::Check;
use crate::config::{at_least, positive, require, CheckpointSpec, ExperimentConfig, TestFunction};
use crate::plot::{PlotSpec, Series, Style};
use crate::stats::{mean, std_error, strictly_decreasing};
use crate::CliError;
use fdehydro_core::mol::{reference_fde_solve, IntegratorOptions};
use fdehydro_core::zrp::{
    empirical_pairing, one_block_statistic, sample_product_measure, sample_product_measure_pair, CoupledState,
    SimError, SimState,
};
use fdehydro_core::{DensityProfile, RngStream, ScalingParams};
use rayon::prelude::*;
use serde_json::json;

fn functions(cfg: &ExperimentConfig) -> Result<&[TestFunction], CliError> {
    if cfg.functions.is_empty() {
        return Err(CliError::config("functions", "list of test functions must not be empty"));
    }
    Ok(&cfg.functions)
}

/// Replica streams are keyed by scaling index and replica index, so adding
/// an `n` to the list does not change the draws of the others.
fn replica_rng(seed: u64, scaling_index: usize, replica: usize) -> RngStream {
    RngStream::replica(seed, ((scaling_index as u64) << 32) | replica as u64)
}

pub(crate) fn hydro_limit(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let n_ref = at_least(cfg.n_ref, 2, "n_ref")?;
    let t_end = cfg.t_end()?;
    let replicas = cfg.replicas()?;
    let fs = functions(cfg)?;
    let u0 = |x: f64| profile.eval(x);
    let reference = reference_fde_solve(u0, n_ref, t_end, &[t_end], IntegratorOptions::default())?;
    let r_last = reference.profiles()[0].values();
    let targets: Vec<f64> = fs
        .iter()
        .map(|f| {
            r_last.iter().enumerate().map(|(x, u)| u * f.eval(x as f64 / n_ref as f64)).sum::<f64>() / n_ref as f64
        })
        .collect();

    let mut rows = Table::new(&["n", "replica", "function", "initial_pairing", "pairing", "target", "error", "events"]);
    let mut summary =
        Table::new(&["n", "function", "mean_pairing", "target", "mean_error", "mean_abs_error", "se", "sigma_initial"]);
    let mut checks = Vec::new();
    let mut per_function: Vec<Vec<f64>> = vec![Vec::new(); fs.len()];
    let mut conserved = true;
    let mut metrics_rows = Vec::new();

    for (pi, p) in cfg.scaling.iter().enumerate() {
        let init = DensityProfile::from_fn(p.n(), u0)?;
        // standard deviation of the F = 1 pairing under the initial product law
        let var: f64 = init.values().iter().map(|&u| p.n_alpha() * u * (1.0 + p.n_alpha() * u)).sum();
        let sigma_one = var.sqrt() / (p.n() as f64 * p.n_alpha());
        let results = (0..replicas)
            .into_par_iter()
            .map(|r| -> Result<(Vec<f64>, Vec<f64>, u64), CliError> {
                let mut rng = replica_rng(cfg.seed, pi, r);
                let eta0 = sample_product_measure(&init, p, &mut rng)?;
                let before: Vec<f64> = fs.iter().map(|f| empirical_pairing(&eta0, |x| f.eval(x), p)).collect();
                let mut sim = SimState::new(eta0, *p, rng.split(1))?;
                let rec = sim.simulate(t_end, &[t_end])?;
                let eta = &rec.snapshots()[0];
                let after: Vec<f64> = fs.iter().map(|f| empirical_pairing(eta, |x| f.eval(x), p)).collect();
                Ok((before, after, rec.event_count()))
            })
            .collect::<Result<Vec<_>, _>>()?;

        for (fi, f) in fs.iter().enumerate() {
            let errors: Vec<f64> = results.iter().map(|(_, a, _)| a[fi] - targets[fi]).collect();
            for (r, (b, a, ev)) in results.iter().enumerate() {
                rows.row(&[
                    p.n().to_string(),
                    r.to_string(),
                    f.name().into(),
                    num(b[fi]),
                    num(a[fi]),
                    num(targets[fi]),
                    num(a[fi] - targets[fi]),
                    ev.to_string(),
                ]);
                if *f == TestFunction::One && b[fi] != a[fi] {
                    conserved = false;
                }
            }
            let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
            let (m, mabs, se) = (mean(&errors), mean(&abs), std_error(&errors));
            summary.row(&[
                p.n().to_string(),
                f.name().into(),
                num(mean(&results.iter().map(|(_, a, _)| a[fi]).collect::<Vec<_>>())),
                num(targets[fi]),
                num(m),
                num(mabs),
                num(se),
                num(sigma_one),
            ]);
            per_function[fi].push(mabs);
            metrics_rows
                .push(json!({"n": p.n(), "function": f.name(), "mean_error": m, "mean_abs_error": mabs, "se": se}));
            if *f == TestFunction::One {
                let bound = 3.0 * sigma_one / (replicas as f64).sqrt();
                checks.push(Check::new(
                    format!("n = {}: F = 1 replica-mean error within 3 sigma of initial sampling", p.n()),
                    m.abs() <= bound,
                    format!("|{m:e}| vs {bound:e}"),
                ));
            }
        }
    }
    for (fi, f) in fs.iter().enumerate() {
        checks.push(Check::new(
            format!("F = {}: mean |pairing error| strictly decreasing in n", f.name()),
            strictly_decreasing(&per_function[fi]),
            format!("{:?}", per_function[fi]),
        ));
    }
    if fs.contains(&TestFunction::One) {
        checks.push(Check::new(
            "F = 1 pairing conserved along every trajectory",
            conserved,
            format!("{replicas} replicas per n"),
        ));
    }
    let mut plot = PlotSpec::new("hydro_limit.svg", "Pairing error at t_end", "n", "error").log_x();
    for f in fs {
        plot = plot
            .with(
                Series::new(format!("replicas, F = {}", f.name()), "hydro_limit.csv", "n", "error", Style::Points)
                    .filtered("function", f.name()),
            )
            .with(
                Series::new(
                    format!("mean |error|, F = {}", f.name()),
                    "hydro_limit_summary.csv",
                    "n",
                    "mean_abs_error",
                    Style::Line,
                )
                .filtered("function", f.name()),
            );
    }
    Ok(Outcome {
        tables: vec![rows.finish("hydro_limit.csv"), summary.finish("hydro_limit_summary.csv")],
        metrics: json!({"t_end": t_end, "targets": targets, "summary": metrics_rows}),
        checks,
        plots: vec![plot],
    })
}

/// `ℓ = ⌊n^δ⌋`, at least 2.
pub fn block_size(n: usize, delta: f64) -> usize {
    ((n as f64).powf(delta) + 1e-9).floor().max(2.0) as usize
}

/// Replica mean and standard error of both statistics at one `n`.
struct BlockSummary {
    n: usize,
    ell: usize,
    replacement: (f64, f64),
    cutoff: (f64, f64),
}

pub(crate) fn one_block(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let delta = positive(cfg.delta, "delta")?;
    let m_cutoff = positive(cfg.m_cutoff, "m_cutoff")?;
    let t_end = cfg.t_end()?;
    let replicas = cfg.replicas()?;
    let f = functions(cfg)?[0];
    let k = match cfg.checkpoints {
        Some(CheckpointSpec::Count(k)) if k >= 1 => k,
        _ => return Err(CliError::config("checkpoints", "one-block needs a positive checkpoint count")),
    };
    // left Riemann sum over [0, t_end)
    let times: Vec<f64> = (0..k).map(|i| t_end * i as f64 / k as f64).collect();

    let mut rows = Table::new(&["n", "ell", "replica", "replacement", "cutoff", "events"]);
    let mut summary = Table::new(&["n", "ell", "mean_replacement", "se_replacement", "mean_cutoff", "se_cutoff"]);
    let mut stats = Vec::new();
    for (pi, p) in cfg.scaling.iter().enumerate() {
        let ell = block_size(p.n(), delta);
        let init = DensityProfile::from_fn(p.n(), |x| profile.eval(x))?;
        let f_values: Vec<f64> = (0..p.n()).map(|x| f.eval(x as f64 / p.n() as f64)).collect();
        let results = (0..replicas)
            .into_par_iter()
            .map(|r| -> Result<(f64, f64, u64), CliError> {
                let mut rng = replica_rng(cfg.seed, pi, r);
                let eta0 = sample_product_measure(&init, p, &mut rng)?;
                let mut sim = SimState::new(eta0, *p, rng.split(1))?;
                let (mut rep, mut cut) = (0.0, 0.0);
                let mut failure = None;
                let events = sim.simulate_observed(t_end, &times, |_, c| {
                    match one_block_statistic(c, ell, &f_values, p, m_cutoff) {
                        Ok(s) => {
                            rep += s.replacement;
                            cut += s.cutoff;
                        }
                        Err(e) => failure = Some(e),
                    }
                })?;
                if let Some(e) = failure {
                    return Err(e.into());
                }
                Ok(((rep / k as f64).abs(), (cut / k as f64).abs(), events))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (r, (rep, cut, ev)) in results.iter().enumerate() {
            rows.row(&[p.n().to_string(), ell.to_string(), r.to_string(), num(*rep), num(*cut), ev.to_string()]);
        }
        let reps: Vec<f64> = results.iter().map(|x| x.0).collect();
        let cuts: Vec<f64> = results.iter().map(|x| x.1).collect();
        let s = BlockSummary {
            n: p.n(),
            ell,
            replacement: (mean(&reps), std_error(&reps)),
            cutoff: (mean(&cuts), std_error(&cuts)),
        };
        summary.row(&[
            s.n.to_string(),
            s.ell.to_string(),
            num(s.replacement.0),
            num(s.replacement.1),
            num(s.cutoff.0),
            num(s.cutoff.1),
        ]);
        stats.push(s);
    }
    let significant = |pick: fn(&BlockSummary) -> (f64, f64)| {
        stats.windows(2).all(|w| {
            let ((a, sa), (b, sb)) = (pick(&w[0]), pick(&w[1]));
            a - b > 2.0 * (sa * sa + sb * sb).sqrt()
        })
    };
    let describe = |pick: fn(&BlockSummary) -> (f64, f64)| {
        stats.iter().map(|s| format!("n={}: {:.4e} ± {:.1e}", s.n, pick(s).0, pick(s).1)).collect::<Vec<_>>().join("; ")
    };
    let checks = vec![Check::new(
        "time-averaged |replacement statistic| decreases in n at 2 sigma",
        significant(|s| s.replacement),
        describe(|s| s.replacement),
    )];
    let metrics = json!({
        "statistics": stats.iter().map(|s| json!({
            "n": s.n, "ell": s.ell,
            "mean_replacement": s.replacement.0, "se_replacement": s.replacement.1,
            "mean_cutoff": s.cutoff.0, "se_cutoff": s.cutoff.1,
        })).collect::<Vec<_>>(),
        "cutoff_decreases_at_2_sigma": significant(|s| s.cutoff),
        "cutoff_trend": describe(|s| s.cutoff),
    });
    let plot = PlotSpec::new("one_block.svg", "Time-averaged one-block statistics", "n", "|statistic|")
        .log_x()
        .log_y()
        .with(Series::new("replacement, replicas", "one_block.csv", "n", "replacement", Style::Points))
        .with(Series::new("replacement, mean", "one_block_summary.csv", "n", "mean_replacement", Style::Line))
        .with(Series::new("cutoff V, mean", "one_block_summary.csv", "n", "mean_cutoff", Style::Line));
    Ok(Outcome {
        tables: vec![rows.finish("one_block.csv"), summary.finish("one_block_summary.csv")],
        metrics,
        checks,
        plots: vec![plot],
    })
}

pub(crate) fn attractiveness(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let shift = positive(cfg.upper_shift, "upper_shift")?;
    let pairs = at_least(cfg.samples, 1, "samples")?;
    let events = require(cfg.events, "events")?;

    let mut rows = Table::new(&[
        "n",
        "pair",
        "rings",
        "lower_events",
        "upper_events",
        "lower_total",
        "upper_total",
        "violations",
        "ordered",
    ]);
    let (mut violations, mut all_ordered, mut all_rings) = (0u64, true, true);
    for (pi, p) in cfg.scaling.iter().enumerate() {
        let lo = DensityProfile::from_fn(p.n(), |x| profile.eval(x))?;
        let hi = DensityProfile::from_fn(p.n(), |x| profile.eval(x) + shift)?;
        let results = (0..pairs)
            .into_par_iter()
            .map(|i| coupled_run(p, &lo, &hi, events, replica_rng(cfg.seed, pi, i)))
            .collect::<Result<Vec<_>, _>>()?;
        for (i, r) in results.iter().enumerate() {
            rows.row(&[
                p.n().to_string(),
                i.to_string(),
                r.rings.to_string(),
                r.lower_events.to_string(),
                r.upper_events.to_string(),
                r.lower_total.to_string(),
                r.upper_total.to_string(),
                r.violations.to_string(),
                r.ordered.to_string(),
            ]);
            violations += r.violations;
            all_ordered &= r.ordered;
            all_rings &= r.rings == events;
        }
    }
    let checks = vec![
        Check::new("zero order violations under the coupling", violations == 0, format!("{violations} violations")),
        Check::new("every pair ordered at the end", all_ordered, format!("{pairs} pairs per n")),
        Check::new("every pair ran the requested number of rings", all_rings, format!("{events} rings")),
    ];
    Ok(Outcome {
        tables: vec![rows.finish("attractiveness.csv")],
        metrics: json!({"violations": violations, "pairs": pairs * cfg.scaling.len(), "events": events}),
        checks,
        plots: vec![PlotSpec::new("attractiveness.svg", "Particle totals per coupled pair", "pair", "total")
            .with(Series::new("lower", "attractiveness.csv", "pair", "lower_total", Style::Points))
            .with(Series::new("upper", "attractiveness.csv", "pair", "upper_total", Style::Points))],
    })
}

struct CoupledRun {
    rings: u64,
    lower_events: u64,
    upper_events: u64,
    lower_total: u64,
    upper_total: u64,
    violations: u64,
    ordered: bool,
}

fn coupled_run(
    p: &ScalingParams,
    lo: &DensityProfile,
    hi: &DensityProfile,
    events: u64,
    mut rng: RngStream,
) -> Result<CoupledRun, CliError> {
    let (a, b) = sample_product_measure_pair(lo, hi, p, &mut rng)?;
    let lower = SimState::new(a, *p, rng.split(1))?;
    let upper = SimState::new(b, *p, rng.split(2))?;
    let mut c = CoupledState::new(lower, upper)?;
    let (rings, violations) = match c.run_events(events) {
        Ok(done) => (done, 0),
        Err(SimError::OrderViolation { event, .. }) => (event, 1),
        Err(e) => return Err(e.into()),
    };
    Ok(CoupledRun {
        rings,
        lower_events: c.lower().event_count(),
        upper_events: c.upper().event_count(),
        lower_total: c.lower().config().total(),
        upper_total: c.upper().config().total(),
        violations,
        ordered: c.is_ordered()?,
    })
}
