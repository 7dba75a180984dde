use super::{num, Outcome, Table};
use crate::bundle::Check;
use crate::config::{at_least, positive, CheckpointSpec, ExperimentConfig};
use crate::plot::{PlotSpec, Series, Style};
use crate::stats::{log_log_slope, strictly_decreasing};
use crate::CliError;
use fdehydro_core::measures::relative_entropy_geometric_products;
use fdehydro_core::mol::{
    holder_half_constant, poincare_ratio, psi_field_with, reference_fde_solve, sup_error, time_window,
    IntegratorOptions, MolProblem, MolSolution, Nonlinearity,
};
use fdehydro_core::{DensityProfile, RngStream, ScalingParams};
use rayon::prelude::*;
use serde_json::json;

const MASS_TOL: f64 = 1e-10;
const ENERGY_TOL: f64 = 1e-9;
const MAX_PRINCIPLE_TOL: f64 = 1e-12;
const COMPARISON_TOL: f64 = 1e-9;
const SELF_CONSISTENCY_TOL: f64 = 1e-3;

fn checkpoint_count(cfg: &ExperimentConfig) -> Result<usize, CliError> {
    match cfg.checkpoints {
        Some(CheckpointSpec::Count(k)) if k >= 1 => Ok(k),
        _ => Err(CliError::config("checkpoints", "this experiment needs a positive checkpoint count")),
    }
}

fn uniform_grid(t: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t * i as f64 / k as f64).collect()
}

fn check_divides(n_ref: usize, scaling: &[ScalingParams]) -> Result<(), CliError> {
    match scaling.iter().find(|p| !n_ref.is_multiple_of(p.n())) {
        Some(p) => Err(CliError::config("n_ref", format!("{n_ref} is not a multiple of n = {}", p.n()))),
        None => Ok(()),
    }
}

/// Per-step record kept while integrating one discrete run.
#[derive(Default)]
struct StepMonitor {
    energy_rise: f64,
    last_energy: Option<f64>,
    max_psi: Vec<(f64, f64)>,
    max_rate: f64,
}

impl StepMonitor {
    fn observe(&mut self, nl: &Nonlinearity, t: f64, u: &[f64]) {
        let e = fdehydro_core::mol::energy_with(nl, u);
        if let Some(prev) = self.last_energy {
            self.energy_rise = self.energy_rise.max(e - prev);
        }
        self.last_energy = Some(e);
        let psi = psi_field_with(nl, u);
        let sup = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rate = psi.iter().zip(u).map(|(p, &v)| (p / nl.phi_prime(v)).abs()).fold(0.0f64, f64::max);
        self.max_psi.push((t, sup));
        self.max_rate = self.max_rate.max(rate);
    }
}

struct ConvergenceRun {
    n: usize,
    solution: MolSolution,
    sup_error: f64,
    window: f64,
    psi_bar: f64,
    u_bar: f64,
    psi0: f64,
    monitor: StepMonitor,
}

pub(crate) fn mol_convergence(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let n_ref = at_least(cfg.n_ref, 2, "n_ref")?;
    let t_cap = cfg.t_end()?;
    let k = checkpoint_count(cfg)?;
    check_divides(n_ref, &cfg.scaling)?;
    let u0 = |x: f64| profile.eval(x);
    let opts = IntegratorOptions::default();

    let mut windows = Vec::with_capacity(cfg.scaling.len());
    for p in &cfg.scaling {
        windows.push(time_window(&DensityProfile::from_fn(p.n(), u0)?, p)?);
    }
    let t_star = windows.iter().map(|w| w.t.to_f64()).fold(t_cap, f64::min);
    let cps = uniform_grid(t_star, k);

    let reference = reference_fde_solve(u0, n_ref, t_star, &cps, opts)?;
    let half = if n_ref % 2 == 0 { Some(reference_fde_solve(u0, n_ref / 2, t_star, &cps, opts)?) } else { None };
    let self_consistency = half.as_ref().map(|h| sup_error(h, &reference, t_star)).transpose()?;

    let runs = cfg
        .scaling
        .par_iter()
        .zip(&windows)
        .map(|(p, w)| -> Result<ConvergenceRun, CliError> {
            let init = DensityProfile::from_fn(p.n(), u0)?;
            let problem = MolProblem::new(p, init)?.with_options(opts);
            let nl = *problem.nonlinearity();
            let mut monitor = StepMonitor::default();
            monitor.observe(&nl, 0.0, problem.initial().values());
            let psi0 = monitor.max_psi[0].1;
            let solution = problem.solve_monitored(t_star, &cps, |t, u| monitor.observe(&nl, t, u))?;
            let sup_error = sup_error(&solution, &reference, t_star)?;
            Ok(ConvergenceRun {
                n: p.n(),
                solution,
                sup_error,
                window: w.t.to_f64(),
                psi_bar: w.psi_bar,
                u_bar: w.u_bar,
                psi0,
                monitor,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["n", "sup_error", "t_window", "psi_bar", "u_bar", "accepted", "rejected"]);
    let mut diag = Table::new(&["n", "time", "mass", "energy", "min", "max", "sup_psi", "sup_f", "holder_half"]);
    let mut prof = Table::new(&["n", "site", "x", "u_scheme", "u_reference"]);
    let (mut mass_drift, mut energy_rise): (f64, f64) = (0.0, 0.0);
    let (mut psi_contract, mut psi_derivation, mut rate_bound) = (true, true, true);
    let mut psi_details = Vec::new();
    let r_last = reference.profiles().last().expect("reference has checkpoints").values();
    for run in &runs {
        let s = run.solution.stats();
        table.row(&[
            run.n.to_string(),
            num(run.sup_error),
            num(run.window),
            num(run.psi_bar),
            num(run.u_bar),
            s.accepted.to_string(),
            s.rejected.to_string(),
        ]);
        let d = run.solution.diagnostics();
        for (dd, prof_t) in d.iter().zip(run.solution.profiles()) {
            diag.row(&[
                run.n.to_string(),
                num(dd.time),
                num(dd.mass),
                num(dd.energy),
                num(dd.min),
                num(dd.max),
                num(dd.sup_psi),
                num(dd.sup_f.unwrap_or(f64::NAN)),
                num(holder_half_constant(prof_t.values())),
            ]);
        }
        mass_drift = mass_drift.max(d.iter().map(|x| ((x.mass - d[0].mass) / d[0].mass).abs()).fold(0.0, f64::max));
        energy_rise = energy_rise.max(run.monitor.energy_rise);
        let stride = n_ref / run.n;
        let last = run.solution.profiles().last().expect("scheme has checkpoints").values();
        for (x, v) in last.iter().enumerate() {
            prof.row(&[
                run.n.to_string(),
                x.to_string(),
                num(x as f64 / run.n as f64),
                num(*v),
                num(r_last[x * stride]),
            ]);
        }
        let shift = run.solution.nonlinearity().shift();
        let sup_psi = run.monitor.max_psi.iter().filter(|(t, _)| *t <= run.window).map(|p| p.1).fold(0.0, f64::max);
        let own_window = 1.0 / (4.0 * run.psi0 * (shift + run.u_bar));
        let sup_psi_own = run.monitor.max_psi.iter().filter(|(t, _)| *t <= own_window).map(|p| p.1).fold(0.0, f64::max);
        let rate_cap = 2.0 * (shift + run.u_bar).powi(2) * run.psi_bar;
        psi_contract &= sup_psi <= 2.0 * run.psi_bar;
        psi_derivation &= sup_psi_own <= 2.0 * run.psi0;
        rate_bound &= run.monitor.max_rate <= rate_cap;
        psi_details.push(json!({
            "n": run.n,
            "psi0": run.psi0,
            "psi_bar": run.psi_bar,
            "sup_psi_on_window": sup_psi,
            "sup_psi_on_own_window": sup_psi_own,
            "own_window": own_window,
            "sup_rate": run.monitor.max_rate,
            "rate_cap": rate_cap,
        }));
    }

    let ns: Vec<f64> = runs.iter().map(|r| r.n as f64).collect();
    let errors: Vec<f64> = runs.iter().map(|r| r.sup_error).collect();
    let slope = if runs.len() >= 2 { log_log_slope(&ns, &errors) } else { f64::NAN };
    let (first, last) = (errors[0], *errors.last().unwrap());
    let mut checks = vec![
        Check::new("sup_error strictly decreasing in n", strictly_decreasing(&errors), format!("{errors:?}")),
        Check::new(
            "sup_error at largest n at most a quarter of smallest n",
            last <= first / 4.0,
            format!("ratio {:.4}, fitted order {:.3}", first / last, -slope),
        ),
        Check::new("relative mass drift <= 1e-10", mass_drift <= MASS_TOL, format!("{mass_drift:e}")),
        Check::new(
            "energy nonincreasing (tol 1e-9)",
            energy_rise <= ENERGY_TOL,
            format!("largest rise {energy_rise:e}"),
        ),
        Check::new("sup|psi_t| <= 2 psi_bar on [0, T]", psi_contract, "see metrics.psi"),
        Check::new("sup|psi_t| <= 2 sup|psi_0| on its own window", psi_derivation, "see metrics.psi"),
        Check::new("sup|du/dt| <= 2 (n^-a + u_bar)^2 psi_bar on [0, T]", rate_bound, "see metrics.psi"),
    ];
    if let Some(sc) = self_consistency {
        checks.push(Check::new(
            "reference grid self-consistency <= 1e-3",
            sc <= SELF_CONSISTENCY_TOL,
            format!("N/2 vs N sup difference {sc:e}"),
        ));
    }

    let metrics = json!({
        "t_star": t_star,
        "n_ref": n_ref,
        "sup_error": runs.iter().map(|r| json!({"n": r.n, "value": r.sup_error})).collect::<Vec<_>>(),
        "fitted_order": -slope,
        "reduction_ratio": first / last,
        "reference_self_consistency": self_consistency,
        "reference_steps": reference.stats().accepted,
        "mass_drift": mass_drift,
        "energy_rise": energy_rise,
        "psi": psi_details,
    });

    let mut energy_plot = PlotSpec::new("mol_energy.svg", "Energy along the scheme", "t", "energy");
    for run in &runs {
        energy_plot = energy_plot.with(
            Series::new(format!("n = {}", run.n), "mol_diagnostics.csv", "time", "energy", Style::Line)
                .filtered("n", run.n),
        );
    }
    let plots = vec![
        PlotSpec::new("mol_convergence.svg", "Sup error against the limiting equation", "n", "sup error")
            .log_x()
            .log_y()
            .with(Series::new("sup error", "mol_convergence.csv", "n", "sup_error", Style::Line)),
        energy_plot,
    ];
    Ok(Outcome {
        tables: vec![
            table.finish("mol_convergence.csv"),
            diag.finish("mol_diagnostics.csv"),
            prof.finish("mol_profiles.csv"),
        ],
        metrics,
        checks,
        plots,
    })
}

fn random_profile(n: usize, lo: f64, hi: f64, rng: &mut RngStream) -> Result<DensityProfile, CliError> {
    Ok(DensityProfile::new((0..n).map(|_| lo + (hi - lo) * rng.uniform()).collect())?)
}

struct PropertyRun {
    mass_drift: f64,
    min_margin: f64,
    max_margin: f64,
    energy_rise: f64,
    order_margin: f64,
}

/// Solves one run, tracking mass, range and energy at every accepted step.
fn tracked_solve(
    p: &ScalingParams,
    u0: DensityProfile,
    t_end: f64,
    cps: &[f64],
) -> Result<(MolSolution, PropertyRun), CliError> {
    let (lo, hi) = (u0.min(), u0.max());
    let mass0: f64 = u0.sum();
    let problem = MolProblem::new(p, u0)?;
    let nl = *problem.nonlinearity();
    let mut run = PropertyRun {
        mass_drift: 0.0,
        min_margin: f64::INFINITY,
        max_margin: f64::INFINITY,
        energy_rise: 0.0,
        order_margin: f64::INFINITY,
    };
    let mut last_energy = fdehydro_core::mol::energy_with(&nl, problem.initial().values());
    let solution = problem.solve_monitored(t_end, cps, |_, u| {
        let (mut mn, mut mx, mut mass) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &v in u {
            mn = mn.min(v);
            mx = mx.max(v);
            mass += v;
        }
        run.mass_drift = run.mass_drift.max(((mass - mass0) / mass0).abs());
        run.min_margin = run.min_margin.min(mn - lo);
        run.max_margin = run.max_margin.min(hi - mx);
        let e = fdehydro_core::mol::energy_with(&nl, u);
        run.energy_rise = run.energy_rise.max(e - last_energy);
        last_energy = e;
    })?;
    Ok((solution, run))
}

pub(crate) fn mol_properties(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let samples = at_least(cfg.samples, 1, "samples")?;
    let poincare_samples = at_least(cfg.poincare_samples, 1, "poincare_samples")?;
    let eps = positive(cfg.eps, "eps")?;
    if eps >= 1.0 {
        return Err(CliError::config("eps", "random profiles live in [eps, 1/eps], so eps must be below 1"));
    }
    let shift = positive(cfg.upper_shift, "upper_shift")?;
    let t_end = cfg.t_end()?;
    let cps = cfg.checkpoint_times(t_end)?;
    let (lo, hi) = (eps, 1.0 / eps);

    let mut table =
        Table::new(&["n", "sample", "kind", "mass_drift", "min_margin", "max_margin", "energy_rise", "order_margin"]);
    let mut poincare = Table::new(&["n", "sample", "ratio"]);
    let (mut mass_drift, mut min_margin, mut energy_rise, mut order_margin, mut worst_poincare) =
        (0.0f64, f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for (pi, p) in cfg.scaling.iter().enumerate() {
        let rows = (0..samples)
            .into_par_iter()
            .map(|i| -> Result<[PropertyRun; 2], CliError> {
                let mut rng = RngStream::replica(cfg.seed, ((pi as u64) << 32) | i as u64);
                let u0 = random_profile(p.n(), lo, hi, &mut rng)?;
                let v0 = DensityProfile::new(u0.values().iter().map(|&u| u + shift * rng.uniform()).collect())?;
                let (su, mut ru) = tracked_solve(p, u0, t_end, &cps)?;
                let (sv, mut rv) = tracked_solve(p, v0, t_end, &cps)?;
                let margin = su
                    .profiles()
                    .iter()
                    .zip(sv.profiles())
                    .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| y - x))
                    .fold(f64::INFINITY, f64::min);
                ru.order_margin = margin;
                rv.order_margin = margin;
                Ok([ru, rv])
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, pair) in rows.iter().enumerate() {
            for (kind, r) in ["lower", "upper"].iter().zip(pair) {
                table.row(&[
                    p.n().to_string(),
                    i.to_string(),
                    kind.to_string(),
                    num(r.mass_drift),
                    num(r.min_margin),
                    num(r.max_margin),
                    num(r.energy_rise),
                    num(r.order_margin),
                ]);
                mass_drift = mass_drift.max(r.mass_drift);
                min_margin = min_margin.min(r.min_margin).min(r.max_margin);
                energy_rise = energy_rise.max(r.energy_rise);
                order_margin = order_margin.min(r.order_margin);
            }
        }
        let nl = Nonlinearity::discrete(p);
        let ratios = (0..poincare_samples)
            .into_par_iter()
            .map(|i| -> Result<f64, CliError> {
                let mut rng = RngStream::replica(cfg.seed ^ 0x9e37_79b9, ((pi as u64) << 32) | i as u64);
                Ok(poincare_ratio(&nl, random_profile(p.n(), lo, hi, &mut rng)?.values()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, r) in ratios.iter().enumerate() {
            poincare.row(&[p.n().to_string(), i.to_string(), num(*r)]);
            worst_poincare = worst_poincare.max(*r);
        }
    }

    let checks = vec![
        Check::new("relative mass drift <= 1e-10", mass_drift <= MASS_TOL, format!("{mass_drift:e}")),
        Check::new(
            "weak maximum principle (tol 1e-12)",
            min_margin >= -MAX_PRINCIPLE_TOL,
            format!("smallest margin {min_margin:e}"),
        ),
        Check::new(
            "comparison principle on ordered pairs (tol 1e-9)",
            order_margin >= -COMPARISON_TOL,
            format!("smallest gap {order_margin:e}"),
        ),
        Check::new(
            "energy nonincreasing (tol 1e-9)",
            energy_rise <= ENERGY_TOL,
            format!("largest rise {energy_rise:e}"),
        ),
        Check::new(
            "discrete Poincare inequality on all pairs",
            worst_poincare <= 1.0,
            format!("largest ratio {worst_poincare}"),
        ),
    ];
    let metrics = json!({
        "mass_drift": mass_drift,
        "max_principle_margin": min_margin,
        "comparison_margin": order_margin,
        "energy_rise": energy_rise,
        "poincare_max_ratio": worst_poincare,
    });
    let plots = vec![PlotSpec::new("poincare.svg", "Poincare ratio per random profile", "sample", "ratio")
        .with(Series::new("ratio", "poincare.csv", "sample", "ratio", Style::Points))];
    Ok(Outcome {
        tables: vec![table.finish("mol_properties.csv"), poincare.finish("poincare.csv")],
        metrics,
        checks,
        plots,
    })
}

pub(crate) fn entropy_decay(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let profile = cfg.profile()?;
    let n_ref = at_least(cfg.n_ref, 2, "n_ref")?;
    let t_end = cfg.t_end()?;
    let cps = cfg.checkpoint_times(t_end)?;
    check_divides(n_ref, &cfg.scaling)?;
    let u0 = |x: f64| profile.eval(x);
    let opts = IntegratorOptions::default();
    let reference = reference_fde_solve(u0, n_ref, t_end, &cps, opts)?;

    let series = cfg
        .scaling
        .par_iter()
        .map(|p| -> Result<Vec<(f64, f64)>, CliError> {
            let sol = MolProblem::new(p, DensityProfile::from_fn(p.n(), u0)?)?.with_options(opts).solve(t_end, &cps)?;
            let stride = n_ref / p.n();
            sol.times()
                .iter()
                .zip(sol.profiles())
                .zip(reference.profiles())
                .map(|((&t, scheme), r)| {
                    let limit = DensityProfile::new(r.values().iter().step_by(stride).copied().collect())?;
                    let h = relative_entropy_geometric_products(scheme, &limit, p.n_alpha())?;
                    Ok((t, h / p.n() as f64))
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["n", "time", "entropy_per_site"]);
    let mut finals = Vec::new();
    for (p, s) in cfg.scaling.iter().zip(&series) {
        for (t, h) in s {
            table.row(&[p.n().to_string(), num(*t), num(*h)]);
        }
        finals.push(s.last().map_or(f64::NAN, |x| x.1));
    }
    let ns: Vec<f64> = cfg.scaling.iter().map(|p| p.n() as f64).collect();
    let slope = if ns.len() >= 2 { log_log_slope(&ns, &finals) } else { f64::NAN };
    let mut final_table = Table::new(&["n", "entropy_per_site"]);
    for (n, h) in ns.iter().zip(&finals) {
        final_table.row(&[n.to_string(), num(*h)]);
    }
    let checks = vec![Check::new(
        "entropy per site at t_end strictly decreasing in n",
        strictly_decreasing(&finals),
        format!("{finals:?}"),
    )];
    let metrics = json!({
        "t_end": t_end,
        "entropy_per_site": cfg.scaling.iter().zip(&finals).map(|(p, h)| json!({"n": p.n(), "value": h})).collect::<Vec<_>>(),
        "fitted_exponent": slope,
    });
    let mut time_plot = PlotSpec::new("entropy_time.svg", "Relative entropy per site", "t", "H / n").log_y();
    for p in &cfg.scaling {
        time_plot = time_plot.with(
            Series::new(format!("n = {}", p.n()), "entropy_decay.csv", "time", "entropy_per_site", Style::Line)
                .filtered("n", p.n()),
        );
    }
    let plots = vec![
        PlotSpec::new("entropy_decay.svg", "Relative entropy per site at t_end", "n", "H / n")
            .log_x()
            .log_y()
            .with(Series::new("H / n", "entropy_final.csv", "n", "entropy_per_site", Style::Line)),
        time_plot,
    ];
    Ok(Outcome {
        tables: vec![table.finish("entropy_decay.csv"), final_table.finish("entropy_final.csv")],
        metrics,
        checks,
        plots,
    })
}
