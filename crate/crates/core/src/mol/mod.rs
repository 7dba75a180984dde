//! Method-of-lines solver for the discrete fast diffusion system
//! `d/dt uₜ(x) = Δₙ φₙ(uₜ(x))` on the discrete torus, and a fine-grid
//! solver for the limiting `∂ₜu = Δ(-1/u)` used as a reference.

mod dopri;
mod fields;

pub use dopri::{integrate, IntegratorOptions, IntegratorStats};
pub use fields::{
    discrete_laplacian, energy, energy_with, f_field, holder_half_constant, mol_rhs, poincare_ratio, psi_field,
    psi_field_with, time_window, Nonlinearity, TimeWindow,
};

use crate::lattice::{DensityProfile, LatticeError, ScalingParams};
use crate::measures::phi_n;
use fields::rhs_into;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MolError {
    #[error("step size collapsed to {step:e} at t = {time:e}")]
    StiffnessFailure { time: f64, step: f64 },
    #[error("density became negative at site {site}, t = {time:e}")]
    NegativityBreach { time: f64, site: usize },
    #[error("φₙ(u) vanishes at site {0}")]
    DivisionByZero(usize),
    #[error("reference grid of {reference} points cannot be sampled at {coarse} nodes")]
    GridMismatch { coarse: usize, reference: usize },
    #[error("checkpoint times differ: {0}")]
    CheckpointMismatch(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Quantities tracked at each checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub time: f64,
    /// `n⁻¹ Σₓ u(x)`, conserved by the scheme.
    pub mass: f64,
    pub energy: f64,
    pub min: f64,
    pub max: f64,
    pub sup_psi: f64,
    /// `sup |Fₙ|`; absent for the limiting nonlinearity.
    pub sup_f: Option<f64>,
}

impl Diagnostics {
    fn compute(nl: &Nonlinearity, time: f64, u: &[f64]) -> Self {
        let n = u.len() as f64;
        let psi = psi_field_with(nl, u);
        let sup_psi = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // ψ = φ'(u)Δφ and F = n^α Δφ / φₙ(u)
        let sup_f = nl.nalpha().map(|na| {
            psi.iter().zip(u).map(|(p, &v)| (na * p / nl.phi_prime(v) / phi_n(v, na)).abs()).fold(0.0f64, f64::max)
        });
        Self {
            time,
            mass: u.iter().sum::<f64>() / n,
            energy: energy_with(nl, u),
            min: u.iter().copied().fold(f64::INFINITY, f64::min),
            max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sup_psi,
            sup_f,
        }
    }
}

/// Initial data plus nonlinearity for one method-of-lines run.
#[derive(Debug, Clone)]
pub struct MolProblem {
    nonlinearity: Nonlinearity,
    u0: DensityProfile,
    options: IntegratorOptions,
}

impl MolProblem {
    /// The discrete system at scaling `params`, `u0` sampled at `x/n`.
    pub fn new(params: &ScalingParams, u0: DensityProfile) -> Result<Self, MolError> {
        if u0.len() != params.n() {
            return Err(LatticeError::SizeMismatch { left: u0.len(), right: params.n() }.into());
        }
        Ok(Self { nonlinearity: Nonlinearity::discrete(params), u0, options: IntegratorOptions::default() })
    }

    /// The limiting `∂ₜu = Δ(-1/u)` on `u0.len()` points; `u0` must be
    /// strictly positive.
    pub fn fast_diffusion_limit(u0: DensityProfile) -> Result<Self, MolError> {
        if !u0.is_strictly_positive() {
            return Err(MolError::InvalidProblem("limiting equation needs strictly positive data".into()));
        }
        Ok(Self { nonlinearity: Nonlinearity::fast_diffusion_limit(), u0, options: IntegratorOptions::default() })
    }

    pub fn with_options(mut self, options: IntegratorOptions) -> Self {
        self.options = options;
        self
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn initial(&self) -> &DensityProfile {
        &self.u0
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.options
    }

    /// Integrates to `t_end`, recording profiles and diagnostics at each
    /// checkpoint.
    pub fn solve(&self, t_end: f64, checkpoints: &[f64]) -> Result<MolSolution, MolError> {
        self.solve_monitored(t_end, checkpoints, |_, _| {})
    }

    /// [`solve`](Self::solve), with `monitor(t, u)` called after every
    /// accepted integrator step.
    pub fn solve_monitored(
        &self,
        t_end: f64,
        checkpoints: &[f64],
        mut monitor: impl FnMut(f64, &[f64]),
    ) -> Result<MolSolution, MolError> {
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(MolError::InvalidProblem(format!("bad end time {t_end}")));
        }
        for w in checkpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(MolError::InvalidProblem("checkpoints must increase strictly".into()));
            }
        }
        if checkpoints.first().is_some_and(|&c| c < 0.0) || checkpoints.last().is_some_and(|&c| c > t_end) {
            return Err(MolError::InvalidProblem("checkpoints must lie in [0, t_end]".into()));
        }
        let nl = self.nonlinearity;
        let n = self.u0.len();
        let mut phi_buf = vec![0.0; n];
        let mut times = Vec::with_capacity(checkpoints.len());
        let mut profiles = Vec::with_capacity(checkpoints.len());
        let mut diagnostics = Vec::with_capacity(checkpoints.len());
        let (_, stats) = integrate(
            |u, out| rhs_into(&nl, u, &mut phi_buf, out),
            self.u0.values(),
            t_end,
            checkpoints,
            &self.options,
            |t, u| {
                times.push(t);
                profiles.push(DensityProfile::from_raw(u.to_vec()));
                diagnostics.push(Diagnostics::compute(&nl, t, u));
            },
            |t, u| match u.iter().position(|&v| v < 0.0 || (nl.shift() == 0.0 && v <= 0.0)) {
                Some(site) => Err(MolError::NegativityBreach { time: t, site }),
                None => {
                    monitor(t, u);
                    Ok(())
                }
            },
        )?;
        Ok(MolSolution { nonlinearity: nl, times, profiles, diagnostics, stats })
    }
}

/// Output of [`MolProblem::solve`].
#[derive(Debug, Clone)]
pub struct MolSolution {
    nonlinearity: Nonlinearity,
    times: Vec<f64>,
    profiles: Vec<DensityProfile>,
    diagnostics: Vec<Diagnostics>,
    stats: IntegratorStats,
}

impl MolSolution {
    pub fn n(&self) -> usize {
        self.profiles.first().map_or(0, |p| p.len())
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn profiles(&self) -> &[DensityProfile] {
        &self.profiles
    }

    pub fn diagnostics(&self) -> &[Diagnostics] {
        &self.diagnostics
    }

    pub fn stats(&self) -> &IntegratorStats {
        &self.stats
    }

    /// `time,site,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,site,value\n");
        for (t, p) in self.times.iter().zip(&self.profiles) {
            for (x, v) in p.values().iter().enumerate() {
                let _ = writeln!(out, "{t:?},{x},{v:?}");
            }
        }
        out
    }

    pub fn diagnostics_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            n: usize,
            stats: &'a IntegratorStats,
            checkpoints: &'a [Diagnostics],
        }
        serde_json::to_string_pretty(&Out { n: self.n(), stats: &self.stats, checkpoints: &self.diagnostics })
            .expect("diagnostics serialise")
    }
}

/// Solves `∂ₜu = Δ(-1/u)` on `n_ref` points with initial data `u0(x/n_ref)`.
pub fn reference_fde_solve(
    u0: impl Fn(f64) -> f64,
    n_ref: usize,
    t_end: f64,
    checkpoints: &[f64],
    options: IntegratorOptions,
) -> Result<MolSolution, MolError> {
    let init = DensityProfile::from_fn(n_ref, u0)?;
    MolProblem::fast_diffusion_limit(init)?.with_options(options).solve(t_end, checkpoints)
}

/// `max |uₙ(t, x/n) - u_ref(t, x/n)|` over shared checkpoints `t ≤ t_max`
/// and coarse sites; the reference is read at its nodes `x·(N/n)`, so `n`
/// must divide `N`.
pub fn sup_error(coarse: &MolSolution, reference: &MolSolution, t_max: f64) -> Result<f64, MolError> {
    let (n, big) = (coarse.n(), reference.n());
    if n == 0 || big % n != 0 {
        return Err(MolError::GridMismatch { coarse: n, reference: big });
    }
    let stride = big / n;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for (t, p) in coarse.times.iter().zip(&coarse.profiles) {
        if *t > t_max {
            continue;
        }
        let j = reference
            .times
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| MolError::CheckpointMismatch(format!("reference lacks t = {t}")))?;
        let r = reference.profiles[j].values();
        for (x, v) in p.values().iter().enumerate() {
            worst = worst.max((v - r[x * stride]).abs());
        }
        used += 1;
    }
    if used == 0 {
        return Err(MolError::CheckpointMismatch(format!("no checkpoint at or before {t_max}")));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(x: f64) -> f64 {
        1.0 + 0.5 * (2.0 * PI * x).sin()
    }

    #[test]
    fn mass_is_conserved() {
        let p = ScalingParams::new(32, 0.5).unwrap();
        let u0 = DensityProfile::from_fn(32, bump).unwrap();
        let sol = MolProblem::new(&p, u0).unwrap().solve(0.01, &[0.0, 0.005, 0.01]).unwrap();
        let m0 = sol.diagnostics()[0].mass;
        for d in sol.diagnostics() {
            assert!((d.mass - m0).abs() < 1e-12, "{} vs {}", d.mass, m0);
        }
        assert_eq!(sol.times(), &[0.0, 0.005, 0.01]);
    }

    #[test]
    fn flat_data_stays_flat() {
        let p = ScalingParams::new(16, 0.5).unwrap();
        let sol = MolProblem::new(&p, DensityProfile::constant(16, 0.7).unwrap()).unwrap().solve(1.0, &[1.0]).unwrap();
        assert!(sol.profiles()[0].values().iter().all(|&v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn energy_and_range_do_not_grow() {
        let p = ScalingParams::new(64, 0.5).unwrap();
        let u0 = DensityProfile::from_fn(64, bump).unwrap();
        let cps: Vec<f64> = (0..=10).map(|i| i as f64 * 0.002).collect();
        let sol = MolProblem::new(&p, u0).unwrap().solve(0.02, &cps).unwrap();
        for w in sol.diagnostics().windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12);
            assert!(w[1].max <= w[0].max + 1e-12);
            assert!(w[1].min >= w[0].min - 1e-12);
        }
    }

    #[test]
    fn sup_error_checks_grids() {
        let opts = IntegratorOptions::default();
        let a = reference_fde_solve(bump, 12, 0.001, &[0.001], opts).unwrap();
        let b = reference_fde_solve(bump, 32, 0.001, &[0.001], opts).unwrap();
        assert!(matches!(sup_error(&a, &b, 1.0), Err(MolError::GridMismatch { .. })));
        let c = reference_fde_solve(bump, 64, 0.001, &[0.001], opts).unwrap();
        assert!(sup_error(&b, &c, 1.0).unwrap() < 1e-2);
        assert!(sup_error(&c, &c, 1.0).unwrap() == 0.0);
    }

    #[test]
    fn limit_rejects_nonpositive_data() {
        assert!(MolProblem::fast_diffusion_limit(DensityProfile::new(vec![1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn csv_and_json_shapes() {
        let p = ScalingParams::new(4, 0.5).unwrap();
        let sol = MolProblem::new(&p, DensityProfile::new(vec![1.0, 2.0, 1.0, 2.0]).unwrap())
            .unwrap()
            .solve(1e-4, &[0.0, 1e-4])
            .unwrap();
        assert_eq!(sol.to_csv().lines().count(), 1 + 2 * 4);
        let v: serde_json::Value = serde_json::from_str(&sol.diagnostics_json()).unwrap();
        assert_eq!(v["checkpoints"].as_array().unwrap().len(), 2);
    }
}
