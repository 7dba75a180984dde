use fdehydro_core::lattice::{DensityProfile, ScalingParams};
use fdehydro_core::mol::{
    discrete_laplacian, energy_with, mol_rhs, psi_field_with, time_window, MolProblem, Nonlinearity,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn sine(n: usize) -> DensityProfile {
    DensityProfile::from_fn(n, |x| 1.0 + 0.5 * (2.0 * PI * x).sin()).unwrap()
}

#[test]
fn psi_follows_its_evolution_equation() {
    let p = ScalingParams::new(16, 0.5).unwrap();
    let nl = Nonlinearity::discrete(&p);
    let (t0, h) = (2e-4, 1e-6);
    let sol = MolProblem::new(&p, sine(16)).unwrap().solve(t0 + h, &[t0 - h, t0, t0 + h]).unwrap();
    let psi: Vec<Vec<f64>> = sol.profiles().iter().map(|u| psi_field_with(&nl, u.values())).collect();
    let u = sol.profiles()[1].values();
    let lap = discrete_laplacian(&psi[1], 16).unwrap();
    let scale = psi[1].iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2);
    for x in 0..16 {
        let fd = (psi[2][x] - psi[0][x]) / (2.0 * h);
        let rhs = nl.phi_prime(u[x]) * lap[x] + nl.curvature_ratio(u[x]) * psi[1][x] * psi[1][x];
        assert!((fd - rhs).abs() <= 1e-5 * scale, "site {x}: {fd} vs {rhs}");
    }
}

#[test]
fn energy_decrease_matches_dissipation_integral() {
    // dE/dt = -(2/n) Σ φ'(u) (Δφ)²
    let n = 32;
    let p = ScalingParams::new(n, 0.5).unwrap();
    let nl = Nonlinearity::discrete(&p);
    let steps = 400;
    let t_end = 2e-3;
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let sol = MolProblem::new(&p, sine(n)).unwrap().solve(t_end, &times).unwrap();
    let rate: Vec<f64> = sol
        .profiles()
        .iter()
        .map(|u| {
            let lap = mol_rhs(u, &p).unwrap();
            2.0 / n as f64 * lap.iter().zip(u.values()).map(|(l, &v)| nl.phi_prime(v) * l * l).sum::<f64>()
        })
        .collect();
    let dt = t_end / steps as f64;
    let integral: f64 = rate.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
    let drop = energy_with(&nl, sol.profiles()[0].values()) - energy_with(&nl, sol.profiles()[steps].values());
    assert!((drop - integral).abs() <= 1e-5 * drop, "drop {drop}, integral {integral}");
}

#[test]
fn psi_stays_within_twice_its_initial_sup_on_the_derived_window() {
    let p = ScalingParams::new(32, 0.5).unwrap();
    let nl = Nonlinearity::discrete(&p);
    let u0 = sine(32);
    let psi0 = psi_field_with(&nl, u0.values()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let horizon = 1.0 / (4.0 * psi0 * (nl.shift() + u0.max()));
    let mut worst = 0.0f64;
    MolProblem::new(&p, u0)
        .unwrap()
        .solve_monitored(horizon, &[horizon], |_, u| {
            worst = worst.max(psi_field_with(&nl, u).iter().fold(0.0, |m, v| m.max(v.abs())));
        })
        .unwrap();
    assert!(worst <= 2.0 * psi0, "{worst} > 2 * {psi0}");
}

#[test]
fn time_derivative_respects_the_window_estimate() {
    let p = ScalingParams::new(32, 0.5).unwrap();
    let nl = Nonlinearity::discrete(&p);
    let u0 = sine(32);
    let w = time_window(&u0, &p).unwrap();
    let t = w.t.finite().unwrap();
    let cap = 2.0 * (nl.shift() + w.u_bar).powi(2) * w.psi_bar;
    let mut worst = 0.0f64;
    MolProblem::new(&p, u0)
        .unwrap()
        .solve_monitored(t, &[t], |_, u| {
            let lap = discrete_laplacian(&u.iter().map(|&v| nl.phi_shifted(v)).collect::<Vec<_>>(), 32).unwrap();
            worst = worst.max(lap.iter().fold(0.0, |m, v| m.max(v.abs())));
        })
        .unwrap();
    assert!(worst <= cap, "{worst} > {cap}");
}

#[test]
fn psi_bar_does_not_bound_initial_psi_for_sine_data() {
    // Ψ̄ divides by φ' while ψ multiplies by it, so for u near 1 the two
    // differ by roughly (n^{-α}+u)⁴ and sup|ψ₀| ≤ 2Ψ̄ already fails at t = 0.
    let p = ScalingParams::new(16, 0.5).unwrap();
    let nl = Nonlinearity::discrete(&p);
    let u0 = sine(16);
    let w = time_window(&u0, &p).unwrap();
    let psi0 = psi_field_with(&nl, u0.values()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(psi0 > 2.0 * w.psi_bar, "psi0 {psi0}, psi_bar {}", w.psi_bar);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rhs_telescopes(values in prop::collection::vec(0.01f64..20.0, 4..64)) {
        let n = values.len();
        let p = ScalingParams::new(n, 0.5).unwrap();
        let rhs = mol_rhs(&DensityProfile::new(values).unwrap(), &p).unwrap();
        let l1: f64 = rhs.iter().map(|v| v.abs()).sum();
        prop_assert!(rhs.iter().sum::<f64>().abs() <= 1e-12 * l1.max(1.0));
    }

    #[test]
    fn poincare_ratio_at_most_one(values in prop::collection::vec(0.01f64..20.0, 2..48)) {
        let p = ScalingParams::new(values.len(), 0.5).unwrap();
        let nl = Nonlinearity::discrete(&p);
        prop_assert!(fdehydro_core::mol::poincare_ratio(&nl, &values) <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ordered_data_stay_ordered(
        lower in prop::collection::vec(0.2f64..2.0, 8),
        gap in prop::collection::vec(0.0f64..1.0, 8),
    ) {
        let p = ScalingParams::new(8, 0.5).unwrap();
        let upper: Vec<f64> = lower.iter().zip(&gap).map(|(a, b)| a + b).collect();
        let cps = [0.0005, 0.001, 0.002];
        let a = MolProblem::new(&p, DensityProfile::new(lower).unwrap()).unwrap().solve(0.002, &cps).unwrap();
        let b = MolProblem::new(&p, DensityProfile::new(upper).unwrap()).unwrap().solve(0.002, &cps).unwrap();
        for (ua, ub) in a.profiles().iter().zip(b.profiles()) {
            for (x, y) in ua.values().iter().zip(ub.values()) {
                prop_assert!(*x <= *y + 1e-9);
            }
        }
        for d in a.diagnostics().windows(2) {
            prop_assert!(d[1].energy <= d[0].energy + 1e-9);
            prop_assert!(d[1].min >= d[0].min - 1e-12 && d[1].max <= d[0].max + 1e-12);
        }
    }
}
