//! Lattice fields derived from a profile: `Δₙ`, the right-hand side,
//! energy, `ψ`, `Fₙ` and the time window.

use super::MolError;
use crate::extended::Extended;
use crate::lattice::{DensityProfile, LatticeError, ScalingParams};
use crate::measures::phi_n;
use serde::{Deserialize, Serialize};

/// The diffusion nonlinearity, written up to an additive constant as
/// `φ̃(u) = -1/(s + u)`.
///
/// With `s = n^{-α}` this is `φₙ(u) - n^α` (exactly, algebraically); with
/// `s = 0` it is the fast diffusion limit `-1/u`. The discrete Laplacian
/// annihilates the constant, and dropping it keeps `O(n^α)` offsets out of
/// the finite differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    shift: f64,
    nalpha: Option<f64>,
}

impl Nonlinearity {
    /// `φₙ` for the given scaling.
    pub fn discrete(params: &ScalingParams) -> Self {
        Self { shift: params.inv_n_alpha(), nalpha: Some(params.n_alpha()) }
    }

    /// The limiting `-1/u`.
    pub fn fast_diffusion_limit() -> Self {
        Self { shift: 0.0, nalpha: None }
    }

    /// `n^{-α}`, or 0 for the limit.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `n^α` when this is a discrete `φₙ`.
    pub fn nalpha(&self) -> Option<f64> {
        self.nalpha
    }

    #[inline]
    pub fn phi_shifted(&self, u: f64) -> f64 {
        -1.0 / (self.shift + u)
    }

    #[inline]
    pub fn phi_prime(&self, u: f64) -> f64 {
        let s = self.shift + u;
        1.0 / (s * s)
    }

    /// `φ''(u)/φ'(u)² = -2(s + u)`.
    #[inline]
    pub fn curvature_ratio(&self, u: f64) -> f64 {
        -2.0 * (self.shift + u)
    }
}

/// `Δₙf(x) = n²(f(x+1) + f(x-1) - 2f(x))` on the torus.
pub fn discrete_laplacian(f: &[f64], n: usize) -> Result<Vec<f64>, LatticeError> {
    if f.len() != n {
        return Err(LatticeError::SizeMismatch { left: f.len(), right: n });
    }
    let mut out = vec![0.0; n];
    laplacian_into(f, &mut out);
    Ok(out)
}

/// Writes `Δₙf` into `out`, with `n = f.len()`.
#[inline]
pub(crate) fn laplacian_into(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let n2 = (n * n) as f64;
    if n == 1 {
        out[0] = 0.0;
        return;
    }
    out[0] = n2 * (f[1] + f[n - 1] - 2.0 * f[0]);
    for x in 1..n - 1 {
        out[x] = n2 * (f[x + 1] + f[x - 1] - 2.0 * f[x]);
    }
    out[n - 1] = n2 * (f[0] + f[n - 2] - 2.0 * f[n - 1]);
}

/// Right-hand side `Δₙ(φ ∘ u)` into `out`, using `phi_buf` as scratch.
#[inline]
pub(crate) fn rhs_into(nl: &Nonlinearity, u: &[f64], phi_buf: &mut [f64], out: &mut [f64]) {
    for (p, &v) in phi_buf.iter_mut().zip(u) {
        *p = nl.phi_shifted(v);
    }
    laplacian_into(phi_buf, out);
}

/// `d/dt uₜ(x) = Δₙ φₙ(uₜ(x))` evaluated at `u`.
pub fn mol_rhs(u: &DensityProfile, params: &ScalingParams) -> Result<Vec<f64>, LatticeError> {
    check(u, params)?;
    let nl = Nonlinearity::discrete(params);
    let mut phi_buf = vec![0.0; u.len()];
    let mut out = vec![0.0; u.len()];
    rhs_into(&nl, u.values(), &mut phi_buf, &mut out);
    Ok(out)
}

fn check(u: &DensityProfile, params: &ScalingParams) -> Result<(), LatticeError> {
    if u.len() != params.n() {
        return Err(LatticeError::SizeMismatch { left: u.len(), right: params.n() });
    }
    Ok(())
}

/// `𝓔(u) = Σₓ n (φ(u(x+1)) - φ(u(x)))²` for an arbitrary nonlinearity.
pub fn energy_with(nl: &Nonlinearity, u: &[f64]) -> f64 {
    let n = u.len();
    let phis: Vec<f64> = u.iter().map(|&v| nl.phi_shifted(v)).collect();
    (0..n)
        .map(|x| {
            let d = phis[(x + 1) % n] - phis[x];
            d * d
        })
        .sum::<f64>()
        * n as f64
}

/// `𝓔ₙ(u) = Σₓ n (φₙ(u(x+1)) - φₙ(u(x)))²`.
pub fn energy(u: &DensityProfile, params: &ScalingParams) -> Result<f64, LatticeError> {
    check(u, params)?;
    Ok(energy_with(&Nonlinearity::discrete(params), u.values()))
}

/// `ψ(x) = φ'(u(x)) Δₙφ(u)(x)`.
pub fn psi_field_with(nl: &Nonlinearity, u: &[f64]) -> Vec<f64> {
    let mut phi_buf = vec![0.0; u.len()];
    let mut lap = vec![0.0; u.len()];
    rhs_into(nl, u, &mut phi_buf, &mut lap);
    lap.iter().zip(u).map(|(l, &v)| nl.phi_prime(v) * l).collect()
}

pub fn psi_field(u: &DensityProfile, params: &ScalingParams) -> Result<Vec<f64>, LatticeError> {
    check(u, params)?;
    Ok(psi_field_with(&Nonlinearity::discrete(params), u.values()))
}

/// `Fₙ(x) = n^α Δₙφₙ(u)(x) / φₙ(u(x))`.
pub fn f_field(u: &DensityProfile, params: &ScalingParams) -> Result<Vec<f64>, super::MolError> {
    check(u, params)?;
    let na = params.n_alpha();
    let lap = mol_rhs(u, params)?;
    u.values()
        .iter()
        .zip(lap)
        .enumerate()
        .map(|(x, (&v, l))| {
            let denom = phi_n(v, na);
            if denom == 0.0 {
                Err(MolError::DivisionByZero(x))
            } else {
                Ok(na * l / denom)
            }
        })
        .collect()
}

/// Horizon of the time-derivative estimate: on `[0, T]`,
/// `|d/dt uₜ(x)| ≤ 2 (n^{-α} + ū)² Ψ̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    /// `T = 1/(4 Ψ̄ (n^{-α} + ū))`, `+∞` for flat data.
    pub t: Extended,
    /// `Ψ̄ = maxₓ |Δₙφ₀(x)| / φₙ'(u₀(x))`.
    pub psi_bar: f64,
    /// `ū = maxₓ u₀(x)`.
    pub u_bar: f64,
}

pub fn time_window(u0: &DensityProfile, params: &ScalingParams) -> Result<TimeWindow, LatticeError> {
    let lap = mol_rhs(u0, params)?;
    let nl = Nonlinearity::discrete(params);
    let psi_bar = lap.iter().zip(u0.values()).map(|(l, &v)| l.abs() / nl.phi_prime(v)).fold(0.0, f64::max);
    let u_bar = u0.max();
    let t = if psi_bar == 0.0 {
        Extended::PosInfinity
    } else {
        Extended::Finite(1.0 / (4.0 * psi_bar * (params.inv_n_alpha() + u_bar)))
    };
    Ok(TimeWindow { t, psi_bar, u_bar })
}

/// Largest ratio `|φ(u(y)) - φ(u(x))| / (𝓔(u)^{1/2} (d(x,y)/n)^{1/2})` over
/// site pairs, with `d` the torus distance. The discrete Poincaré
/// inequality says it never exceeds 1. Returns 0 for flat profiles.
pub fn poincare_ratio(nl: &Nonlinearity, u: &[f64]) -> f64 {
    let n = u.len();
    let e = energy_with(nl, u).sqrt();
    if e == 0.0 {
        return 0.0;
    }
    let phis: Vec<f64> = u.iter().map(|&v| nl.phi_shifted(v)).collect();
    let mut worst: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let d = (y - x).min(n - (y - x)) as f64;
            let ratio = (phis[y] - phis[x]).abs() / (e * (d / n as f64).sqrt());
            worst = worst.max(ratio);
        }
    }
    worst
}

/// Smallest `K` with `|f(y) - f(x)| ≤ K (d(x,y)/n)^{1/2}` for all pairs.
pub fn holder_half_constant(f: &[f64]) -> f64 {
    let n = f.len();
    let mut k: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let d = (y - x).min(n - (y - x)) as f64;
            k = k.max((f[y] - f[x]).abs() / (d / n as f64).sqrt());
        }
    }
    k
}
