//! Macroscopic observables of a configuration.

use super::SimError;
use crate::lattice::{Configuration, DensityProfile, LatticeError, ScalingParams, TorusIndex};
use crate::measures::phi;

fn check_len(config: &Configuration, params: &ScalingParams) -> Result<(), SimError> {
    if config.len() != params.n() {
        return Err(LatticeError::SizeMismatch { left: config.len(), right: params.n() }.into());
    }
    Ok(())
}

/// `n^{-(1+α)} Σₓ η(x) F(x/n)`.
pub fn empirical_pairing(config: &Configuration, f: impl Fn(f64) -> f64, params: &ScalingParams) -> f64 {
    let n = config.len() as f64;
    let sum: f64 =
        config.counts().iter().enumerate().filter(|(_, &k)| k > 0).map(|(x, &k)| k as f64 * f(x as f64 / n)).sum();
    sum / (n * params.n_alpha())
}

/// `η^{n,ℓ}(x) = (n^α ℓ)⁻¹ Σ_{i=1..ℓ} η(x+i)`, the block to the right of `x`.
pub fn block_average(
    config: &Configuration,
    x: TorusIndex,
    ell: usize,
    params: &ScalingParams,
) -> Result<f64, SimError> {
    check_len(config, params)?;
    check_ell(ell, 1, config.len())?;
    let sum: u64 = (1..=ell).map(|i| config.get(x.offset(i as isize))).sum();
    Ok(sum as f64 / (params.n_alpha() * ell as f64))
}

/// [`block_average`] at every site, by a sliding window.
pub fn block_averages(config: &Configuration, ell: usize, params: &ScalingParams) -> Result<Vec<f64>, SimError> {
    check_len(config, params)?;
    check_ell(ell, 1, config.len())?;
    let scale = 1.0 / (params.n_alpha() * ell as f64);
    Ok(block_sums(config.counts(), ell, |k| k).into_iter().map(|s| s as f64 * scale).collect())
}

fn check_ell(ell: usize, min: usize, n: usize) -> Result<(), SimError> {
    if ell < min || ell > n {
        return Err(SimError::Domain(format!("block size {ell} outside [{min}, {n}]")));
    }
    Ok(())
}

/// `Σ_{i=1..ℓ} w(η(x+i))` for every `x`.
fn block_sums(counts: &[u64], ell: usize, w: impl Fn(u64) -> u64) -> Vec<u64> {
    let n = counts.len();
    let mut out = Vec::with_capacity(n);
    let mut s: u64 = (1..=ell).map(|i| w(counts[i % n])).sum();
    for x in 0..n {
        out.push(s);
        // slide from x to x+1: drop x+1, add x+1+ℓ
        s = s - w(counts[(x + 1) % n]) + w(counts[(x + 1 + ell) % n]);
    }
    out
}

/// The two one-block quantities evaluated on a single configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneBlockStatistic {
    /// `n⁻¹ Σₓ F(x) n^α [g(η(x)) - φ(n^α η^{n,ℓ}(x))]`.
    pub replacement: f64,
    /// `n⁻¹ Σₓ F(x) n^α V_x 1{η^{n,ℓ}(x) ≤ M}` with
    /// `V_x = ℓ⁻¹Σᵢ g(η(x+i)) - ψ_x`, `ψ_x = S/(ℓ-1+S)`, `S = Σᵢ η(x+i)`.
    pub cutoff: f64,
}

pub fn one_block_statistic(
    config: &Configuration,
    ell: usize,
    f_values: &[f64],
    params: &ScalingParams,
    m_cutoff: f64,
) -> Result<OneBlockStatistic, SimError> {
    check_len(config, params)?;
    check_ell(ell, 2, config.len())?;
    if f_values.len() != config.len() {
        return Err(LatticeError::SizeMismatch { left: f_values.len(), right: config.len() }.into());
    }
    let counts = config.counts();
    let na = params.n_alpha();
    let l = ell as f64;
    let mass = block_sums(counts, ell, |k| k);
    let occupied = block_sums(counts, ell, |k| u64::from(k > 0));
    let (mut replacement, mut cutoff) = (0.0, 0.0);
    for x in 0..counts.len() {
        let s = mass[x] as f64;
        let g = if counts[x] > 0 { 1.0 } else { 0.0 };
        replacement += f_values[x] * (g - phi(s / l));
        if s / (l * na) <= m_cutoff {
            let v = occupied[x] as f64 / l - s / (l - 1.0 + s);
            cutoff += f_values[x] * v;
        }
    }
    let scale = na / counts.len() as f64;
    Ok(OneBlockStatistic { replacement: replacement * scale, cutoff: cutoff * scale })
}

/// `η(x)/n^α` at every site.
pub fn density_field(config: &Configuration, params: &ScalingParams) -> DensityProfile {
    let inv = params.inv_n_alpha();
    DensityProfile::from_raw(config.counts().iter().map(|&k| k as f64 * inv).collect())
}
