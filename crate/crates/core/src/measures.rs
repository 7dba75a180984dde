//! Geometric laws, rate functions and concentration bounds.
//!
//! Convention: a geometric law with parameter `θ ∈ [0, 1)` has pmf
//! `(1-θ)θ^k` on `k = 0, 1, 2, ...` and mean `θ/(1-θ)`. The law of mean `m`
//! therefore has `θ = m/(1+m)`. All logarithms are natural.

use crate::extended::Extended;
use crate::lattice::{DensityProfile, LatticeError};
use crate::rng::RngStream;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn domain(msg: impl Into<String>) -> MeasureError {
    MeasureError::Domain(msg.into())
}

/// Geometric law on `ℕ₀` parametrised by its mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricLaw {
    mean: f64,
    theta: f64,
}

impl GeometricLaw {
    pub fn new(mean: f64) -> Result<Self, MeasureError> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(domain(format!("geometric mean must be positive, got {mean}")));
        }
        Ok(Self { mean, theta: mean / (1.0 + mean) })
    }

    /// The law `Geom(θₙ(ρ))`, i.e. mean `ρ n^α`.
    pub fn scaled(rho: f64, nalpha: f64) -> Result<Self, MeasureError> {
        Self::new(rho * nalpha)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn variance(&self) -> f64 {
        self.mean * (1.0 + self.mean)
    }

    pub fn pmf(&self, k: u64) -> f64 {
        (1.0 - self.theta) * self.theta.powf(k as f64)
    }

    /// `P(X ≥ k) = θ^k`.
    pub fn tail(&self, k: u64) -> f64 {
        self.theta.powf(k as f64)
    }

    /// Inverse-CDF draw from a uniform `u ∈ (0, 1]`. Nondecreasing in the
    /// mean for fixed `u`, which is what makes shared-uniform draws monotone.
    #[inline]
    pub fn quantile(&self, u: f64) -> u64 {
        geometric_quantile(self.theta, u)
    }

    pub fn sample(&self, rng: &mut RngStream) -> u64 {
        self.quantile(rng.uniform_open0())
    }
}

/// `floor(ln u / ln θ)`: the smallest `k` with `P(X > k) < u`.
#[inline]
pub(crate) fn geometric_quantile(theta: f64, u: f64) -> u64 {
    if theta <= 0.0 {
        return 0;
    }
    let k = (u.ln() / theta.ln()).floor();
    if k.is_finite() {
        k as u64
    } else {
        0
    }
}

/// `θₙ(ρ) = ρn^α / (1 + ρn^α)`.
pub fn theta_from_mean(mean: f64, nalpha: f64) -> Result<f64, MeasureError> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(domain(format!("mean must be positive, got {mean}")));
    }
    if !(nalpha >= 1.0) {
        return Err(domain(format!("n^alpha must be >= 1, got {nalpha}")));
    }
    let m = mean * nalpha;
    Ok(m / (1.0 + m))
}

/// `φ(ρ) = ρ/(1+ρ)`.
#[inline]
pub fn phi(rho: f64) -> f64 {
    rho / (1.0 + rho)
}

/// `φₙ(u) = n^α φ(n^α u)`.
#[inline]
pub fn phi_n(u: f64, nalpha: f64) -> f64 {
    nalpha * phi(nalpha * u)
}

/// `φₙ'(u) = (n^{-α} + u)^{-2}`.
#[inline]
pub fn phi_n_prime(u: f64, nalpha: f64) -> f64 {
    let s = 1.0 / nalpha + u;
    1.0 / (s * s)
}

/// `x - ln(1+x)`, accurate for small `|x|`.
fn x_minus_log1p(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // alternating series x²/2 - x³/3 + ...; eight terms reach 1e-18
        let mut term = x * x;
        let mut acc = 0.0;
        for k in 2..=9 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / k as f64;
            term *= x;
        }
        acc
    } else {
        x - x.ln_1p()
    }
}

/// Rate function of the exponential law of mean `ρ`:
/// `I_ρ(a) = a/ρ - 1 - ln(a/ρ)`.
pub fn rate_exponential(rho: f64, a: f64) -> Result<f64, MeasureError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(domain(format!("a must be positive, got {a}")));
    }
    Ok(x_minus_log1p(a / rho - 1.0))
}

/// Rate function of the geometric law of mean `ρ`:
/// `𝓘_ρ(a) = a ln(a(1+ρ)/(ρ(1+a))) - ln((1+a)/(1+ρ))`, with `𝓘_ρ(0) = ln(1+ρ)`.
pub fn rate_geometric(rho: f64, a: f64) -> Result<f64, MeasureError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("rho must be positive, got {rho}")));
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(domain(format!("a must be non-negative, got {a}")));
    }
    if a == 0.0 {
        return Ok(rho.ln_1p());
    }
    // With d = a - ρ the value is d²/(ρ(1+ρ)) - a·h(d/ρ) + (1+a)·h(d/(1+ρ)),
    // h(x) = x - ln(1+x); no catastrophic cancellation near a = ρ.
    let d = a - rho;
    let value = d * d / (rho * (1.0 + rho)) - a * x_minus_log1p(d / rho) + (1.0 + a) * x_minus_log1p(d / (1.0 + rho));
    Ok(value.max(0.0))
}

/// Moment generating function of the geometric law of mean `ρ`:
/// `1/(1 - ρ(e^λ - 1))` for `λ < ln((1+ρ)/ρ)`, `+∞` otherwise.
pub fn mgf_geometric(rho: f64, lambda: f64) -> Extended {
    let denom = 1.0 - rho * lambda.exp_m1();
    if lambda >= ((1.0 + rho) / rho).ln() || denom <= 0.0 {
        Extended::PosInfinity
    } else {
        Extended::Finite(1.0 / denom)
    }
}

/// Reference mean and the extra constants used by the concentration and
/// comparison lemmas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFunctionParams {
    pub rho: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub kappa: Option<f64>,
    pub kappa_tilde: Option<f64>,
}

impl RateFunctionParams {
    /// All three means equal to `rho`.
    pub fn uniform(rho: f64) -> Result<Self, MeasureError> {
        Self::with_bounds(rho, rho, rho)
    }

    pub fn with_bounds(rho: f64, rho_minus: f64, rho_plus: f64) -> Result<Self, MeasureError> {
        if !(rho_minus > 0.0 && rho_minus <= rho && rho <= rho_plus && rho_plus.is_finite()) {
            return Err(domain(format!("need 0 < rho_minus <= rho <= rho_plus, got {rho_minus}, {rho}, {rho_plus}")));
        }
        Ok(Self { rho, rho_plus, rho_minus, kappa: None, kappa_tilde: None })
    }

    /// `ρ⁺`/`ρ⁻` are the extreme site means; `ρ` is their average.
    pub fn from_site_means(means: &[f64]) -> Result<Self, MeasureError> {
        if means.is_empty() {
            return Err(domain("no site means"));
        }
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let avg = means.iter().sum::<f64>() / means.len() as f64;
        Self::with_bounds(avg.clamp(lo, hi), lo, hi)
    }

    pub fn with_kappas(mut self, kappa: f64, kappa_tilde: f64) -> Result<Self, MeasureError> {
        if !(kappa > 0.0 && kappa <= kappa_tilde && kappa_tilde <= 1.0) {
            return Err(domain(format!("need 0 < kappa <= kappa_tilde <= 1, got {kappa}, {kappa_tilde}")));
        }
        self.kappa = Some(kappa);
        self.kappa_tilde = Some(kappa_tilde);
        Ok(self)
    }

    /// `K⁺ = (ρ⁺/ρ)²`.
    pub fn k_plus(&self) -> f64 {
        (self.rho_plus / self.rho).powi(2)
    }
}

fn chernoff_exponent(rho: f64, nalpha: f64, ell: usize, a: f64) -> Result<f64, MeasureError> {
    if ell == 0 {
        return Err(domain("ell must be at least 1"));
    }
    if !(nalpha > 0.0) {
        return Err(domain(format!("n^alpha must be positive, got {nalpha}")));
    }
    let correction = a / nalpha * (1.0 / rho - 1.0 / a).powi(2);
    Ok(ell as f64 * (correction - rate_exponential(rho, a)?))
}

/// Upper-tail bound on `P(S ≥ ℓ a n^α)` for `S` a sum of `ℓ` independent
/// geometrics with means `ρᵢ n^α ≤ ρ⁺ n^α`, valid for `a ≥ ρ⁺`.
pub fn chernoff_upper(params: &RateFunctionParams, nalpha: f64, ell: usize, a: f64) -> Result<f64, MeasureError> {
    if !(a >= params.rho_plus) {
        return Err(domain(format!("upper bound needs a >= rho_plus = {}, got {a}", params.rho_plus)));
    }
    Ok(chernoff_exponent(params.rho_plus, nalpha, ell, a)?.exp().min(1.0))
}

/// Lower-tail bound on `P(S ≤ ℓ a n^α)`, valid for `0 < a ≤ ρ⁻`.
pub fn chernoff_lower(params: &RateFunctionParams, nalpha: f64, ell: usize, a: f64) -> Result<f64, MeasureError> {
    if !(a > 0.0 && a <= params.rho_minus) {
        return Err(domain(format!("lower bound needs 0 < a <= rho_minus = {}, got {a}", params.rho_minus)));
    }
    Ok(chernoff_exponent(params.rho_minus, nalpha, ell, a)?.exp().min(1.0))
}

/// `Mₙ(u, v) = -(v-u)² / ((n^{-α}+u)² (n^{-α}+v))`.
pub fn m_n(u: f64, v: f64, nalpha: f64) -> f64 {
    let s = 1.0 / nalpha;
    let d = v - u;
    -(d * d) / ((s + u) * (s + u) * (s + v))
}

/// `Mₙ` from its definition `φₙ(v) - φₙ(u) - φₙ'(u)(v-u)`.
pub fn m_n_defining(u: f64, v: f64, nalpha: f64) -> f64 {
    phi_n(v, nalpha) - phi_n(u, nalpha) - phi_n_prime(u, nalpha) * (v - u)
}

/// `C = max{4/ε, 2/(ε₀ε²)}`.
pub fn mn_bound_constant(eps: f64, eps0: f64) -> Result<f64, MeasureError> {
    if !(eps > 0.0 && eps0 > 0.0) {
        return Err(domain(format!("eps and eps0 must be positive, got {eps}, {eps0}")));
    }
    Ok((4.0 / eps).max(2.0 / (eps0 * eps * eps)))
}

/// The inequality `|Mₙ(u,v)| ≤ C I_u(v)` on `u ∈ [ε, 1/ε]`, `v ≥ ε₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MnBound {
    pub eps: f64,
    pub eps0: f64,
    pub constant: f64,
}

impl MnBound {
    pub fn new(eps: f64, eps0: f64) -> Result<Self, MeasureError> {
        let constant = mn_bound_constant(eps, eps0)?;
        Ok(Self { eps, eps0, constant })
    }

    /// Whether the bound holds at `(u, v)`.
    pub fn holds(&self, u: f64, v: f64, nalpha: f64) -> Result<bool, MeasureError> {
        verify_mn_bound(u, v, nalpha, self.constant, self.eps, self.eps0)
    }
}

pub fn verify_mn_bound(u: f64, v: f64, nalpha: f64, constant: f64, eps: f64, eps0: f64) -> Result<bool, MeasureError> {
    if !(u >= eps && u <= 1.0 / eps) {
        return Err(domain(format!("u = {u} outside [{eps}, {}]", 1.0 / eps)));
    }
    if !(v >= eps0) {
        return Err(domain(format!("v = {v} below eps0 = {eps0}")));
    }
    Ok(m_n(u, v, nalpha).abs() <= constant * rate_exponential(u, v)?)
}

/// `I_ρ(z) ≤ ((z-ρ)/ρ)²` for `z > ρ/2`.
pub fn rate_comparison_quadratic(rho: f64, z: f64) -> Result<bool, MeasureError> {
    if !(rho > 0.0 && z > rho / 2.0) {
        return Err(domain(format!("need rho > 0 and z > rho/2, got rho = {rho}, z = {z}")));
    }
    let q = (z - rho) / rho;
    Ok(rate_exponential(rho, z)? <= q * q)
}

/// `I_ρ(a) ≤ 16 K⁺ I_{ρ⁺}(a)` for `a ≥ K⁺ρ`, `K⁺ = (ρ⁺/ρ)²`.
pub fn rate_comparison_scaled(rho: f64, rho_plus: f64, a: f64) -> Result<bool, MeasureError> {
    if !(rho > 0.0 && rho_plus >= rho) {
        return Err(domain(format!("need 0 < rho <= rho_plus, got {rho}, {rho_plus}")));
    }
    let k_plus = (rho_plus / rho).powi(2);
    if !(a >= k_plus * rho) {
        return Err(domain(format!("need a >= K+ rho = {}, got {a}", k_plus * rho)));
    }
    Ok(rate_exponential(rho, a)? <= 16.0 * k_plus * rate_exponential(rho_plus, a)?)
}

/// Stationary point and upper bound for `f(z) = κ I_ρ(z) - κ̃ I_ρ̃(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedRateMax {
    pub z_star: f64,
    pub bound: f64,
}

/// `f(z) = κ I_ρ(z) - κ̃ I_ρ̃(z)`.
pub fn tilted_rate(rho: f64, rho_tilde: f64, kappa: f64, kappa_tilde: f64, z: f64) -> Result<f64, MeasureError> {
    Ok(kappa * rate_exponential(rho, z)? - kappa_tilde * rate_exponential(rho_tilde, z)?)
}

/// `z* = (1 - κ/κ̃)(ρ - κρ̃/κ̃)⁻¹ ρρ̃` and
/// `bound = κκ̃(κ̃ - κ/2)(κ̃ρ - κρ̃)⁻²(ρ - ρ̃)²`.
///
/// `z*` maximises `f` (it is concave when `κ < κ̃`). The bound dominates
/// `f(z*)` only when `z* > ρ/2`; see [`TiltedRateMax::bound_applies`].
pub fn tilted_rate_max(rho: f64, rho_tilde: f64, kappa: f64, kappa_tilde: f64) -> Result<TiltedRateMax, MeasureError> {
    if !(rho > 0.0 && rho_tilde > 0.0) {
        return Err(domain(format!("means must be positive, got {rho}, {rho_tilde}")));
    }
    if !(kappa > 0.0 && kappa <= kappa_tilde && kappa_tilde <= 1.0) {
        return Err(domain(format!("need 0 < kappa <= kappa_tilde <= 1, got {kappa}, {kappa_tilde}")));
    }
    let gap = kappa_tilde * rho - kappa * rho_tilde;
    if !(gap > 0.0) {
        return Err(domain(format!("need kappa_tilde*rho > kappa*rho_tilde, got {gap}")));
    }
    let ratio = kappa / kappa_tilde;
    let z_star = (1.0 - ratio) * rho * rho_tilde / (rho - ratio * rho_tilde);
    let bound = kappa * kappa_tilde * (kappa_tilde - kappa / 2.0) * (rho - rho_tilde).powi(2) / (gap * gap);
    Ok(TiltedRateMax { z_star, bound })
}

impl TiltedRateMax {
    pub fn bound_applies(&self, rho: f64) -> bool {
        self.z_star > rho / 2.0
    }
}

/// Relative entropy between two product geometric measures whose site
/// means are `n^α·profile₁(x)` and `n^α·profile₂(x)`.
pub fn relative_entropy_geometric_products(
    profile1: &DensityProfile,
    profile2: &DensityProfile,
    nalpha: f64,
) -> Result<f64, MeasureError> {
    if profile1.len() != profile2.len() {
        return Err(LatticeError::SizeMismatch { left: profile1.len(), right: profile2.len() }.into());
    }
    if !(nalpha > 0.0) {
        return Err(domain(format!("n^alpha must be positive, got {nalpha}")));
    }
    profile1
        .values()
        .iter()
        .zip(profile2.values())
        .map(|(&u1, &u2)| relative_entropy_geometric(nalpha * u1, nalpha * u2))
        .sum()
}

/// `H(Geom(m₁) | Geom(m₂)) = ln((1+m₂)/(1+m₁)) + m₁ ln(m₁(1+m₂)/(m₂(1+m₁)))`.
pub fn relative_entropy_geometric(m1: f64, m2: f64) -> Result<f64, MeasureError> {
    if !(m1 > 0.0 && m2 > 0.0) {
        return Err(domain(format!("means must be positive, got {m1}, {m2}")));
    }
    let d = m1 - m2;
    Ok(m1 * (d / m2).ln_1p() - (1.0 + m1) * (d / (1.0 + m2)).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn theta_examples() {
        assert_relative_eq!(theta_from_mean(1.0, 2.0).unwrap(), 2.0 / 3.0);
        assert_relative_eq!(theta_from_mean(1.0, 1.0).unwrap(), 0.5);
        assert!(theta_from_mean(1e-300, 1.0).unwrap() < 1e-299);
        assert!(theta_from_mean(0.0, 1.0).is_err());
        assert!(theta_from_mean(-1.0, 1.0).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(1.0), 0.5);
        assert_relative_eq!(phi_n(1.0, 2.0), 4.0 / 3.0);
        // φₙ(ρ) - n^α → -1/ρ
        let expect = [-0.476_190_476, -0.497_512_438, -0.499_750_125];
        for (na, e) in [10.0, 100.0, 1000.0].into_iter().zip(expect) {
            assert!((phi_n(2.0, na) - na - e).abs() < 1e-8);
        }
    }

    #[test]
    fn phi_n_prime_matches_finite_difference() {
        for &na in &[1.0, 4.0, 32.0] {
            for &u in &[0.1, 0.7, 2.5] {
                let h = 1e-6;
                let fd = (phi_n(u + h, na) - phi_n(u - h, na)) / (2.0 * h);
                assert_relative_eq!(phi_n_prime(u, na), fd, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn exponential_rate_examples() {
        assert_eq!(rate_exponential(2.0, 2.0).unwrap(), 0.0);
        assert_relative_eq!(rate_exponential(1.0, 2.0).unwrap(), 1.0 - 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(rate_exponential(1.0, 0.5).unwrap(), -0.5 + 2f64.ln(), max_relative = 1e-14);
        assert!(rate_exponential(1.0, 0.0).is_err());
        assert!(rate_exponential(0.0, 1.0).is_err());
    }

    #[test]
    fn geometric_rate_examples() {
        assert_eq!(rate_geometric(1.0, 1.0).unwrap(), 0.0);
        let direct = 2.0 * (4.0f64 / 3.0).ln() - 1.5f64.ln();
        assert_relative_eq!(rate_geometric(1.0, 2.0).unwrap(), direct, max_relative = 1e-13);
        assert!((direct - 0.169_899).abs() < 1e-6);
        assert_relative_eq!(rate_geometric(3.0, 0.0).unwrap(), 4f64.ln());
        assert!(rate_geometric(1.0, -0.1).is_err());
        let m = 1000.0;
        let gap = (rate_geometric(2.0 * m, 4.0 * m).unwrap() - rate_exponential(2.0, 4.0).unwrap()).abs();
        assert!(gap <= 1e-3, "{gap}");
    }

    #[test]
    fn geometric_rate_near_minimum_is_accurate() {
        // second-order expansion d²/(2ρ(1+ρ)) is exact to O(d³)
        for &rho in &[0.3, 1.0, 40.0] {
            let d = 1e-6 * rho;
            let expect = d * d / (2.0 * rho * (1.0 + rho));
            assert_relative_eq!(rate_geometric(rho, rho + d).unwrap(), expect, max_relative = 1e-5);
        }
    }

    #[test]
    fn mgf_examples() {
        assert_eq!(mgf_geometric(1.0, 0.0), Extended::Finite(1.0));
        let v = mgf_geometric(1.0, 1.5f64.ln()).finite().unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
        assert_eq!(mgf_geometric(1.0, 2f64.ln()), Extended::PosInfinity);
        assert_eq!(mgf_geometric(1.0, 5.0), Extended::PosInfinity);
    }

    #[test]
    fn mgf_matches_truncated_series() {
        let law = GeometricLaw::new(1.7).unwrap();
        for &lambda in &[-1.0, 0.2, 0.4] {
            let terms = (0..4000u64).map(|k| (1.0 - law.theta()).ln() + k as f64 * (law.theta().ln() + lambda));
            let series: f64 = terms.map(f64::exp).sum();
            let closed = mgf_geometric(1.7, lambda).finite().unwrap();
            assert_relative_eq!(series, closed, max_relative = 1e-10);
        }
    }

    #[test]
    fn geometric_pmf_normalised_with_right_mean() {
        for &m in &[0.2, 1.0, 7.5] {
            let law = GeometricLaw::new(m).unwrap();
            let (mut mass, mut mean) = (0.0, 0.0);
            for k in 0..5000u64 {
                let p = law.pmf(k);
                mass += p;
                mean += k as f64 * p;
            }
            assert!((mass - 1.0).abs() < 1e-10);
            assert!((mean - m).abs() < 1e-10);
        }
    }

    #[test]
    fn chernoff_examples() {
        let p = RateFunctionParams::uniform(1.0).unwrap();
        assert_eq!(chernoff_upper(&p, 4.0, 100, 1.0).unwrap(), 1.0);
        assert_eq!(chernoff_lower(&p, 4.0, 100, 1.0).unwrap(), 1.0);
        let up = chernoff_upper(&p, 4.0, 100, 2.0).unwrap();
        assert_relative_eq!(up, (-100.0 * (1.0 - 2f64.ln() - 0.125)).exp(), max_relative = 1e-12);
        assert!((up.ln() + 18.185).abs() < 1e-3);
        let lo = chernoff_lower(&p, 4.0, 100, 0.5).unwrap();
        assert_relative_eq!(lo, (-100.0 * (2f64.ln() - 0.5 - 0.125)).exp(), max_relative = 1e-12);
        assert!((lo.ln() + 6.8147).abs() < 1e-3);
        assert!(chernoff_upper(&p, 4.0, 100, 0.9).is_err());
        assert!(chernoff_lower(&p, 4.0, 100, 1.1).is_err());
        assert!(chernoff_lower(&p, 4.0, 100, 0.0).is_err());
    }

    #[test]
    fn rate_params_validation() {
        assert!(RateFunctionParams::with_bounds(1.0, 2.0, 3.0).is_err());
        let p = RateFunctionParams::from_site_means(&[0.5, 1.0, 2.0]).unwrap();
        assert_eq!((p.rho_minus, p.rho_plus), (0.5, 2.0));
        assert_relative_eq!(p.k_plus(), (2.0 / 3.5 * 3.0f64).powi(2));
        assert!(p.with_kappas(0.5, 0.4).is_err());
        assert!(p.with_kappas(0.4, 0.5).is_ok());
    }

    #[test]
    fn m_n_examples() {
        assert_eq!(m_n(1.3, 1.3, 4.0), 0.0);
        assert_relative_eq!(m_n(1.0, 2.0, 2.0), -1.0 / 5.625, max_relative = 1e-14);
        assert_relative_eq!(m_n_defining(1.0, 2.0, 2.0), -1.0 / 5.625, max_relative = 1e-12);
    }

    #[test]
    fn mn_bound_examples() {
        assert_eq!(mn_bound_constant(0.5, 0.5).unwrap(), 16.0);
        let b = MnBound::new(0.5, 0.5).unwrap();
        assert!(b.holds(1.0, 1.0, 4.0).unwrap());
        assert_eq!(m_n(1.0, 1.0, 4.0), 0.0);
        assert!(b.holds(0.4, 1.0, 4.0).is_err());
        assert!(b.holds(1.0, 0.4, 4.0).is_err());
        assert!(mn_bound_constant(0.0, 1.0).is_err());
    }

    #[test]
    fn rate_comparison_examples() {
        assert!(rate_comparison_quadratic(1.0, 1.0).unwrap());
        assert!(rate_comparison_quadratic(1.0, 3.0).unwrap());
        assert_relative_eq!(rate_exponential(1.0, 3.0).unwrap(), 2.0 - 3f64.ln(), max_relative = 1e-14);
        assert!(rate_comparison_quadratic(1.0, 0.5).is_err());
        assert!(rate_comparison_scaled(1.0, 2.0, 3.9).is_err());
        assert!(rate_comparison_scaled(1.0, 2.0, 4.0).unwrap());
    }

    #[test]
    fn tilted_rate_example() {
        let t = tilted_rate_max(2.0, 1.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(t.z_star, 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(t.bound, 0.375 / 2.25, max_relative = 1e-14);
        let f_star = tilted_rate(2.0, 1.0, 0.5, 1.0, t.z_star).unwrap();
        assert!(f_star <= t.bound);
        // z* is the maximiser
        for i in 1..2000 {
            let z = i as f64 * 0.005;
            assert!(tilted_rate(2.0, 1.0, 0.5, 1.0, z).unwrap() <= f_star + 1e-12);
        }
    }

    #[test]
    fn tilted_rate_symmetric_case() {
        assert!(tilted_rate_max(1.5, 1.5, 0.7, 0.7).is_err());
        let t = tilted_rate_max(1.5, 1.5, 0.4, 0.7).unwrap();
        assert_relative_eq!(t.z_star, 1.5, max_relative = 1e-14);
        assert_eq!(t.bound, 0.0);
        for i in 1..400 {
            assert!(tilted_rate(1.5, 1.5, 0.4, 0.7, i as f64 * 0.02).unwrap() <= 0.0);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let p = DensityProfile::new(vec![0.5, 1.0, 2.0]).unwrap();
        assert_eq!(relative_entropy_geometric_products(&p, &p, 4.0).unwrap(), 0.0);
        let h = relative_entropy_geometric(1.0, 2.0).unwrap();
        assert_relative_eq!(h, (9.0f64 / 8.0).ln(), max_relative = 1e-13);
        let q = DensityProfile::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(relative_entropy_geometric_products(&q, &p, 4.0).is_err());
        let short = DensityProfile::new(vec![1.0]).unwrap();
        assert!(relative_entropy_geometric_products(&short, &p, 4.0).is_err());
    }

    #[test]
    fn quantile_is_monotone_in_mean() {
        let lo = GeometricLaw::new(0.8).unwrap();
        let hi = GeometricLaw::new(3.1).unwrap();
        let mut rng = RngStream::new(3);
        for _ in 0..10_000 {
            let u = rng.uniform_open0();
            assert!(lo.quantile(u) <= hi.quantile(u));
        }
        assert_eq!(lo.quantile(1.0), 0);
    }
}
