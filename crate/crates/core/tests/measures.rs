use fdehydro_core::lattice::{DensityProfile, ScalingParams};
use fdehydro_core::measures::{
    chernoff_lower, chernoff_upper, m_n, m_n_defining, mgf_geometric, phi_n, phi_n_prime, rate_exponential,
    rate_geometric, relative_entropy_geometric, relative_entropy_geometric_products, GeometricLaw, RateFunctionParams,
};
use fdehydro_core::zrp::sample_product_measure;
use fdehydro_core::RngStream;
use proptest::prelude::*;

/// Exact law of a sum of `ell` i.i.d. geometrics with parameter `theta`
/// (negative binomial), as a pmf on `0..len`.
fn negative_binomial_pmf(ell: usize, theta: f64, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[0] = (1.0 - theta).powi(ell as i32);
    for k in 1..len {
        p[k] = p[k - 1] * theta * (k - 1 + ell) as f64 / k as f64;
    }
    p
}

fn exact_tails(ell: usize, mean: f64, threshold: f64) -> (f64, f64) {
    let theta = mean / (1.0 + mean);
    // far enough out that the remaining mass is below f64 resolution
    let len = 20 * (threshold.ceil() as usize + ell) + 2000;
    let pmf = negative_binomial_pmf(ell, theta, len);
    let at_least: f64 = pmf.iter().enumerate().filter(|(k, _)| (*k as f64) >= threshold).map(|(_, p)| p).sum();
    let at_most: f64 = pmf.iter().enumerate().filter(|(k, _)| (*k as f64) <= threshold).map(|(_, p)| p).sum();
    (at_least, at_most)
}

#[test]
fn chernoff_bounds_dominate_exact_negative_binomial_tails() {
    for ell in [1usize, 5, 20, 50] {
        for nalpha in [1.0, 4.0, 16.0] {
            for rho in [0.5, 1.0, 2.0] {
                let params = RateFunctionParams::uniform(rho).unwrap();
                for factor in [1.2, 1.5, 2.0, 3.0] {
                    let a = factor * rho;
                    let (upper, _) = exact_tails(ell, rho * nalpha, ell as f64 * a * nalpha);
                    let bound = chernoff_upper(&params, nalpha, ell, a).unwrap();
                    assert!(upper <= bound, "upper ell={ell} nalpha={nalpha} rho={rho} a={a}: {upper} > {bound}");
                }
                for factor in [0.3, 0.5, 0.6, 0.8] {
                    let a = factor * rho;
                    let (_, lower) = exact_tails(ell, rho * nalpha, ell as f64 * a * nalpha);
                    let bound = chernoff_lower(&params, nalpha, ell, a).unwrap();
                    assert!(lower <= bound, "lower ell={ell} nalpha={nalpha} rho={rho} a={a}: {lower} > {bound}");
                }
            }
        }
    }
}

#[test]
fn sampled_tail_frequency_matches_exact_tail() {
    let (ell, nalpha, rho, a) = (50usize, 4.0, 1.0, 1.2);
    let threshold = ell as f64 * a * nalpha;
    let (exact, _) = exact_tails(ell, rho * nalpha, threshold);
    let law = GeometricLaw::scaled(rho, nalpha).unwrap();
    let mut rng = RngStream::new(11);
    let trials = 200_000;
    let hits = (0..trials).filter(|_| (0..ell).map(|_| law.sample(&mut rng)).sum::<u64>() as f64 >= threshold).count();
    let freq = hits as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((freq - exact).abs() <= 3.0 * se, "freq {freq}, exact {exact}, se {se}");
}

#[test]
fn relative_entropy_matches_monte_carlo_log_likelihood() {
    let p = ScalingParams::new(4, 0.5).unwrap();
    let u1 = DensityProfile::new(vec![0.5, 1.0, 1.5, 2.0]).unwrap();
    let u2 = DensityProfile::new(vec![1.0, 1.0, 0.8, 2.5]).unwrap();
    let closed = relative_entropy_geometric_products(&u1, &u2, p.n_alpha()).unwrap();
    let log_pmf = |m: f64, k: u64| {
        let theta = m / (1.0 + m);
        (1.0 - theta).ln() + k as f64 * theta.ln()
    };
    let mut rng = RngStream::new(5);
    let samples = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let eta = sample_product_measure(&u1, &p, &mut rng).unwrap();
        let llr: f64 = eta
            .counts()
            .iter()
            .zip(u1.values().iter().zip(u2.values()))
            .map(|(&k, (&a, &b))| log_pmf(p.n_alpha() * a, k) - log_pmf(p.n_alpha() * b, k))
            .sum();
        sum += llr;
        sum_sq += llr * llr;
    }
    let mean = sum / samples as f64;
    let se = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
    assert!((mean - closed).abs() <= 3.0 * se, "mc {mean} +- {se}, closed form {closed}");
}

#[test]
fn geometric_rate_is_legendre_transform_of_log_mgf() {
    for rho in [0.3f64, 1.0, 4.0] {
        let lambda_max = ((1.0 + rho) / rho).ln();
        for a in [0.0, 0.1, 0.5, 1.0, 2.5, 8.0] {
            let steps = 200_000;
            let lo = -30.0;
            let best = (0..steps)
                .map(|i| lo + (lambda_max - lo) * i as f64 / steps as f64)
                .map(|l| l * a - mgf_geometric(rho, l).to_f64().ln())
                .fold(f64::NEG_INFINITY, f64::max);
            let rate = rate_geometric(rho, a).unwrap();
            assert!((best - rate).abs() <= 1e-6 * (1.0 + rate), "rho={rho} a={a}: sup {best}, rate {rate}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn m_n_closed_form_matches_definition(u in 1e-3f64..50.0, v in 1e-3f64..50.0, nalpha in 1.0f64..64.0) {
        let closed = m_n(u, v, nalpha);
        let defining = m_n_defining(u, v, nalpha);
        // the defining form subtracts terms of size φₙ, so compare on that scale
        let scale = phi_n(v, nalpha).abs() + phi_n(u, nalpha).abs() + (phi_n_prime(u, nalpha) * (v - u)).abs();
        prop_assert!((closed - defining).abs() <= 1e-12 * scale, "{closed} vs {defining}");
    }

    #[test]
    fn rate_functions_nonnegative_and_convex(rho in 0.05f64..20.0, a in 0.05f64..40.0) {
        let h = 1e-3 * a;
        for rate in [rate_exponential, rate_geometric] {
            let mid = rate(rho, a).unwrap();
            prop_assert!(mid >= 0.0);
            let second = rate(rho, a + h).unwrap() + rate(rho, a - h).unwrap() - 2.0 * mid;
            prop_assert!(second > 0.0, "second difference {second} at rho={rho}, a={a}");
        }
        prop_assert_eq!(rate_exponential(rho, rho).unwrap(), 0.0);
        prop_assert_eq!(rate_geometric(rho, rho).unwrap(), 0.0);
    }

    #[test]
    fn site_entropy_is_geometric_rate(m1 in 0.01f64..50.0, m2 in 0.01f64..50.0) {
        let h = relative_entropy_geometric(m1, m2).unwrap();
        let r = rate_geometric(m2, m1).unwrap();
        prop_assert!((h - r).abs() <= 1e-10 * (1.0 + r), "{h} vs {r}");
    }
}
