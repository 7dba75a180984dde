//! Adaptive Dormand-Prince 5(4) for autonomous systems `y' = f(y)`.

use super::MolError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_step: f64,
    /// Steps shorter than this abort with [`MolError::StiffnessFailure`].
    pub min_step: f64,
    pub max_steps: u64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10, max_step: f64::INFINITY, min_step: 1e-15, max_steps: 200_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// step-size controller (stabilised PI form)
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrates `y' = rhs(y)` from `t = 0` to `t_end`, calling
/// `on_checkpoint(t, y)` exactly at every requested time (sorted, in
/// `[0, t_end]`). `after_step(y)` sees every accepted state and may veto it.
pub fn integrate<F, C, A>(
    mut rhs: F,
    y0: &[f64],
    t_end: f64,
    checkpoints: &[f64],
    opts: &IntegratorOptions,
    mut on_checkpoint: C,
    mut after_step: A,
) -> Result<(Vec<f64>, IntegratorStats), MolError>
where
    F: FnMut(&[f64], &mut [f64]),
    C: FnMut(f64, &[f64]),
    A: FnMut(f64, &[f64]) -> Result<(), MolError>,
{
    let dim = y0.len();
    let mut stats = IntegratorStats::default();
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut cps = checkpoints.iter().copied().peekable();
    let mut t = 0.0;
    while let Some(&c) = cps.peek() {
        if c > 0.0 {
            break;
        }
        on_checkpoint(0.0, &y);
        cps.next();
    }
    if t_end <= 0.0 || dim == 0 {
        for c in cps {
            on_checkpoint(c, &y);
        }
        return Ok((y, stats));
    }

    rhs(&y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h = initial_step(&mut rhs, &y, &k[0], opts, &mut tmp, &mut stats).min(opts.max_step).min(t_end);
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(MolError::StiffnessFailure { time: t, step: h });
        }
        if h < opts.min_step {
            return Err(MolError::StiffnessFailure { time: t, step: h });
        }
        let stop = cps.peek().copied().unwrap_or(t_end).min(t_end);
        let (h_try, hits_stop) = if t + h >= stop * (1.0 - 4.0 * f64::EPSILON) { (stop - t, true) } else { (h, false) };

        stage(&y, h_try, &[(A21, 0)], &k, &mut tmp);
        rhs(&tmp, &mut k[1]);
        stage(&y, h_try, &[(A31, 0), (A32, 1)], &k, &mut tmp);
        rhs(&tmp, &mut k[2]);
        stage(&y, h_try, &[(A41, 0), (A42, 1), (A43, 2)], &k, &mut tmp);
        rhs(&tmp, &mut k[3]);
        stage(&y, h_try, &[(A51, 0), (A52, 1), (A53, 2), (A54, 3)], &k, &mut tmp);
        rhs(&tmp, &mut k[4]);
        stage(&y, h_try, &[(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)], &k, &mut tmp);
        rhs(&tmp, &mut k[5]);
        stage(&y, h_try, &[(A71, 0), (A73, 2), (A74, 3), (A75, 4), (A76, 5)], &k, &mut y_new);
        rhs(&y_new, &mut k[6]);
        stats.rhs_evals += 6;

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let e = h_try * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            err = f64::MAX;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_next = h_try / fac;
            if last_rejected {
                h_next = h_next.min(h_try);
            }
            fac_old = err.max(1e-4);
            stats.accepted += 1;
            t = if hits_stop { stop } else { t + h_try };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            after_step(t, &y)?;
            if hits_stop {
                while let Some(&c) = cps.peek() {
                    if c > t {
                        break;
                    }
                    on_checkpoint(c, &y);
                    cps.next();
                }
                // a clipped step says nothing about the natural step size
                h = h.max(h_next);
            } else {
                h = h_next;
            }
            h = h.min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h = h_try / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    for c in cps {
        on_checkpoint(c, &y);
    }
    Ok((y, stats))
}

#[inline]
fn stage(y: &[f64], h: f64, terms: &[(f64, usize)], k: &[Vec<f64>], out: &mut [f64]) {
    out.copy_from_slice(y);
    for &(a, j) in terms {
        let ha = h * a;
        for (o, kv) in out.iter_mut().zip(&k[j]) {
            *o += ha * kv;
        }
    }
}

fn initial_step<F: FnMut(&[f64], &mut [f64])>(
    rhs: &mut F,
    y: &[f64],
    f0: &[f64],
    opts: &IntegratorOptions,
    tmp: &mut [f64],
    stats: &mut IntegratorStats,
) -> f64 {
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let rms = |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    let d0 = rms(y);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    rhs(&y1, tmp);
    stats.rhs_evals += 1;
    let diff: Vec<f64> = tmp.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_veto(_: f64, _: &[f64]) -> Result<(), MolError> {
        Ok(())
    }

    #[test]
    fn exponential_decay() {
        let mut seen = Vec::new();
        let (y, stats) = integrate(
            |y, out| out[0] = -y[0],
            &[1.0],
            2.0,
            &[0.5, 1.0, 2.0],
            &IntegratorOptions::default(),
            |t, y| seen.push((t, y[0])),
            no_veto,
        )
        .unwrap();
        assert_eq!(seen.len(), 3);
        for (t, v) in seen {
            assert!((v - (-t).exp()).abs() < 1e-9, "{t} {v}");
        }
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-9);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_keeps_phase() {
        let (y, _) = integrate(
            |y, out| {
                out[0] = y[1];
                out[1] = -y[0];
            },
            &[1.0, 0.0],
            10.0,
            &[],
            &IntegratorOptions::default(),
            |_, _| {},
            no_veto,
        )
        .unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] + 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn min_step_triggers_failure() {
        let opts = IntegratorOptions { min_step: 1e-3, ..Default::default() };
        let r = integrate(|y, out| out[0] = -1e6 * y[0], &[1.0], 1.0, &[], &opts, |_, _| {}, no_veto);
        assert!(matches!(r, Err(MolError::StiffnessFailure { .. })));
    }

    #[test]
    fn checkpoint_at_zero_and_end() {
        let mut seen = Vec::new();
        integrate(
            |_, out| out[0] = 1.0,
            &[0.0],
            1.0,
            &[0.0, 1.0],
            &IntegratorOptions::default(),
            |t, y| seen.push((t, y[0])),
            no_veto,
        )
        .unwrap();
        assert_eq!(seen[0], (0.0, 0.0));
        assert_eq!(seen[1].0, 1.0);
        assert!((seen[1].1 - 1.0).abs() < 1e-12);
    }
}
