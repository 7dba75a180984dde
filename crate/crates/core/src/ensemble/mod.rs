//! Exact computations on the closed box `Λ_ℓ = {1, …, ℓ}` with `k`
//! particles: the canonical state space `Σ_{k,ℓ}`, canonical expectations,
//! the boxed generator and its spectral gap.
//!
//! States are listed in decreasing lexicographic order, so for `ℓ = 2,
//! k = 1` the order is `(1,0), (0,1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Default bound on `|Σ_{k,ℓ}|` for enumeration.
pub const DEFAULT_STATE_CAP: usize = 200_000;
/// Bound on `|Σ_{k,ℓ}|` for dense generator work.
pub const DENSE_STATE_CAP: usize = 4_000;
/// Canonical expectations are exact rationals up to this many states.
pub const RATIONAL_STATE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnsembleError {
    #[error("box with ℓ = {ell}, k = {k} has {states} states, above the cap {cap}")]
    TooLarge { ell: usize, k: u32, states: u128, cap: usize },
    #[error("spectral gap needs at least two states (ℓ = {ell}, k = {k})")]
    Degenerate { ell: usize, k: u32 },
    #[error("invalid box: {0}")]
    Invalid(String),
}

/// `C(k+ℓ-1, ℓ-1)`, saturating at `u128::MAX`.
pub fn canonical_size(ell: usize, k: u32) -> u128 {
    if ell == 0 {
        return 0;
    }
    let (top, r) = (k as u128 + ell as u128 - 1, (ell as u128 - 1).min(k as u128));
    let mut c: u128 = 1;
    for i in 0..r {
        // c·(top-i) is divisible by i+1 after the multiplication
        c = match c.checked_mul(top - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

#[derive(Debug, Clone)]
pub struct CanonicalBox {
    ell: usize,
    k: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl CanonicalBox {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn ordinal(&self, state: &[u32]) -> Option<usize> {
        self.index.get(state).copied()
    }
}

pub fn enumerate_canonical(ell: usize, k: u32) -> Result<CanonicalBox, EnsembleError> {
    enumerate_canonical_capped(ell, k, DEFAULT_STATE_CAP)
}

pub fn enumerate_canonical_capped(ell: usize, k: u32, cap: usize) -> Result<CanonicalBox, EnsembleError> {
    if ell == 0 {
        return Err(EnsembleError::Invalid("box size must be at least 1".into()));
    }
    let size = canonical_size(ell, k);
    if size > cap as u128 {
        return Err(EnsembleError::TooLarge { ell, k, states: size, cap });
    }
    let mut states = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; ell];
    fill(&mut current, 0, k, &mut states);
    debug_assert_eq!(states.len() as u128, size);
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(CanonicalBox { ell, k, states, index })
}

fn fill(current: &mut [u32], pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = left;
        out.push(current.to_vec());
        return;
    }
    for v in (0..=left).rev() {
        current[pos] = v;
        fill(current, pos + 1, left - v, out);
    }
    current[pos] = 0;
}

/// `E_{μ_{k,ℓ}}[g(η(1))]` by brute force over `Σ_{k,ℓ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalExpectation {
    pub value: f64,
    /// Present when the box is small enough for rational arithmetic.
    pub exact: Option<Ratio<u64>>,
}

pub fn canonical_expectation_g(ell: usize, k: u32) -> Result<CanonicalExpectation, EnsembleError> {
    let b = enumerate_canonical(ell, k)?;
    let hits = b.states.iter().filter(|s| s[0] > 0).count() as u64;
    let total = b.len() as u64;
    let exact = (b.len() <= RATIONAL_STATE_CAP).then(|| Ratio::new(hits, total));
    Ok(CanonicalExpectation { value: hits as f64 / total as f64, exact })
}

/// The boxed generator `L_ℓ` with `g(k) = 1{k ≥ 1}` on bonds `{i, i+1}`
/// inside `Λ_ℓ`; row `i` holds the rates out of state `i`.
pub fn build_generator(b: &CanonicalBox) -> Result<DMatrix<f64>, EnsembleError> {
    if b.len() > DENSE_STATE_CAP {
        return Err(EnsembleError::TooLarge { ell: b.ell, k: b.k, states: b.len() as u128, cap: DENSE_STATE_CAP });
    }
    let m = b.len();
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut scratch = vec![0u32; b.ell];
    for (i, s) in b.states.iter().enumerate() {
        for x in 0..b.ell.saturating_sub(1) {
            for (from, to) in [(x, x + 1), (x + 1, x)] {
                if s[from] == 0 {
                    continue;
                }
                scratch.copy_from_slice(s);
                scratch[from] -= 1;
                scratch[to] += 1;
                let j = b.index[&scratch];
                l[(i, j)] += 1.0;
                l[(i, i)] -= 1.0;
            }
        }
    }
    Ok(l)
}

/// Eigenvalues of `-L_ℓ`, ascending.
pub fn spectrum(b: &CanonicalBox) -> Result<Vec<f64>, EnsembleError> {
    let l = build_generator(b)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(-l).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of `-L_ℓ` below this are treated as zero.
fn zero_threshold(b: &CanonicalBox) -> f64 {
    // ‖L‖ ≤ 2·(2(ℓ-1)), so this is far above rounding and far below any gap seen
    1e-9 * (4.0 * b.ell as f64).max(1.0)
}

/// Number of zero eigenvalues of `L_ℓ`.
pub fn kernel_dimension(b: &CanonicalBox) -> Result<usize, EnsembleError> {
    let tol = zero_threshold(b);
    Ok(spectrum(b)?.iter().filter(|v| v.abs() <= tol).count())
}

/// Smallest strictly positive eigenvalue of `-L_ℓ`.
pub fn spectral_gap(b: &CanonicalBox) -> Result<f64, EnsembleError> {
    if b.len() < 2 {
        return Err(EnsembleError::Degenerate { ell: b.ell, k: b.k });
    }
    let tol = zero_threshold(b);
    spectrum(b)?.into_iter().find(|&v| v > tol).ok_or(EnsembleError::Degenerate { ell: b.ell, k: b.k })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub ell: usize,
    pub k: u32,
    pub states: usize,
    pub gap: f64,
    pub scaled_gap: f64,
}

impl GapRow {
    pub fn compute(ell: usize, k: u32) -> Result<Self, EnsembleError> {
        let b = enumerate_canonical(ell, k)?;
        let gap = spectral_gap(&b)?;
        let s = (ell as f64 + k as f64).powi(2);
        Ok(Self { ell, k, states: b.len(), gap, scaled_gap: gap * s })
    }
}

/// All `(ℓ, k)` with `ℓ ≥ 2`, `k ≥ 1`, `ℓ + k ≤ max_sum`, ordered by `ℓ` then `k`.
pub fn gap_cells(max_sum: usize) -> Vec<(usize, u32)> {
    (2..max_sum).flat_map(|ell| (1..=(max_sum - ell) as u32).map(move |k| (ell, k))).collect()
}

pub fn gap_table(max_sum: usize) -> Result<Vec<GapRow>, EnsembleError> {
    gap_cells(max_sum).into_iter().map(|(ell, k)| GapRow::compute(ell, k)).collect()
}

/// `ell,k,states,gap,gap_scaled` rows.
pub fn gap_table_csv(rows: &[GapRow]) -> String {
    let mut out = String::from("ell,k,states,gap,gap_scaled\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:?},{:?}", r.ell, r.k, r.states, r.gap, r.scaled_gap);
    }
    out
}

/// `max 1/(gap·(ℓ+k)²)` over a table.
pub fn kappa0_from_rows(rows: &[GapRow]) -> f64 {
    rows.iter().map(|r| 1.0 / r.scaled_gap).fold(0.0, f64::max)
}

/// `max 1/(gap·(ℓ+k)²)` over all nondegenerate boxes with `ℓ + k ≤ max_sum`.
pub fn kappa0_estimate(max_sum: usize) -> Result<f64, EnsembleError> {
    if max_sum < 3 {
        return Err(EnsembleError::Invalid(format!("max_sum must be at least 3, got {max_sum}")));
    }
    Ok(kappa0_from_rows(&gap_table(max_sum)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let b = enumerate_canonical(2, 1).unwrap();
        assert_eq!(b.states(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(enumerate_canonical(3, 2).unwrap().len(), 6);
        for k in [0, 1, 7] {
            assert_eq!(enumerate_canonical(1, k).unwrap().states(), &[vec![k]]);
        }
        assert!(matches!(enumerate_canonical(30, 30), Err(EnsembleError::TooLarge { .. })));
        assert!(enumerate_canonical(0, 1).is_err());
    }

    #[test]
    fn size_matches_binomial() {
        for ell in 1..7 {
            for k in 0..7 {
                let b = enumerate_canonical(ell, k).unwrap();
                assert_eq!(b.len() as u128, canonical_size(ell, k));
                assert!(b.states().iter().all(|s| s.iter().sum::<u32>() == k));
                for (i, s) in b.states().iter().enumerate() {
                    assert_eq!(b.ordinal(s), Some(i));
                }
                assert!(b.states().windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let e = canonical_expectation_g(2, 1).unwrap();
        assert_eq!(e.exact, Some(Ratio::new(1, 2)));
        assert_eq!(canonical_expectation_g(3, 2).unwrap().exact, Some(Ratio::new(1, 2)));
        assert_eq!(canonical_expectation_g(4, 0).unwrap().value, 0.0);
    }

    #[test]
    fn generator_examples() {
        let l = build_generator(&enumerate_canonical(2, 1).unwrap()).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]));
        let l1 = build_generator(&enumerate_canonical(1, 5).unwrap()).unwrap();
        assert_eq!(l1, DMatrix::zeros(1, 1));
    }

    #[test]
    fn gap_examples() {
        let b = enumerate_canonical(2, 1).unwrap();
        assert!((spectral_gap(&b).unwrap() - 2.0).abs() <= 1e-12);
        assert!(matches!(spectral_gap(&enumerate_canonical(1, 3).unwrap()), Err(EnsembleError::Degenerate { .. })));
        assert!(matches!(spectral_gap(&enumerate_canonical(3, 0).unwrap()), Err(EnsembleError::Degenerate { .. })));
    }

    #[test]
    fn kappa0_examples() {
        assert!(kappa0_estimate(3).unwrap() >= 1.0 / 18.0 - 1e-15);
        assert!(kappa0_estimate(2).is_err());
        let mut last = 0.0;
        for m in 3..9 {
            let v = kappa0_estimate(m).unwrap();
            assert!(v.is_finite() && v >= last);
            last = v;
        }
    }

    #[test]
    fn csv_table_shape() {
        let rows = gap_table(5).unwrap();
        let csv = gap_table_csv(&rows);
        assert!(csv.starts_with("ell,k,states,gap,gap_scaled\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }
}
