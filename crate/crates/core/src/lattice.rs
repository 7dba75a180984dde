//! Discrete circle `𝕋ₙ = ℤ/nℤ`, particle configurations and density profiles.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("site {0} holds no particle")]
    EmptySite(usize),
    #[error("sites {x} and {y} are not nearest neighbours on a torus of size {n}")]
    NotNeighbor { x: usize, y: usize, n: usize },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid scaling parameters: {0}")]
    InvalidParams(String),
    #[error("invalid density profile: {0}")]
    InvalidProfile(String),
    #[error("malformed record: {0}")]
    Parse(String),
}

/// Lattice size `n` and mass exponent `α`, with the derived `n^α` and the
/// time speedup `n^(2+2α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScaling", into = "RawScaling")]
pub struct ScalingParams {
    n: usize,
    alpha: f64,
    n_alpha: f64,
    speedup: f64,
}

#[derive(Serialize, Deserialize)]
struct RawScaling {
    n: usize,
    alpha: f64,
}

impl TryFrom<RawScaling> for ScalingParams {
    type Error = LatticeError;
    fn try_from(raw: RawScaling) -> Result<Self, Self::Error> {
        ScalingParams::new(raw.n, raw.alpha)
    }
}

impl From<ScalingParams> for RawScaling {
    fn from(p: ScalingParams) -> Self {
        RawScaling { n: p.n, alpha: p.alpha }
    }
}

impl ScalingParams {
    pub fn new(n: usize, alpha: f64) -> Result<Self, LatticeError> {
        if n < 2 {
            return Err(LatticeError::InvalidParams(format!("n = {n} must be at least 2")));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(LatticeError::InvalidParams(format!("alpha = {alpha} must be finite and >= 0")));
        }
        let ln_n = (n as f64).ln();
        Ok(Self { n, alpha, n_alpha: (alpha * ln_n).exp(), speedup: ((2.0 + 2.0 * alpha) * ln_n).exp() })
    }

    /// Same as [`ScalingParams::new`] but additionally requires `α ∈ (0, 1)`,
    /// the regime where the fast diffusion equation is the hydrodynamic limit.
    pub fn hydrodynamic(n: usize, alpha: f64) -> Result<Self, LatticeError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(LatticeError::InvalidParams(format!(
                "alpha = {alpha} must lie in (0, 1) for hydrodynamic experiments"
            )));
        }
        Self::new(n, alpha)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `n^α`.
    pub fn n_alpha(&self) -> f64 {
        self.n_alpha
    }

    /// `n^(-α)`.
    pub fn inv_n_alpha(&self) -> f64 {
        1.0 / self.n_alpha
    }

    /// `n^(2+2α)`.
    pub fn speedup(&self) -> f64 {
        self.speedup
    }
}

/// A site of `𝕋ₙ`. Arithmetic wraps modulo `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusIndex {
    x: usize,
    n: usize,
}

impl TorusIndex {
    /// Reduces `x` modulo `n`.
    pub fn new(x: usize, n: usize) -> Self {
        assert!(n > 0, "torus size must be positive");
        Self { x: x % n, n }
    }

    pub fn get(self) -> usize {
        self.x
    }

    pub fn size(self) -> usize {
        self.n
    }

    pub fn right(self) -> Self {
        self.offset(1)
    }

    pub fn left(self) -> Self {
        self.offset(-1)
    }

    pub fn offset(self, by: isize) -> Self {
        let n = self.n as isize;
        let x = (self.x as isize + by.rem_euclid(n)).rem_euclid(n);
        Self { x: x as usize, n: self.n }
    }

    pub fn is_neighbor(self, other: Self) -> bool {
        self.n == other.n && (self.right() == other || self.left() == other)
    }

    /// Macroscopic position `x/n ∈ [0, 1)`.
    pub fn position(self) -> f64 {
        self.x as f64 / self.n as f64
    }
}

/// Particle counts per site with a cached total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Configuration {
    counts: Vec<u64>,
    total: u64,
}

impl TryFrom<Vec<u64>> for Configuration {
    type Error = LatticeError;
    fn try_from(counts: Vec<u64>) -> Result<Self, Self::Error> {
        Ok(Configuration::new(counts))
    }
}

impl From<Configuration> for Vec<u64> {
    fn from(c: Configuration) -> Self {
        c.counts
    }
}

impl Configuration {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn empty(n: usize) -> Self {
        Self { counts: vec![0; n], total: 0 }
    }

    pub fn constant(n: usize, k: u64) -> Self {
        Self::new(vec![k; n])
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, x: TorusIndex) -> u64 {
        self.counts[x.get()]
    }

    pub fn index(&self, x: usize) -> TorusIndex {
        TorusIndex::new(x, self.len())
    }

    /// Returns `η^{x,y}`: one particle moved from `x` to its neighbour `y`.
    pub fn jump(&self, x: TorusIndex, y: TorusIndex) -> Result<Self, LatticeError> {
        let mut next = self.clone();
        next.apply_jump(x, y)?;
        Ok(next)
    }

    /// In-place version of [`Configuration::jump`].
    pub fn apply_jump(&mut self, x: TorusIndex, y: TorusIndex) -> Result<(), LatticeError> {
        let n = self.len();
        if x.size() != n || y.size() != n || !x.is_neighbor(y) {
            return Err(LatticeError::NotNeighbor { x: x.get(), y: y.get(), n });
        }
        if self.counts[x.get()] == 0 {
            return Err(LatticeError::EmptySite(x.get()));
        }
        self.counts[x.get()] -= 1;
        self.counts[y.get()] += 1;
        Ok(())
    }

    /// Raw move used by the simulation kernel; the caller guarantees
    /// `counts[from] > 0`.
    #[inline]
    pub(crate) fn move_unchecked(&mut self, from: usize, to: usize) {
        debug_assert!(self.counts[from] > 0);
        self.counts[from] -= 1;
        self.counts[to] = self.counts[to].checked_add(1).expect("site count overflow");
    }

    /// Coordinatewise order `η₁ ≼ η₂`.
    pub fn partial_order_leq(&self, other: &Self) -> Result<bool, LatticeError> {
        if self.len() != other.len() {
            return Err(LatticeError::SizeMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b))
    }

    /// One row per site: `site,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,count\n");
        for (x, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{x},{c}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, LatticeError> {
        let rows = parse_site_rows(text)?;
        let counts = rows
            .into_iter()
            .map(|v| v.parse::<u64>().map_err(|e| LatticeError::Parse(format!("{v}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(counts))
    }

    pub fn to_json_record(&self, params: &ScalingParams) -> Result<String, LatticeError> {
        check_len(self.len(), params.n())?;
        let record = LatticeRecord { n: params.n(), alpha: params.alpha(), data: self.counts.clone() };
        serde_json::to_string(&record).map_err(|e| LatticeError::Parse(e.to_string()))
    }

    pub fn from_json_record(text: &str) -> Result<(Self, ScalingParams), LatticeError> {
        let record: LatticeRecord<u64> = serde_json::from_str(text).map_err(|e| LatticeError::Parse(e.to_string()))?;
        check_len(record.data.len(), record.n)?;
        let params = ScalingParams::new(record.n, record.alpha)?;
        Ok((Self::new(record.data), params))
    }
}

/// Non-negative real field on `𝕋ₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DensityProfile {
    values: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DensityProfile {
    type Error = LatticeError;
    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        DensityProfile::new(values)
    }
}

impl From<DensityProfile> for Vec<f64> {
    fn from(p: DensityProfile) -> Self {
        p.values
    }
}

impl DensityProfile {
    pub fn new(values: Vec<f64>) -> Result<Self, LatticeError> {
        if let Some((x, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(LatticeError::InvalidProfile(format!("value {v} at site {x}")));
        }
        Ok(Self { values })
    }

    /// Samples `u(x/n)` at every site.
    pub fn from_fn(n: usize, u: impl Fn(f64) -> f64) -> Result<Self, LatticeError> {
        Self::new((0..n).map(|x| u(x as f64 / n as f64)).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self, LatticeError> {
        Self::new(vec![c; n])
    }

    /// Wraps values produced by a solver without re-validating them.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.values.iter().all(|v| *v > 0.0)
    }

    /// One row per site: `site,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,value\n");
        for (x, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{x},{v:e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, LatticeError> {
        let rows = parse_site_rows(text)?;
        let values = rows
            .into_iter()
            .map(|v| v.parse::<f64>().map_err(|e| LatticeError::Parse(format!("{v}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(values)
    }

    pub fn to_json_record(&self, params: &ScalingParams) -> Result<String, LatticeError> {
        check_len(self.len(), params.n())?;
        let record = LatticeRecord { n: params.n(), alpha: params.alpha(), data: self.values.clone() };
        serde_json::to_string(&record).map_err(|e| LatticeError::Parse(e.to_string()))
    }

    pub fn from_json_record(text: &str) -> Result<(Self, ScalingParams), LatticeError> {
        let record: LatticeRecord<f64> = serde_json::from_str(text).map_err(|e| LatticeError::Parse(e.to_string()))?;
        check_len(record.data.len(), record.n)?;
        let params = ScalingParams::new(record.n, record.alpha)?;
        Ok((Self::new(record.data)?, params))
    }
}

/// Compact JSON form `{n, alpha, data: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeRecord<T> {
    pub n: usize,
    pub alpha: f64,
    pub data: Vec<T>,
}

fn check_len(len: usize, n: usize) -> Result<(), LatticeError> {
    if len != n {
        return Err(LatticeError::SizeMismatch { left: len, right: n });
    }
    Ok(())
}

/// Parses `site,value` rows; sites must appear as `0..n` in order.
fn parse_site_rows(text: &str) -> Result<Vec<&str>, LatticeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().skip(1).filter(|l| !l.trim().is_empty()).enumerate() {
        let (site, value) =
            line.split_once(',').ok_or_else(|| LatticeError::Parse(format!("row `{line}` lacks a comma")))?;
        let site: usize = site.trim().parse().map_err(|_| LatticeError::Parse(format!("bad site `{site}`")))?;
        if site != i {
            return Err(LatticeError::Parse(format!("expected site {i}, found {site}")));
        }
        out.push(value.trim());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(v: &[u64]) -> Configuration {
        Configuration::new(v.to_vec())
    }

    #[test]
    fn jump_moves_one_particle() {
        let eta = cfg(&[2, 0, 1, 0]);
        let out = eta.jump(eta.index(0), eta.index(1)).unwrap();
        assert_eq!(out.counts(), &[1, 1, 1, 0]);
        assert_eq!(out.total(), 3);
    }

    #[test]
    fn jump_from_empty_site_fails() {
        let eta = cfg(&[2, 0, 1, 0]);
        assert_eq!(eta.jump(eta.index(1), eta.index(2)), Err(LatticeError::EmptySite(1)));
    }

    #[test]
    fn jump_wraps_around() {
        let eta = cfg(&[1, 1, 1]);
        let out = eta.jump(eta.index(2), eta.index(0)).unwrap();
        assert_eq!(out.counts(), &[2, 1, 0]);
    }

    #[test]
    fn jump_rejects_distant_sites() {
        let eta = cfg(&[1, 1, 1, 1, 1]);
        assert!(matches!(eta.jump(eta.index(0), eta.index(2)), Err(LatticeError::NotNeighbor { .. })));
        assert!(matches!(eta.jump(eta.index(0), eta.index(0)), Err(LatticeError::NotNeighbor { .. })));
    }

    #[test]
    fn order_examples() {
        assert!(cfg(&[0, 1, 2]).partial_order_leq(&cfg(&[1, 1, 2])).unwrap());
        assert!(!cfg(&[2, 0]).partial_order_leq(&cfg(&[1, 5])).unwrap());
        let eta = cfg(&[3, 1, 4]);
        assert!(eta.partial_order_leq(&eta).unwrap());
        assert!(matches!(cfg(&[1]).partial_order_leq(&cfg(&[1, 2])), Err(LatticeError::SizeMismatch { .. })));
    }

    #[test]
    fn scaling_params_derived_values() {
        let p = ScalingParams::new(64, 0.5).unwrap();
        assert!((p.n_alpha() - 8.0).abs() < 1e-12);
        assert!((p.speedup() - 64f64.powi(3)).abs() / p.speedup() < 1e-14);
        assert!(ScalingParams::new(1, 0.5).is_err());
        assert!(ScalingParams::new(4, -0.1).is_err());
        assert!(ScalingParams::hydrodynamic(4, 0.0).is_err());
        assert!(ScalingParams::hydrodynamic(4, 0.5).is_ok());
    }

    #[test]
    fn torus_index_wraps() {
        let x = TorusIndex::new(0, 5);
        assert_eq!(x.left().get(), 4);
        assert_eq!(x.offset(-7).get(), 3);
        assert_eq!(x.offset(12).get(), 2);
        assert!(x.is_neighbor(TorusIndex::new(4, 5)));
    }

    #[test]
    fn profile_rejects_negative() {
        assert!(DensityProfile::new(vec![1.0, -0.1]).is_err());
        assert!(DensityProfile::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn csv_and_json_records_parse_back() {
        let p = ScalingParams::new(4, 0.5).unwrap();
        let eta = cfg(&[4, 0, 2, 2]);
        assert_eq!(Configuration::from_csv(&eta.to_csv()).unwrap(), eta);
        let (back, q) = Configuration::from_json_record(&eta.to_json_record(&p).unwrap()).unwrap();
        assert_eq!(back, eta);
        assert_eq!(q, p);
        let u = DensityProfile::new(vec![0.25, 1.5, 3.0, 1e-7]).unwrap();
        assert_eq!(DensityProfile::from_csv(&u.to_csv()).unwrap(), u);
        let (back, _) = DensityProfile::from_json_record(&u.to_json_record(&p).unwrap()).unwrap();
        assert_eq!(back, u);
        assert!(eta.to_json_record(&ScalingParams::new(5, 0.5).unwrap()).is_err());
    }

    fn triple() -> impl Strategy<Value = (Vec<u64>, Vec<u64>, Vec<u64>)> {
        (1usize..8).prop_flat_map(|n| {
            let v = || proptest::collection::vec(0u64..3, n);
            (v(), v(), v())
        })
    }

    proptest! {
        #[test]
        fn order_is_a_partial_order((a, b, c) in triple()) {
            let (a, b, c) = (cfg(&a), cfg(&b), cfg(&c));
            prop_assert!(a.partial_order_leq(&a).unwrap());
            if a.partial_order_leq(&b).unwrap() && b.partial_order_leq(&a).unwrap() {
                prop_assert_eq!(&a, &b);
            }
            if a.partial_order_leq(&b).unwrap() && b.partial_order_leq(&c).unwrap() {
                prop_assert!(a.partial_order_leq(&c).unwrap());
            }
        }

        #[test]
        fn jump_preserves_total(counts in proptest::collection::vec(0u64..5, 2..12), x in 0usize..12, right in any::<bool>()) {
            let eta = cfg(&counts);
            let x = eta.index(x);
            let y = if right { x.right() } else { x.left() };
            match eta.jump(x, y) {
                Ok(next) => {
                    prop_assert_eq!(next.total(), eta.total());
                    prop_assert_eq!(next.counts().iter().sum::<u64>(), eta.total());
                }
                Err(e) => prop_assert_eq!(e, LatticeError::EmptySite(x.get())),
            }
        }
    }
}
