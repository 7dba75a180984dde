//! Exact simulation of the zero-range process with `g(k) = 1{k ≥ 1}`,
//! nearest-neighbour symmetric jumps and generator speedup `n^(2+2α)`.
//!
//! Every occupied site carries the same jump rate `2n^(2+2α)`, so the process
//! is simulated with a Gillespie loop over the set of occupied sites: the
//! holding time is exponential with rate `2n^(2+2α)·|occupied|`, the moving
//! site is uniform among occupied sites and the direction is a fair coin.
//! The occupied set is a dense array with a position index, giving O(1)
//! insertion, removal and uniform sampling.
//!
//! Time is macroscopic: the speedup sits inside the generator, so
//! `simulate(t)` already runs on the hydrodynamic time scale.

mod coupled;
mod observables;
mod record;
mod sampling;

pub use coupled::CoupledState;
pub use observables::{
    block_average, block_averages, density_field, empirical_pairing, one_block_statistic, OneBlockStatistic,
};
pub use record::TrajectoryRecord;
pub use sampling::{sample_invariant, sample_product_measure, sample_product_measure_pair};

use crate::lattice::{Configuration, LatticeError, ScalingParams};
use crate::rng::RngStream;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid checkpoint: {0}")]
    InvalidCheckpoint(String),
    #[error("coupling order violated at site {site} after event {event}")]
    OrderViolation { event: u64, site: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

const NOT_OCCUPIED: u32 = u32::MAX;

/// Dense set of occupied sites with O(1) insert, remove and uniform pick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct OccupiedSet {
    sites: Vec<u32>,
    slot: Vec<u32>,
}

impl OccupiedSet {
    fn from_config(config: &Configuration) -> Self {
        let mut set = Self { sites: Vec::new(), slot: vec![NOT_OCCUPIED; config.len()] };
        for (x, &c) in config.counts().iter().enumerate() {
            if c > 0 {
                set.insert(x);
            }
        }
        set
    }

    #[inline]
    fn insert(&mut self, x: usize) {
        debug_assert_eq!(self.slot[x], NOT_OCCUPIED);
        self.slot[x] = self.sites.len() as u32;
        self.sites.push(x as u32);
    }

    #[inline]
    fn remove(&mut self, x: usize) {
        let i = self.slot[x] as usize;
        let last = *self.sites.last().expect("remove from empty occupied set");
        self.sites.swap_remove(i);
        if last as usize != x {
            self.slot[last as usize] = i as u32;
        }
        self.slot[x] = NOT_OCCUPIED;
    }

    #[inline]
    fn len(&self) -> usize {
        self.sites.len()
    }

    #[inline]
    fn at(&self, i: usize) -> usize {
        self.sites[i] as usize
    }

    fn contains(&self, x: usize) -> bool {
        self.slot[x] != NOT_OCCUPIED
    }
}

/// State of one copy of the process.
#[derive(Debug, Clone)]
pub struct SimState {
    config: Configuration,
    occupied: OccupiedSet,
    macro_time: f64,
    params: ScalingParams,
    rng: RngStream,
    event_count: u64,
    /// Absolute time of an already drawn event that fell past the last
    /// stopping time. Keeping it makes stopping at checkpoints invisible to
    /// the random sequence.
    pending: Option<f64>,
}

impl SimState {
    pub fn new(config: Configuration, params: ScalingParams, rng: RngStream) -> Result<Self, SimError> {
        if config.len() != params.n() {
            return Err(LatticeError::SizeMismatch { left: config.len(), right: params.n() }.into());
        }
        let occupied = OccupiedSet::from_config(&config);
        Ok(Self { config, occupied, macro_time: 0.0, params, rng, event_count: 0, pending: None })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn params(&self) -> &ScalingParams {
        &self.params
    }

    pub fn macro_time(&self) -> f64 {
        self.macro_time
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.len()
    }

    /// Sites currently holding at least one particle, in internal order.
    pub fn occupied_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied.sites.iter().map(|&x| x as usize)
    }

    /// Total jump rate `2n^(2+2α)·|occupied|`.
    pub fn total_rate(&self) -> f64 {
        2.0 * self.params.speedup() * self.occupied.len() as f64
    }

    #[inline]
    fn move_particle(&mut self, from: usize, to: usize) {
        self.config.move_unchecked(from, to);
        if self.config.counts()[from] == 0 {
            self.occupied.remove(from);
        }
        if self.config.counts()[to] == 1 {
            self.occupied.insert(to);
        }
    }

    /// Neighbour of `x` in direction encoded by the low bit of `bits`.
    #[inline]
    fn neighbour(n: usize, x: usize, bits: u64) -> usize {
        if bits & 1 == 0 {
            if x + 1 == n {
                0
            } else {
                x + 1
            }
        } else if x == 0 {
            n - 1
        } else {
            x - 1
        }
    }

    /// Draws the next jump: a uniform occupied site and a direction from a
    /// single 64-bit word (high bits pick the site, the low bit the side).
    #[inline]
    fn draw_jump(&mut self) -> (usize, usize) {
        let bits = self.rng.next_u64();
        let i = ((bits as u128 * self.occupied.len() as u128) >> 64) as usize;
        let x = self.occupied.at(i);
        (x, Self::neighbour(self.params.n(), x, bits))
    }

    /// Advances the chain until `target`, returning early only if there are
    /// no particles (nothing ever happens then).
    fn advance_to(&mut self, target: f64) {
        let rate_unit = 2.0 * self.params.speedup();
        loop {
            if self.occupied.len() == 0 {
                self.pending = None;
                break;
            }
            let next = match self.pending.take() {
                Some(t) => t,
                None => self.macro_time + self.rng.exponential(rate_unit * self.occupied.len() as f64),
            };
            if next > target {
                self.pending = Some(next);
                break;
            }
            self.macro_time = next;
            let (x, y) = self.draw_jump();
            self.move_particle(x, y);
            self.event_count += 1;
        }
        self.macro_time = target;
    }

    /// Performs exactly `events` jumps (or stops early if the configuration
    /// is empty). Returns the number performed.
    pub fn run_events(&mut self, events: u64) -> u64 {
        let rate_unit = 2.0 * self.params.speedup();
        let mut done = 0;
        while done < events && self.occupied.len() > 0 {
            let next = match self.pending.take() {
                Some(t) => t,
                None => self.macro_time + self.rng.exponential(rate_unit * self.occupied.len() as f64),
            };
            self.macro_time = next;
            let (x, y) = self.draw_jump();
            self.move_particle(x, y);
            self.event_count += 1;
            done += 1;
        }
        done
    }

    /// Runs to `t_end`, snapshotting the configuration in force at every
    /// checkpoint.
    pub fn simulate(&mut self, t_end: f64, checkpoints: &[f64]) -> Result<TrajectoryRecord, SimError> {
        validate_checkpoints(self.macro_time, t_end, checkpoints)?;
        let mut record = TrajectoryRecord::new(self.params);
        for &t in checkpoints {
            self.advance_to(t);
            record.push(t, self.config.clone(), self.event_count);
        }
        self.advance_to(t_end);
        record.set_event_count(self.event_count);
        Ok(record)
    }

    /// Like [`SimState::simulate`] but hands each checkpoint configuration to
    /// `observe` instead of storing it; for large `n` where snapshots are
    /// not needed.
    pub fn simulate_observed(
        &mut self,
        t_end: f64,
        checkpoints: &[f64],
        mut observe: impl FnMut(f64, &Configuration),
    ) -> Result<u64, SimError> {
        validate_checkpoints(self.macro_time, t_end, checkpoints)?;
        for &t in checkpoints {
            self.advance_to(t);
            observe(t, &self.config);
        }
        self.advance_to(t_end);
        Ok(self.event_count)
    }

    #[cfg(test)]
    fn occupied_consistent(&self) -> bool {
        let n = self.config.len();
        (0..n).all(|x| self.occupied.contains(x) == (self.config.counts()[x] > 0))
            && self.occupied.len() == self.config.counts().iter().filter(|&&c| c > 0).count()
    }
}

pub(crate) fn validate_checkpoints(start: f64, t_end: f64, checkpoints: &[f64]) -> Result<(), SimError> {
    if !(t_end.is_finite() && t_end >= start) {
        return Err(SimError::InvalidCheckpoint(format!("t_end = {t_end} precedes current time {start}")));
    }
    let mut prev = f64::NEG_INFINITY;
    for &t in checkpoints {
        if !(t >= start && t <= t_end) {
            return Err(SimError::InvalidCheckpoint(format!("{t} outside [{start}, {t_end}]")));
        }
        if !(t > prev) {
            return Err(SimError::InvalidCheckpoint(format!("checkpoints not strictly increasing at {t}")));
        }
        prev = t;
    }
    Ok(())
}
