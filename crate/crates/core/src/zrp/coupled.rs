//! Basic coupling of two ordered copies of the process.
//!
//! Clocks ring at occupied sites of the upper copy. When site `x` rings with
//! direction `y`, the upper copy moves a particle `x → y` and the lower copy
//! does the same if it has a particle at `x`. Since `g(k) = 1{k ≥ 1}`, the
//! lower copy never needs to jump where the upper one cannot, so each copy is
//! marginally a zero-range process and `lower ≼ upper` is preserved.

use super::{validate_checkpoints, SimError, SimState, TrajectoryRecord};
use crate::lattice::LatticeError;

#[derive(Debug, Clone)]
pub struct CoupledState {
    lower: SimState,
    upper: SimState,
}

impl CoupledState {
    /// Both copies must share `params`; the upper copy's generator drives
    /// the shared clocks and the lower copy's generator is never used.
    pub fn new(lower: SimState, upper: SimState) -> Result<Self, SimError> {
        if lower.params != upper.params {
            return Err(SimError::Domain("coupled copies need identical scaling parameters".into()));
        }
        if !lower.config.partial_order_leq(&upper.config)? {
            return Err(SimError::Domain("coupled copies must start ordered (lower ≼ upper)".into()));
        }
        if lower.macro_time != upper.macro_time {
            return Err(SimError::Domain("coupled copies must start at the same time".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &SimState {
        &self.lower
    }

    pub fn upper(&self) -> &SimState {
        &self.upper
    }

    pub fn macro_time(&self) -> f64 {
        self.upper.macro_time
    }

    /// Applies one shared ring and checks the order at the two touched sites.
    #[inline]
    fn ring(&mut self, time: f64) -> Result<(), SimError> {
        self.upper.macro_time = time;
        self.lower.macro_time = time;
        let (x, y) = self.upper.draw_jump();
        let lower_moves = self.lower.config.counts()[x] > 0;
        debug_assert!(!lower_moves || self.upper.occupied.contains(x));
        self.upper.move_particle(x, y);
        self.upper.event_count += 1;
        if lower_moves {
            self.lower.move_particle(x, y);
            self.lower.event_count += 1;
        }
        let (lc, uc) = (self.lower.config.counts(), self.upper.config.counts());
        for site in [x, y] {
            if lc[site] > uc[site] {
                return Err(SimError::OrderViolation { event: self.upper.event_count, site });
            }
        }
        Ok(())
    }

    fn advance_to(&mut self, target: f64) -> Result<(), SimError> {
        let rate_unit = 2.0 * self.upper.params.speedup();
        loop {
            if self.upper.occupied.len() == 0 {
                self.upper.pending = None;
                break;
            }
            let next = match self.upper.pending.take() {
                Some(t) => t,
                None => {
                    self.upper.macro_time + self.upper.rng.exponential(rate_unit * self.upper.occupied.len() as f64)
                }
            };
            if next > target {
                self.upper.pending = Some(next);
                break;
            }
            self.ring(next)?;
        }
        self.upper.macro_time = target;
        self.lower.macro_time = target;
        Ok(())
    }

    /// Performs `events` shared rings (fewer if the upper copy is empty);
    /// returns how many were performed.
    pub fn run_events(&mut self, events: u64) -> Result<u64, SimError> {
        let rate_unit = 2.0 * self.upper.params.speedup();
        let mut done = 0;
        while done < events && self.upper.occupied.len() > 0 {
            let next = match self.upper.pending.take() {
                Some(t) => t,
                None => {
                    self.upper.macro_time + self.upper.rng.exponential(rate_unit * self.upper.occupied.len() as f64)
                }
            };
            self.ring(next)?;
            done += 1;
        }
        Ok(done)
    }

    /// Runs both copies to `t_end`, returning `(lower, upper)` records.
    pub fn simulate_coupled(
        &mut self,
        t_end: f64,
        checkpoints: &[f64],
    ) -> Result<(TrajectoryRecord, TrajectoryRecord), SimError> {
        validate_checkpoints(self.macro_time(), t_end, checkpoints)?;
        let mut lower = TrajectoryRecord::new(self.lower.params);
        let mut upper = TrajectoryRecord::new(self.upper.params);
        for &t in checkpoints {
            self.advance_to(t)?;
            lower.push(t, self.lower.config.clone(), self.lower.event_count);
            upper.push(t, self.upper.config.clone(), self.upper.event_count);
        }
        self.advance_to(t_end)?;
        lower.set_event_count(self.lower.event_count);
        upper.set_event_count(self.upper.event_count);
        Ok((lower, upper))
    }

    /// Full coordinatewise check of `lower ≼ upper`.
    pub fn is_ordered(&self) -> Result<bool, LatticeError> {
        self.lower.config.partial_order_leq(&self.upper.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Configuration, ScalingParams};
    use crate::rng::RngStream;

    fn state(counts: Vec<u64>, p: ScalingParams, seed: u64) -> SimState {
        SimState::new(Configuration::new(counts), p, RngStream::new(seed)).unwrap()
    }

    #[test]
    fn identical_copies_stay_identical() {
        let p = ScalingParams::new(12, 0.5).unwrap();
        let init = vec![3, 0, 1, 0, 0, 2, 5, 0, 1, 0, 0, 1];
        let mut c = CoupledState::new(state(init.clone(), p, 1), state(init, p, 2)).unwrap();
        let (lo, up) = c.simulate_coupled(0.01, &[0.005, 0.01]).unwrap();
        assert_eq!(lo.snapshots(), up.snapshots());
        assert_eq!(lo.event_count(), up.event_count());
        assert!(up.event_count() > 0);
    }

    #[test]
    fn empty_lower_copy_never_moves() {
        let p = ScalingParams::new(10, 0.5).unwrap();
        let mut c = CoupledState::new(state(vec![0; 10], p, 1), state(vec![2; 10], p, 3)).unwrap();
        assert_eq!(c.run_events(10_000).unwrap(), 10_000);
        assert_eq!(c.lower().config().total(), 0);
        assert_eq!(c.lower().event_count(), 0);
        assert_eq!(c.upper().config().total(), 20);
        assert!(c.is_ordered().unwrap());
    }

    #[test]
    fn unordered_start_rejected() {
        let p = ScalingParams::new(3, 0.5).unwrap();
        assert!(CoupledState::new(state(vec![1, 0, 0], p, 1), state(vec![0, 1, 0], p, 1)).is_err());
    }

    #[test]
    fn upper_marginal_matches_uncoupled_run() {
        // the upper copy consumes exactly the random numbers a lone copy would
        let p = ScalingParams::new(9, 0.4).unwrap();
        let init = vec![1, 2, 0, 0, 3, 0, 1, 1, 0];
        let mut alone = state(init.clone(), p, 8);
        let mut c = CoupledState::new(state(vec![0, 1, 0, 0, 2, 0, 0, 1, 0], p, 99), state(init, p, 8)).unwrap();
        let a = alone.simulate(0.01, &[0.01]).unwrap();
        let (_, up) = c.simulate_coupled(0.01, &[0.01]).unwrap();
        assert_eq!(a.snapshots(), up.snapshots());
    }
}
