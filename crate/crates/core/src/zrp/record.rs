use crate::lattice::{Configuration, ScalingParams};
use serde::Serialize;
use std::fmt::Write as _;

/// Configurations captured at checkpoint times along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    params: ScalingParams,
    times: Vec<f64>,
    snapshots: Vec<Configuration>,
    events_at: Vec<u64>,
    event_count: u64,
}

#[derive(Serialize)]
struct CheckpointSummary {
    time: f64,
    total: u64,
    occupied: usize,
    events: u64,
}

#[derive(Serialize)]
struct Summary<'a> {
    n: usize,
    alpha: f64,
    event_count: u64,
    checkpoints: &'a [CheckpointSummary],
}

impl TrajectoryRecord {
    pub(crate) fn new(params: ScalingParams) -> Self {
        Self { params, times: Vec::new(), snapshots: Vec::new(), events_at: Vec::new(), event_count: 0 }
    }

    pub(crate) fn push(&mut self, time: f64, config: Configuration, events: u64) {
        debug_assert!(self.times.last().is_none_or(|&t| t < time));
        self.times.push(time);
        self.snapshots.push(config);
        self.events_at.push(events);
        self.event_count = events;
    }

    pub(crate) fn set_event_count(&mut self, events: u64) {
        self.event_count = events;
    }

    pub fn params(&self) -> &ScalingParams {
        &self.params
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Configuration] {
        &self.snapshots
    }

    /// Cumulative number of jumps performed when each checkpoint was taken.
    pub fn events_at(&self) -> &[u64] {
        &self.events_at
    }

    /// Jumps performed over the whole run.
    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    /// Long format, one row per `(checkpoint, site)`: `time,site,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,site,count\n");
        for (t, c) in self.times.iter().zip(&self.snapshots) {
            for (x, k) in c.counts().iter().enumerate() {
                let _ = writeln!(out, "{t:e},{x},{k}");
            }
        }
        out
    }

    /// Observables only: per-checkpoint totals, occupied-site counts and
    /// cumulative events.
    pub fn summary_json(&self) -> String {
        let checkpoints: Vec<_> = self
            .times
            .iter()
            .zip(&self.snapshots)
            .zip(&self.events_at)
            .map(|((&time, c), &events)| CheckpointSummary {
                time,
                total: c.total(),
                occupied: c.counts().iter().filter(|&&k| k > 0).count(),
                events,
            })
            .collect();
        let summary = Summary {
            n: self.params.n(),
            alpha: self.params.alpha(),
            event_count: self.event_count,
            checkpoints: &checkpoints,
        };
        serde_json::to_string_pretty(&summary).expect("summary serialises")
    }
}
