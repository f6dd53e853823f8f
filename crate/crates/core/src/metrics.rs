//! Patrol and situation-awareness metrics.
//!
//! Graph idleness is the mean ground-truth idleness over all grids and all
//! steps `t0..=T`; worst idleness is its maximum. The SA delay of grid `k` at
//! time `t` is how stale the base station's table is for that grid,
//! `t - refresh_base(k)`; mean and worst SA delay aggregate it the same way.
//! All sums are exact integers until [`MetricsAccumulator::finalize`].

use serde::{Deserialize, Serialize};

use crate::knowledge::KnowledgeBase;
use crate::world::GridMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("metrics already accumulated for t={0}")]
    DoubleAccumulation(i64),
    #[error("expected metrics for t={expected}, got t={got}")]
    OutOfOrder { expected: i64, got: i64 },
    #[error("no steps were accumulated")]
    NoSteps,
    #[error("accumulation stops at t={covered}, trial ends at t={end}")]
    Incomplete { covered: i64, end: i64 },
}

/// Final per-trial metric values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub graph_idleness: f64,
    pub worst_idleness: i64,
    pub mean_sa_delay: f64,
    pub worst_sa_delay: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricsAccumulator {
    t0: i64,
    idleness_sum: i64,
    sa_delay_sum: i64,
    worst_idleness: i64,
    worst_sa_delay: i64,
    steps: i64,
    grids: usize,
}

impl MetricsAccumulator {
    pub fn new(t0: i64, grids: usize) -> Self {
        MetricsAccumulator {
            t0,
            idleness_sum: 0,
            sa_delay_sum: 0,
            worst_idleness: 0,
            worst_sa_delay: 0,
            steps: 0,
            grids,
        }
    }

    fn next_t(&self) -> i64 {
        self.t0 + self.steps
    }

    pub fn steps(&self) -> i64 {
        self.steps
    }

    pub fn worst_idleness(&self) -> i64 {
        self.worst_idleness
    }

    pub fn worst_sa_delay(&self) -> i64 {
        self.worst_sa_delay
    }

    /// Adds step `t` from the ground truth in `map` and the base station's
    /// table `base`. Steps must arrive in order, once each.
    pub fn accumulate(
        &mut self,
        map: &GridMap,
        base: &KnowledgeBase,
        t: i64,
    ) -> Result<(), MetricsError> {
        self.check_step(t)?;
        let idleness = map.cells().iter().map(|c| c.idleness(t));
        let delays = base.entries().iter().map(|e| t - e.refresh);
        self.record(idleness, delays);
        Ok(())
    }

    /// Same as [`accumulate`](Self::accumulate) for raw per-grid values.
    pub fn accumulate_values<I, D>(
        &mut self,
        t: i64,
        idleness: I,
        delays: D,
    ) -> Result<(), MetricsError>
    where
        I: IntoIterator<Item = i64>,
        D: IntoIterator<Item = i64>,
    {
        self.check_step(t)?;
        self.record(idleness, delays);
        Ok(())
    }

    fn check_step(&self, t: i64) -> Result<(), MetricsError> {
        let expected = self.next_t();
        if t < expected {
            return Err(MetricsError::DoubleAccumulation(t));
        }
        if t > expected {
            return Err(MetricsError::OutOfOrder { expected, got: t });
        }
        Ok(())
    }

    fn record<I, D>(&mut self, idleness: I, delays: D)
    where
        I: IntoIterator<Item = i64>,
        D: IntoIterator<Item = i64>,
    {
        for i in idleness {
            self.idleness_sum += i;
            self.worst_idleness = self.worst_idleness.max(i);
        }
        for d in delays {
            self.sa_delay_sum += d;
            self.worst_sa_delay = self.worst_sa_delay.max(d);
        }
        self.steps += 1;
    }

    /// Metrics over `t0..=end`.
    pub fn finalize(&self, end: i64) -> Result<Metrics, MetricsError> {
        if self.steps == 0 {
            return Err(MetricsError::NoSteps);
        }
        let covered = self.next_t() - 1;
        if covered != end {
            return Err(MetricsError::Incomplete { covered, end });
        }
        let samples = (self.steps * self.grids as i64) as f64;
        Ok(Metrics {
            graph_idleness: self.idleness_sum as f64 / samples,
            worst_idleness: self.worst_idleness,
            mean_sa_delay: self.sa_delay_sum as f64 / samples,
            worst_sa_delay: self.worst_sa_delay,
        })
    }
}
