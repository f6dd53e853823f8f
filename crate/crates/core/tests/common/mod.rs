//! Brute-force replay of an event log, written without the engine's
//! metric code so the two can be checked against each other.

#![allow(dead_code)]

use patrolsim::engine::{EventKind, EventLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Replay {
    pub samples: i64,
    pub idleness_sum: i64,
    pub worst_idleness: i64,
    pub delay_sum: i64,
    pub worst_delay: i64,
}

impl Replay {
    pub fn graph_idleness(&self) -> f64 {
        self.idleness_sum as f64 / self.samples as f64
    }

    pub fn mean_sa_delay(&self) -> f64 {
        self.delay_sum as f64 / self.samples as f64
    }
}

/// Ground truth comes from visit records and the base's table from base
/// reports; every grid starts fresh at `t0`.
pub fn replay(log: &EventLog, grids: usize, t0: i64, end: i64) -> Replay {
    let mut last_visit = vec![t0; grids];
    let mut base_refresh = vec![t0; grids];
    let events = log.events();
    let mut next = 0;
    let mut r = Replay {
        samples: 0,
        idleness_sum: 0,
        worst_idleness: 0,
        delay_sum: 0,
        worst_delay: 0,
    };
    for t in t0..=end {
        while next < events.len() && events[next].t <= t {
            let e = &events[next];
            assert_eq!(e.t, t, "log out of order at record {next}");
            match e.kind {
                EventKind::Visit => last_visit[e.grid.unwrap()] = t,
                EventKind::BaseReport => base_refresh[e.grid.unwrap()] = e.value as i64,
                _ => {}
            }
            next += 1;
        }
        for k in 0..grids {
            let i = t - last_visit[k];
            let d = t - base_refresh[k];
            r.idleness_sum += i;
            r.worst_idleness = r.worst_idleness.max(i);
            r.delay_sum += d;
            r.worst_delay = r.worst_delay.max(d);
        }
        r.samples += grids as i64;
    }
    assert_eq!(next, events.len(), "records after the end time");
    r
}
