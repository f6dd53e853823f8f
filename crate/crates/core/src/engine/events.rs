//! Append-only trial event log, stored as one JSON object per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Initial placement; `grid` is the cell the robot starts in.
    Deploy,
    /// Ground-truth visit; `value` is the cell's idleness just before it.
    Visit,
    /// New target; `value` is the policy's score for it.
    TargetSelected,
    /// `robot` and `grid` hold the two robot ids; `value` is their distance.
    LinkUp,
    LinkDown,
    /// The base adopted a fresher entry for `grid` from `robot`; `value` is
    /// the new refresh time.
    BaseReport,
    /// `robot` absorbed reporting need from peer `grid`; `value` is the
    /// peer's broadcast need.
    EpsilonTransfer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: i64,
    pub kind: EventKind,
    pub robot: usize,
    /// Grid id, or peer robot id for link and transfer records.
    pub grid: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
    disabled: bool,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// A log that drops everything pushed to it.
    pub fn disabled() -> Self {
        EventLog {
            events: Vec::new(),
            disabled: true,
        }
    }

    pub fn is_enabled(&self) -> bool {
        !self.disabled
    }

    pub fn push(&mut self, t: i64, kind: EventKind, robot: usize, grid: Option<usize>, value: f64) {
        if self.disabled {
            return;
        }
        debug_assert!(self.events.last().is_none_or(|e| e.t <= t));
        self.events.push(Event {
            t,
            kind,
            robot,
            grid,
            value,
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, serde_json::Error> {
        let mut events = Vec::new();
        for line in input.lines() {
            let line = line.map_err(serde_json::Error::io)?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line)?);
        }
        Ok(EventLog {
            events,
            disabled: false,
        })
    }
}

impl FromIterator<Event> for EventLog {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        EventLog {
            events: iter.into_iter().collect(),
            disabled: false,
        }
    }
}
