//! Dual-range connectivity and one-hop snapshot exchange.
//!
//! A pair of robots links when they come within `d_s` of each other and
//! stays linked until their distance exceeds `d_c`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::knowledge::KnowledgeBase;
use crate::world::{Point, RobotId};

/// Unordered robot pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link(RobotId, RobotId);

impl Link {
    /// Returns `None` for a self-link.
    pub fn new(a: RobotId, b: RobotId) -> Option<Link> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Link(a, b)),
            std::cmp::Ordering::Greater => Some(Link(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn ends(&self) -> (RobotId, RobotId) {
        (self.0, self.1)
    }

    pub fn other(&self, n: RobotId) -> Option<RobotId> {
        if self.0 == n {
            Some(self.1)
        } else if self.1 == n {
            Some(self.0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityState {
    links: BTreeSet<Link>,
    sensing_range: f64,
    comm_range: f64,
}

impl ConnectivityState {
    pub fn new(sensing_range: f64, comm_range: f64) -> Self {
        ConnectivityState {
            links: BTreeSet::new(),
            sensing_range,
            comm_range,
        }
    }

    /// Test and scripting helper: a state with the given links already up.
    pub fn with_links<I>(sensing_range: f64, comm_range: f64, links: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let links = links
            .into_iter()
            .filter_map(|(a, b)| Link::new(RobotId(a), RobotId(b)))
            .collect();
        ConnectivityState {
            links,
            sensing_range,
            comm_range,
        }
    }

    pub fn links(&self) -> &BTreeSet<Link> {
        &self.links
    }

    pub fn is_linked(&self, a: RobotId, b: RobotId) -> bool {
        Link::new(a, b).is_some_and(|l| self.links.contains(&l))
    }

    /// Recomputes links for `positions` (indexed by robot id).
    pub fn update_links(&self, positions: &[Point]) -> ConnectivityState {
        let mut links = BTreeSet::new();
        for (a, pa) in positions.iter().enumerate() {
            for (b, pb) in positions.iter().enumerate().skip(a + 1) {
                let link = Link(RobotId(a), RobotId(b));
                let d = pa.distance(pb);
                if d <= self.sensing_range || (d <= self.comm_range && self.links.contains(&link)) {
                    links.insert(link);
                }
            }
        }
        ConnectivityState {
            links,
            sensing_range: self.sensing_range,
            comm_range: self.comm_range,
        }
    }

    pub fn neighbors(&self, n: RobotId) -> BTreeSet<RobotId> {
        self.links.iter().filter_map(|l| l.other(n)).collect()
    }

    /// Links present in `self` but not in `prior`, and vice versa.
    pub fn diff(&self, prior: &ConnectivityState) -> (Vec<Link>, Vec<Link>) {
        let up = self.links.difference(&prior.links).copied().collect();
        let down = prior.links.difference(&self.links).copied().collect();
        (up, down)
    }

    /// Delivers every robot's envelope to each of its direct neighbours.
    /// `envelopes` must be indexed by sender id; a missing entry means the
    /// sender has nothing to say this step. Inboxes are sorted by sender.
    pub fn exchange(&self, envelopes: &[Option<Envelope>]) -> Vec<Vec<Envelope>> {
        let mut inboxes: Vec<Vec<Envelope>> = vec![Vec::new(); envelopes.len()];
        for link in &self.links {
            let (a, b) = link.ends();
            if let Some(env) = envelopes.get(a.0).and_then(Option::as_ref) {
                inboxes[b.0].push(env.clone());
            }
            if let Some(env) = envelopes.get(b.0).and_then(Option::as_ref) {
                inboxes[a.0].push(env.clone());
            }
        }
        for inbox in &mut inboxes {
            inbox.sort_by_key(|e| e.sender);
        }
        inboxes
    }
}

/// What a robot broadcasts to its neighbours in one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub sender: RobotId,
    pub knowledge: Arc<KnowledgeBase>,
    pub epsilon: f64,
    pub base_contact: i64,
}
