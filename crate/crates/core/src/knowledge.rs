//! Per-robot assumed idleness and the freshest-wins merge.

use crate::world::{GridId, RobotId};

/// One robot's belief about one grid: how long it has been idle, and when
/// that belief was last grounded by a visit or a claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssumedEntry {
    pub idleness: i64,
    pub refresh: i64,
}

impl AssumedEntry {
    pub fn new(idleness: i64, refresh: i64) -> Self {
        AssumedEntry { idleness, refresh }
    }

    /// Whether `other` should replace `self` under the merge rule.
    fn superseded_by(&self, other: &AssumedEntry) -> bool {
        other.refresh > self.refresh
            || (other.refresh == self.refresh && other.idleness < self.idleness)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("stale write to {grid}: t={t} is older than refresh time {refresh}")]
pub struct StaleWrite {
    pub grid: GridId,
    pub t: i64,
    pub refresh: i64,
}

/// A replaced entry and the robot whose table supplied the replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adoption {
    pub grid: GridId,
    pub source: RobotId,
    pub previous: AssumedEntry,
    pub entry: AssumedEntry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    owner: RobotId,
    entries: Vec<AssumedEntry>,
}

impl KnowledgeBase {
    /// `grids` entries, all `[0, t0]`.
    pub fn new(owner: RobotId, grids: usize, t0: i64) -> Self {
        KnowledgeBase {
            owner,
            entries: vec![AssumedEntry::new(0, t0); grids],
        }
    }

    pub fn from_entries(owner: RobotId, entries: Vec<AssumedEntry>) -> Self {
        KnowledgeBase { owner, entries }
    }

    pub fn owner(&self) -> RobotId {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[AssumedEntry] {
        &self.entries
    }

    pub fn entry(&self, k: GridId) -> AssumedEntry {
        self.entries[k.0]
    }

    pub fn idleness(&self, k: GridId) -> i64 {
        self.entries[k.0].idleness
    }

    pub fn refresh(&self, k: GridId) -> i64 {
        self.entries[k.0].refresh
    }

    /// One timestep elapses: every assumed idleness grows by one, refresh
    /// times stay put.
    ///
    /// Call this after merging the previous step's snapshots. Ageing first
    /// would let a peer's one-step-older copy of the same entry win the
    /// equal-refresh tie and stall the count.
    pub fn advance_time(&mut self) {
        for e in &mut self.entries {
            e.idleness += 1;
        }
    }

    /// Keeps, per grid, the freshest entry among our own and every snapshot.
    /// Equal refresh times prefer the smaller idleness, then our own entry.
    /// Returns the entries that were replaced.
    pub fn merge<'a, I>(&mut self, incoming: I) -> Vec<Adoption>
    where
        I: IntoIterator<Item = &'a KnowledgeBase>,
    {
        let others: Vec<&KnowledgeBase> = incoming.into_iter().collect();
        let mut changes = Vec::new();
        if others.is_empty() {
            return changes;
        }
        for other in &others {
            debug_assert_eq!(other.entries.len(), self.entries.len());
        }
        for (k, own) in self.entries.iter_mut().enumerate() {
            let mut best = *own;
            let mut source = None;
            for other in &others {
                let theirs = &other.entries[k];
                if best.superseded_by(theirs) {
                    best = *theirs;
                    source = Some(other.owner);
                }
            }
            if let Some(source) = source {
                changes.push(Adoption {
                    grid: GridId(k),
                    source,
                    previous: *own,
                    entry: best,
                });
                *own = best;
            }
        }
        changes
    }

    /// Sets entry `k` to `[0, t]`.
    pub fn mark_visited(&mut self, k: GridId, t: i64) -> Result<(), StaleWrite> {
        let e = &mut self.entries[k.0];
        if t < e.refresh {
            return Err(StaleWrite {
                grid: k,
                t,
                refresh: e.refresh,
            });
        }
        *e = AssumedEntry::new(0, t);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kb_with(owner: usize, entry: AssumedEntry) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(RobotId(owner), 1, 0);
        kb.entries[0] = entry;
        kb
    }

    #[test]
    fn advance_increments_idleness_only() {
        let mut kb = kb_with(1, AssumedEntry::new(5, 10));
        kb.advance_time();
        assert_eq!(kb.entry(GridId(0)), AssumedEntry::new(6, 10));

        let mut kb = KnowledgeBase::new(RobotId(1), 400, 0);
        kb.mark_visited(GridId(7), 3).unwrap();
        kb.advance_time();
        assert_eq!(kb.len(), 400);
        assert_eq!(kb.entry(GridId(7)), AssumedEntry::new(1, 3));
    }

    #[test]
    fn merge_examples() {
        let mut own = kb_with(1, AssumedEntry::new(5, 10));
        let changes = own.merge([&kb_with(2, AssumedEntry::new(2, 20))]);
        assert_eq!(own.entry(GridId(0)), AssumedEntry::new(2, 20));
        assert_eq!(changes.len(), 1);
        assert_eq!(changes[0].source, RobotId(2));

        let mut own = kb_with(1, AssumedEntry::new(2, 20));
        assert!(own
            .merge([&kb_with(2, AssumedEntry::new(5, 10))])
            .is_empty());
        assert_eq!(own.entry(GridId(0)), AssumedEntry::new(2, 20));

        let mut own = kb_with(1, AssumedEntry::new(4, 15));
        assert!(own
            .merge([&kb_with(2, AssumedEntry::new(4, 15))])
            .is_empty());
        assert_eq!(own.entry(GridId(0)), AssumedEntry::new(4, 15));
    }

    #[test]
    fn merge_tie_prefers_smaller_idleness() {
        let mut own = kb_with(1, AssumedEntry::new(7, 15));
        own.merge([
            &kb_with(2, AssumedEntry::new(6, 15)),
            &kb_with(3, AssumedEntry::new(3, 15)),
            &kb_with(4, AssumedEntry::new(9, 14)),
        ]);
        assert_eq!(own.entry(GridId(0)), AssumedEntry::new(3, 15));
    }

    #[test]
    fn mark_visited_examples() {
        let mut kb = kb_with(1, AssumedEntry::new(37, 100));
        kb.mark_visited(GridId(0), 137).unwrap();
        assert_eq!(kb.entry(GridId(0)), AssumedEntry::new(0, 137));
        // a claim at the current time is the same write
        kb.mark_visited(GridId(0), 137).unwrap();

        let mut kb = kb_with(1, AssumedEntry::new(0, 100));
        let err = kb.mark_visited(GridId(0), 90).unwrap_err();
        assert_eq!(err.refresh, 100);
        assert_eq!(kb.entry(GridId(0)), AssumedEntry::new(0, 100));
    }

    fn arb_kb(owner: usize) -> impl Strategy<Value = KnowledgeBase> {
        prop::collection::vec((0i64..50, 0i64..50), 6).prop_map(move |v| KnowledgeBase {
            owner: RobotId(owner),
            entries: v
                .into_iter()
                .map(|(i, r)| AssumedEntry::new(i, r))
                .collect(),
        })
    }

    proptest! {
        #[test]
        fn merge_is_order_independent_and_monotone(
            own in arb_kb(0),
            a in arb_kb(1),
            b in arb_kb(2),
            c in arb_kb(3),
        ) {
            let mut x = own.clone();
            x.merge([&a, &b, &c]);
            let mut y = own.clone();
            y.merge([&c, &a, &b]);
            prop_assert_eq!(&x.entries, &y.entries);
            for (k, e) in x.entries.iter().enumerate() {
                prop_assert!(e.refresh >= own.entries[k].refresh);
                let freshest = [&own, &a, &b, &c].iter().map(|kb| kb.entries[k].refresh).max().unwrap();
                prop_assert_eq!(e.refresh, freshest);
            }
            // idempotent
            let mut z = x.clone();
            prop_assert!(z.merge([&a, &b, &c]).is_empty());
        }
    }
}
