//! Same-rank registries and violation caches.

use crate::node::NodeId;

const INITIAL_SLOTS: usize = 8;

/// Rank-indexed array of optional node handles.
///
/// Growth uses the deamortized doubling scheme: once a rank in the upper
/// half is written, a twice-as-large array is allocated and every later
/// write migrates two slots, so no single write copies more than two
/// entries. A rank far beyond the current capacity falls back to finishing
/// the migration at once.
#[derive(Clone, Debug)]
pub struct RankRegistry {
    slots: Vec<Option<NodeId>>,
    growth: Option<Growth>,
    occupied: usize,
}

#[derive(Clone, Debug)]
struct Growth {
    next: Vec<Option<NodeId>>,
    copied: usize,
}

impl Default for RankRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl RankRegistry {
    pub fn new() -> Self {
        RankRegistry {
            slots: vec![None; INITIAL_SLOTS],
            growth: None,
            occupied: 0,
        }
    }

    /// Number of occupied slots.
    pub fn len(&self) -> usize {
        self.occupied
    }

    pub fn is_empty(&self) -> bool {
        self.occupied == 0
    }

    /// Logical capacity (ranks addressable without further growth).
    pub fn capacity(&self) -> usize {
        match &self.growth {
            Some(g) => g.next.len(),
            None => self.slots.len(),
        }
    }

    pub fn get(&self, rank: u32) -> Option<NodeId> {
        let r = rank as usize;
        match &self.growth {
            Some(g) if r < g.copied || r >= self.slots.len() => g.next.get(r).copied().flatten(),
            _ => self.slots.get(r).copied().flatten(),
        }
    }

    /// Stores `value` at `rank`, returning the previous occupant.
    pub fn set(&mut self, rank: u32, value: Option<NodeId>) -> Option<NodeId> {
        let r = rank as usize;
        self.advance(r);
        let cell = match &mut self.growth {
            Some(g) if r < g.copied || r >= self.slots.len() => &mut g.next[r],
            _ => &mut self.slots[r],
        };
        let old = std::mem::replace(cell, value);
        match (old.is_some(), value.is_some()) {
            (false, true) => self.occupied += 1,
            (true, false) => self.occupied -= 1,
            _ => {}
        }
        old
    }

    pub fn take(&mut self, rank: u32) -> Option<NodeId> {
        self.set(rank, None)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, NodeId)> + '_ {
        (0..self.capacity() as u32).filter_map(move |r| self.get(r).map(|x| (r, x)))
    }

    pub fn clear(&mut self) {
        *self = Self::new();
    }

    fn advance(&mut self, r: usize) {
        if let Some(g) = &mut self.growth {
            let end = (g.copied + 2).min(self.slots.len());
            g.next[g.copied..end].copy_from_slice(&self.slots[g.copied..end]);
            g.copied = end;
            if g.copied == self.slots.len() {
                let g = self.growth.take().unwrap();
                self.slots = g.next;
            }
        } else if 2 * r >= self.slots.len() {
            self.growth = Some(Growth {
                next: vec![None; 2 * self.slots.len()],
                copied: 0,
            });
        }
        while r >= self.capacity() {
            self.finish_growth();
            let len = self.slots.len();
            self.growth = Some(Growth {
                next: vec![None; 2 * len],
                copied: 0,
            });
        }
    }

    fn finish_growth(&mut self) {
        if let Some(mut g) = self.growth.take() {
            let n = self.slots.len();
            g.next[g.copied..n].copy_from_slice(&self.slots[g.copied..]);
            self.slots = g.next;
        }
    }
}

/// LIFO buffer of possibly stale violation entries.
#[derive(Clone, Debug, Default)]
pub struct ViolationCache {
    entries: Vec<NodeId>,
}

impl ViolationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: NodeId) {
        self.entries.push(x);
    }

    pub fn pop(&mut self) -> Option<NodeId> {
        self.entries.pop()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().copied()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}
