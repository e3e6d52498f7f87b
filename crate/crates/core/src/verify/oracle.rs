//! Sorted-multiset reference implementation of the public API.

use crate::error::HeapError;
use crate::node::{HeapId, NodeId};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Debug, Default)]
struct OHeap<K> {
    set: BTreeSet<(K, u64)>,
    retired: bool,
}

/// Mirrors [`HeapPool`](crate::HeapPool) semantics on ordered sets. Node
/// handles are insert indices, which coincide with uids.
#[derive(Clone, Debug, Default)]
pub struct OracleHeap<K> {
    heaps: Vec<OHeap<K>>,
    /// uid -> (current key, heap it was inserted into)
    nodes: HashMap<u64, (K, HeapId)>,
    next_uid: u64,
    meld_ok: bool,
}

impl<K: Ord + Copy> OracleHeap<K> {
    pub fn new(meld_ok: bool) -> Self {
        OracleHeap {
            heaps: Vec::new(),
            nodes: HashMap::new(),
            next_uid: 0,
            meld_ok,
        }
    }

    fn live(&self, h: HeapId) -> Result<&OHeap<K>, HeapError> {
        let x = self.heaps.get(h.index()).ok_or(HeapError::UnknownHeap(h))?;
        if x.retired {
            return Err(HeapError::Retired(h));
        }
        Ok(x)
    }

    pub fn make_heap(&mut self) -> HeapId {
        self.heaps.push(OHeap {
            set: BTreeSet::new(),
            retired: false,
        });
        HeapId(self.heaps.len() as u32 - 1)
    }

    pub fn insert(&mut self, h: HeapId, key: K) -> Result<NodeId, HeapError> {
        self.live(h)?;
        let uid = self.next_uid;
        self.next_uid += 1;
        self.heaps[h.index()].set.insert((key, uid));
        self.nodes.insert(uid, (key, h));
        Ok(NodeId(uid as u32))
    }

    pub fn find_min(&self, h: HeapId) -> Result<Option<(K, u64)>, HeapError> {
        Ok(self.live(h)?.set.first().copied())
    }

    pub fn delete_min(&mut self, h: HeapId) -> Result<(K, u64), HeapError> {
        self.live(h)?;
        let m = self.heaps[h.index()].set.pop_first().ok_or(HeapError::Empty)?;
        self.nodes.remove(&m.1);
        Ok(m)
    }

    pub fn decrease_key(&mut self, h: HeapId, x: NodeId, key: K) -> Result<(), HeapError> {
        self.live(h)?;
        let uid = x.0 as u64;
        let &(cur, _) = self.nodes.get(&uid).ok_or(HeapError::StaleHandle(x))?;
        if key > cur {
            return Err(HeapError::KeyIncrease(x));
        }
        let set = &mut self.heaps[h.index()].set;
        assert!(set.remove(&(cur, uid)), "handle not in the named heap");
        set.insert((key, uid));
        self.nodes.get_mut(&uid).unwrap().0 = key;
        Ok(())
    }

    /// Union of both multisets into the larger one (ties keep `b`).
    pub fn meld(&mut self, a: HeapId, b: HeapId) -> Result<HeapId, HeapError> {
        if !self.meld_ok {
            return Err(HeapError::MeldUnsupported);
        }
        self.live(a)?;
        self.live(b)?;
        if a == b {
            return Err(HeapError::SelfMeld(a));
        }
        let (s, l) = if self.heaps[a.index()].set.len() <= self.heaps[b.index()].set.len() {
            (a, b)
        } else {
            (b, a)
        };
        let moved = std::mem::take(&mut self.heaps[s.index()].set);
        self.heaps[s.index()].retired = true;
        self.heaps[l.index()].set.extend(moved);
        Ok(l)
    }

    pub fn len(&self, h: HeapId) -> Result<usize, HeapError> {
        Ok(self.live(h)?.set.len())
    }

    pub fn is_empty(&self, h: HeapId) -> Result<bool, HeapError> {
        Ok(self.len(h)? == 0)
    }

    pub fn key(&self, x: NodeId) -> Option<K> {
        self.nodes.get(&(x.0 as u64)).map(|e| e.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic() {
        let mut o = OracleHeap::new(true);
        let h = o.make_heap();
        o.insert(h, 5).unwrap();
        o.insert(h, 2).unwrap();
        let x = o.insert(h, 8).unwrap();
        assert_eq!(o.delete_min(h).unwrap().0, 2);
        o.decrease_key(h, x, 1).unwrap();
        assert_eq!(o.delete_min(h).unwrap(), (1, 2));
        let g = o.make_heap();
        o.insert(g, 0).unwrap();
        let s = o.meld(h, g).unwrap();
        assert_eq!(s, g);
        assert_eq!(o.len(s).unwrap(), 2);
        assert_eq!(o.len(h), Err(HeapError::Retired(h)));
    }
}
