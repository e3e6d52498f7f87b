//! Meld support: implicit deferral, degree reduction, heap-size decrement.
//!
//! Melding never touches the nodes of the smaller heap. Its record is
//! retired instead, which makes all of its nodes implicitly deferred
//! members of the surviving heap. They are converted one at a time when a
//! method first needs them as explicit nodes.

use super::lists::Siblings;
use super::{HeapPool, Variant};
use crate::accounting::Method;
use crate::accounting::BlockKind;
use crate::error::HeapError;
use crate::node::{HeapId, Kind, NodeId, Tag};

impl<K: Ord + Copy> HeapPool<K> {
    /// Melds `a` and `b`; the larger one survives (ties keep `b`) and is
    /// returned. The other record is retired.
    pub fn meld(&mut self, a: HeapId, b: HeapId) -> Result<HeapId, HeapError> {
        if self.variant != Variant::Meld {
            return Err(HeapError::MeldUnsupported);
        }
        self.live_record(a)?;
        self.live_record(b)?;
        if a == b {
            return Err(HeapError::SelfMeld(a));
        }
        let (small, big) = if self.rec(a).size <= self.rec(b).size {
            (a, b)
        } else {
            (b, a)
        };
        self.begin_op(big, Method::Meld);
        self.nl_prepend(big, small);
        let roots = self.rec_mut(small).roots.take();
        self.sib_prepend_list(Siblings::Roots(big), roots);
        let moved = self.rec(small).size;
        self.rec_mut(big).size += moved;
        {
            let r = self.rec_mut(small);
            r.size = -1;
            r.phi = [0; 3];
            for reg in &mut r.registries {
                reg.clear();
            }
            for c in &mut r.caches {
                c.clear();
            }
        }
        if self.rec(small).refcount == 0 {
            self.discard_record(small);
        }
        let plan = self.plan(big, false);
        self.find_min_inner(big, plan);
        self.end_op();
        Ok(big)
    }

    fn discard_record(&mut self, h: HeapId) {
        let r = self.rec_mut(h);
        r.discarded = true;
        r.registries = Default::default();
        r.caches = Default::default();
    }

    /// Makes the implicit node `x` an explicit deferred node owned by `h`.
    pub(crate) fn convert_implicit(&mut self, h: HeapId, x: NodeId) {
        let old = self.n(x).owner;
        debug_assert!(self.rec(old).size < 0);
        let r = self.rec_mut(old);
        r.refcount -= 1;
        if r.refcount == 0 {
            self.discard_record(old);
        }
        self.rec_mut(h).refcount += 1;
        let n = self.nm(x);
        n.owner = h;
        n.kind = Kind::Deferred;
        n.rank = 0;
        n.loss = 0;
        n.tag = Tag::N;
        n.lc_entries = 0;
        self.counters.conversions += 1;
    }

    /// Makes `x` explicit; if its three rightmost children are deferred,
    /// turns them into one solid rank-one tree hanging below `x` as a new
    /// rank root. Returns whether that restructuring happened.
    pub(crate) fn degree_reduction_step(&mut self, h: HeapId, x: NodeId) -> bool {
        let mark = self.mark(h);
        self.counters.degree_reduction_steps += 1;
        if self.is_implicit(x) {
            self.convert_implicit(h, x);
        }
        let done = self.restructure_deferred(h, x);
        self.block_done(mark, BlockKind::DegreeReduction);
        done
    }

    fn restructure_deferred(&mut self, h: HeapId, x: NodeId) -> bool {
        let Some(first) = self.n(x).child else {
            return false;
        };
        let mut v = [first; 3];
        let mut cur = self.n(first).left;
        for (i, slot) in v.iter_mut().enumerate() {
            if !self.is_deferred(cur) {
                return false;
            }
            *slot = cur;
            if cur == first && i < 2 {
                return false;
            }
            cur = self.n(cur).left;
        }
        for &c in &v {
            if self.is_implicit(c) {
                self.convert_implicit(h, c);
            }
            self.sib_unlink(Siblings::Children(x), c);
        }
        let [a, b, c] = v;
        let (s, m, l) = self.sort3(a, b, c);
        self.attach_child(s, m, Kind::RankChild);
        self.nm(s).rank = 1;
        self.attach_child(m, l, Kind::Deferred);
        self.attach_child(x, s, Kind::NonrankChild);
        self.set_violation_type(h, s, Tag::A, false);
        true
    }

    /// Sorts three nodes with exactly three comparisons.
    fn sort3(&mut self, a: NodeId, b: NodeId, c: NodeId) -> (NodeId, NodeId, NodeId) {
        let (a, b) = if self.less(a, b) { (a, b) } else { (b, a) };
        let (b, c) = if self.less(b, c) { (b, c) } else { (c, b) };
        let (a, b) = if self.less(a, b) { (a, b) } else { (b, a) };
        (a, b, c)
    }

    /// Size bookkeeping of a deletion plus two degree reduction steps on
    /// each of the first two nodes of the node list, which then move to the
    /// end of the list.
    pub(crate) fn heap_size_decrement(&mut self, h: HeapId) {
        let mark = self.mark(h);
        {
            let r = self.rec_mut(h);
            r.size -= 1;
            r.refcount -= 1;
        }
        for _ in 0..2 {
            let Some(f) = self.rec(h).nodes else { break };
            self.degree_reduction_step(h, f);
            self.degree_reduction_step(h, f);
            self.nl_unlink(h, f);
            self.nl_push_back(h, f);
        }
        self.block_done(mark, BlockKind::HeapSizeDecrement);
    }
}
