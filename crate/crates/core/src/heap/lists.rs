//! Doubly linked sibling lists (children of a node, or the root list of a
//! heap) and the global node list used by the meld variant.
//!
//! Sibling lists are cyclic through `left` (the leftmost node's `left` is
//! the rightmost node) and terminated through `right`, so both ends are
//! reachable in O(1). Writes to the root list and node list are counted as
//! non-tree writes.

use super::HeapPool;
use crate::node::{HeapId, NodeId};

#[derive(Clone, Copy, Debug)]
pub(crate) enum Siblings {
    Children(NodeId),
    Roots(HeapId),
}

pub(crate) struct SibIter<'a, K> {
    pool: &'a HeapPool<K>,
    cur: Option<NodeId>,
}

impl<K: Ord + Copy> Iterator for SibIter<'_, K> {
    type Item = NodeId;
    fn next(&mut self) -> Option<NodeId> {
        let x = self.cur?;
        self.cur = self.pool.n(x).right;
        Some(x)
    }
}

impl<K: Ord + Copy> HeapPool<K> {
    pub(crate) fn sib_iter(&self, head: Option<NodeId>) -> SibIter<'_, K> {
        SibIter { pool: self, cur: head }
    }

    fn touch(&mut self, l: Siblings, writes: u64) {
        if let Siblings::Roots(_) = l {
            self.counters.nontree_writes += writes;
        }
    }

    pub(crate) fn sib_head(&self, l: Siblings) -> Option<NodeId> {
        match l {
            Siblings::Children(p) => self.n(p).child,
            Siblings::Roots(h) => self.rec(h).roots,
        }
    }

    pub(crate) fn set_sib_head(&mut self, l: Siblings, v: Option<NodeId>) {
        self.touch(l, 1);
        match l {
            Siblings::Children(p) => self.nm(p).child = v,
            Siblings::Roots(h) => self.rec_mut(h).roots = v,
        }
    }

    pub(crate) fn sib_push_front(&mut self, l: Siblings, x: NodeId) {
        match self.sib_head(l) {
            None => {
                let n = self.nm(x);
                n.left = x;
                n.right = None;
                self.touch(l, 2);
            }
            Some(f) => {
                let tail = self.n(f).left;
                let n = self.nm(x);
                n.left = tail;
                n.right = Some(f);
                self.nm(f).left = x;
                self.touch(l, 3);
            }
        }
        self.set_sib_head(l, Some(x));
    }

    pub(crate) fn sib_push_back(&mut self, l: Siblings, x: NodeId) {
        match self.sib_head(l) {
            None => {
                let n = self.nm(x);
                n.left = x;
                n.right = None;
                self.touch(l, 2);
                self.set_sib_head(l, Some(x));
            }
            Some(f) => {
                let tail = self.n(f).left;
                let n = self.nm(x);
                n.left = tail;
                n.right = None;
                self.nm(tail).right = Some(x);
                self.nm(f).left = x;
                self.touch(l, 4);
            }
        }
    }

    pub(crate) fn sib_unlink(&mut self, l: Siblings, x: NodeId) {
        let f = self.sib_head(l).expect("unlink from empty list");
        let (left, right) = (self.n(x).left, self.n(x).right);
        if f == x {
            if let Some(r) = right {
                self.nm(r).left = left;
                self.touch(l, 1);
            }
            self.set_sib_head(l, right);
        } else {
            self.nm(left).right = right;
            match right {
                Some(r) => self.nm(r).left = left,
                None => self.nm(f).left = left,
            }
            self.touch(l, 2);
        }
        let n = self.nm(x);
        n.left = x;
        n.right = None;
    }

    /// Splices the whole list starting at `head` in front of `l`.
    pub(crate) fn sib_prepend_list(&mut self, l: Siblings, head: Option<NodeId>) {
        let Some(a) = head else { return };
        if let Some(b) = self.sib_head(l) {
            let a_tail = self.n(a).left;
            let b_tail = self.n(b).left;
            self.nm(a_tail).right = Some(b);
            self.nm(b).left = a_tail;
            self.nm(a).left = b_tail;
            self.touch(l, 3);
        }
        self.set_sib_head(l, Some(a));
    }

    pub(crate) fn nl_push_back(&mut self, h: HeapId, x: NodeId) {
        self.counters.nontree_writes += 2;
        match self.rec(h).nodes {
            None => {
                let n = self.nm(x);
                n.prev = x;
                n.next = None;
                self.rec_mut(h).nodes = Some(x);
            }
            Some(f) => {
                let tail = self.n(f).prev;
                let n = self.nm(x);
                n.prev = tail;
                n.next = None;
                self.nm(tail).next = Some(x);
                self.nm(f).prev = x;
            }
        }
    }

    pub(crate) fn nl_unlink(&mut self, h: HeapId, x: NodeId) {
        self.counters.nontree_writes += 2;
        let f = self.rec(h).nodes.expect("unlink from empty node list");
        let (prev, next) = (self.n(x).prev, self.n(x).next);
        if f == x {
            if let Some(nx) = next {
                self.nm(nx).prev = prev;
            }
            self.rec_mut(h).nodes = next;
        } else {
            self.nm(prev).next = next;
            match next {
                Some(nx) => self.nm(nx).prev = prev,
                None => self.nm(f).prev = prev,
            }
        }
        let n = self.nm(x);
        n.prev = x;
        n.next = None;
    }

    /// Moves the node list of `src` in front of the node list of `dst`.
    pub(crate) fn nl_prepend(&mut self, dst: HeapId, src: HeapId) {
        let Some(a) = self.rec_mut(src).nodes.take() else {
            return;
        };
        self.counters.nontree_writes += 3;
        if let Some(b) = self.rec(dst).nodes {
            let a_tail = self.n(a).prev;
            let b_tail = self.n(b).prev;
            self.nm(a_tail).next = Some(b);
            self.nm(b).prev = a_tail;
            self.nm(a).prev = b_tail;
        }
        self.rec_mut(dst).nodes = Some(a);
    }
}
