//! Private blocks shared by the public methods and the reductions.

use super::lists::Siblings;
use super::{HeapPool, Variant};
use crate::accounting::BlockKind;
use crate::node::{HeapId, Kind, NodeId, Tag};

/// Why a rank decrement happens: `Alpha` when a rank child was removed,
/// `Beta` when a multi-loss child was promoted to a rank root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cause {
    Alpha,
    Beta,
}

impl<K: Ord + Copy> HeapPool<K> {
    /// Sets the tag of `x` to `t` and keeps registries and caches in sync.
    /// `known_cached` says the caller knows `x` has a live entry in the
    /// cache of its current tag when it is not placed in the registry.
    pub(crate) fn set_violation_type(&mut self, h: HeapId, x: NodeId, t: Tag, known_cached: bool) {
        let mark = self.mark(h);
        let old = self.n(x).tag;
        let placed = self.unplace(h, x);
        let in_cache = known_cached && old == t && !placed;
        self.retag(h, x, t, in_cache);
        self.block_done(mark, BlockKind::SetType(t));
    }

    /// Sets the tag; pushes `x` to the new cache unless it is already there.
    pub(crate) fn retag(&mut self, h: HeapId, x: NodeId, t: Tag, in_cache: bool) {
        self.set_tag_raw(h, x, t);
        if t != Tag::N && !in_cache {
            self.cache_push(h, t, x);
        }
    }

    /// Lowers the rank of `p` by one. A rank root keeps its type (the meld
    /// variant turns it into `G` after a child removal); a rank child
    /// gains one loss and becomes a loss node.
    pub(crate) fn rank_decrement(&mut self, h: HeapId, p: NodeId, cause: Cause) {
        let mark = self.mark(h);
        let old = self.n(p).tag;
        let placed = self.unplace(h, p);
        debug_assert!(self.n(p).rank > 0);
        self.nm(p).rank -= 1;
        if self.is_rank_root(p) {
            let t = if self.variant == Variant::Meld && cause == Cause::Alpha {
                Tag::G
            } else {
                old
            };
            self.retag(h, p, t, t == old && !placed);
        } else {
            let loss = self.n(p).loss;
            self.set_loss_raw(h, p, loss + 1);
            self.retag(h, p, Tag::L, old == Tag::L && !placed);
        }
        self.block_done(mark, BlockKind::RankDecrement);
    }

    /// Links `c` below `p` in the child list without touching tags.
    pub(crate) fn attach_child(&mut self, p: NodeId, c: NodeId, kind: Kind) {
        self.nm(c).kind = kind;
        self.nm(c).parent = Some(p);
        let l = Siblings::Children(p);
        match kind {
            Kind::RankChild => self.sib_push_front(l, c),
            Kind::NonrankChild if self.variant == Variant::Meld => self.sib_push_front(l, c),
            Kind::NonrankChild | Kind::Deferred => self.sib_push_back(l, c),
        }
    }

    /// Adds the solid node `c` as a child of `p`, as a rank child when
    /// `rank_child` (raising the rank of `p`). A rank root `p` is re-cached:
    /// as `A` without meld, toggling between `A` and `G` with meld, where
    /// becoming `G` triggers a degree reduction step.
    pub(crate) fn add_solid_child(&mut self, h: HeapId, p: NodeId, c: NodeId, rank_child: bool) {
        let mark = self.mark(h);
        let kind = if rank_child {
            Kind::RankChild
        } else {
            Kind::NonrankChild
        };
        self.attach_child(p, c, kind);
        if self.is_rank_root(p) {
            let meld = self.variant == Variant::Meld;
            let old = self.n(p).tag;
            let placed = if rank_child || meld {
                self.unplace(h, p)
            } else {
                false
            };
            if rank_child {
                self.nm(p).rank += 1;
            }
            let t = match (meld, old) {
                (false, _) => Tag::A,
                (true, Tag::A) => Tag::G,
                (true, _) => Tag::A,
            };
            if rank_child || meld {
                self.retag(h, p, t, t == old && !placed);
            }
            if meld && t == Tag::G {
                self.degree_reduction_step(h, p);
            }
        } else if rank_child {
            self.nm(p).rank += 1;
        }
        self.block_done(mark, BlockKind::AddSolidChild);
    }

    /// Unlinks `c` from its parent; a removed rank child costs the parent
    /// one rank. Returns the former parent.
    pub(crate) fn detach(&mut self, h: HeapId, c: NodeId) -> NodeId {
        let mark = self.mark(h);
        let p = self.n(c).parent.expect("detach needs a parent");
        let was_rank = self.is_rank_child(c);
        self.sib_unlink(Siblings::Children(p), c);
        self.nm(c).parent = None;
        if was_rank {
            self.rank_decrement(h, p, Cause::Alpha);
        }
        self.block_done(mark, BlockKind::ChildRemoval);
        p
    }

    /// Cuts `c` from `p` and appends it to the root list.
    pub(crate) fn remove_child(&mut self, h: HeapId, p: NodeId, c: NodeId) {
        debug_assert_eq!(self.n(c).parent, Some(p));
        self.detach(h, c);
        self.sib_push_back(Siblings::Roots(h), c);
    }

    /// Links two heap-tree roots (one comparison) and returns the winner.
    pub(crate) fn link(&mut self, h: HeapId, a: NodeId, b: NodeId) -> NodeId {
        let mark = self.mark(h);
        let (s, l) = if self.less(a, b) { (a, b) } else { (b, a) };
        self.counters.links += 1;
        if self.n(l).parent.is_some() {
            self.detach(h, l);
        } else {
            self.sib_unlink(Siblings::Roots(h), l);
        }
        let rank_child = self.n(s).rank == self.n(l).rank;
        if rank_child {
            self.set_violation_type(h, l, Tag::N, true);
        }
        self.add_solid_child(h, s, l, rank_child);
        self.block_done(mark, BlockKind::Link);
        s
    }
}
