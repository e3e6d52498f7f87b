//! Block-level tests on hand-built heap states.

use super::blocks::Cause;
use super::lists::Siblings;
use super::*;
use crate::accounting::{ParentCase, ReductionCase};
use crate::verify::Strictness;

struct B {
    p: HeapPool<i64>,
    h: HeapId,
}

impl B {
    fn new(v: Variant) -> Self {
        Self::with_policy(v, Policy::WorstCaseLedger)
    }

    fn with_policy(v: Variant, policy: Policy) -> Self {
        let mut p = HeapPool::new(v);
        let h = p.make_heap(policy);
        B { p, h }
    }

    /// Detached solid node counted in the heap.
    fn node(&mut self, key: i64) -> NodeId {
        let uid = self.p.next_uid;
        self.p.next_uid += 1;
        let x = self.p.alloc(key, uid, self.h);
        let r = self.p.rec_mut(self.h);
        r.size += 1;
        r.refcount += 1;
        if self.p.variant == Variant::Meld {
            self.p.nl_push_back(self.h, x);
        }
        x
    }

    fn root(&mut self, key: i64) -> NodeId {
        let x = self.node(key);
        self.p.sib_push_back(Siblings::Roots(self.h), x);
        x
    }

    fn rank_child(&mut self, parent: NodeId, key: i64) -> NodeId {
        let c = self.node(key);
        self.p.attach_child(parent, c, Kind::RankChild);
        self.p.nm(parent).rank += 1;
        c
    }

    fn nonrank_child(&mut self, parent: NodeId, key: i64) -> NodeId {
        let c = self.node(key);
        self.p.attach_child(parent, c, Kind::NonrankChild);
        c
    }

    fn deferred_child(&mut self, parent: NodeId, key: i64) -> NodeId {
        let c = self.node(key);
        self.p.attach_child(parent, c, Kind::Deferred);
        c
    }

    /// Gives `x` tag `t` and loss, placed in the registry or cached.
    fn tag(&mut self, x: NodeId, t: Tag, loss: u32, placed: bool) {
        let h = self.h;
        self.p.set_loss_raw(h, x, loss);
        self.p.set_tag_raw(h, x, t);
        if t == Tag::N {
            return;
        }
        if placed {
            let r = self.p.n(x).rank;
            self.p.reg_place(h, t, r, x);
        } else {
            self.p.cache_push(h, t, x);
        }
    }

    fn phi(&self) -> i64 {
        self.p.compute_phi(self.h).total()
    }

    fn coords(&self) -> [i64; 3] {
        let s = self.p.compute_phi(self.h);
        [s.phi_g, s.phi_a, s.phi_l]
    }

    fn assert_ok(&self) {
        let r = self.p.check_structure(self.h, Strictness::AnyTime);
        assert!(r.is_ok(), "{r}");
        assert_eq!(self.p.tracked_phi(self.h), self.coords());
    }

    fn step(&mut self, t: Tag) -> (ReductionCase, i64) {
        let before = self.phi();
        let o = self.p.reduce_step(self.h, t).unwrap().unwrap();
        let d = self.phi() - before;
        assert_eq!(o.d_phi.iter().sum::<i64>(), d, "tracked and exact step deltas differ");
        (o.case, d)
    }
}

fn diff(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
}

// ---- make_heap / insert / find_min / delete_min / decrease_key ----

#[test]
fn make_heap_is_empty() {
    let mut p: HeapPool<i64> = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::Amortized);
    assert_eq!(p.len(h), Ok(0));
    assert_eq!(p.find_min(h), Ok(None));
    let g = p.make_heap(Policy::WorstCaseLedger);
    assert_eq!(p.ledger(g), PotentialLedger::default());
    p.insert(h, 1).unwrap();
    assert_eq!(p.len(g), Ok(0));
}

#[test]
fn insert_and_find_min() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::Amortized);
    let x = p.insert(h, 5).unwrap();
    assert_eq!(p.find_min(h), Ok(Some(x)));
    p.insert(h, 3).unwrap();
    let y = p.insert(h, 1).unwrap();
    p.insert(h, 2).unwrap();
    assert_eq!(p.find_min(h), Ok(Some(y)));
    assert_eq!(p.key(y), Some(1));
}

#[test]
fn insert_injects_at_most_three() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::WorstCaseLedger);
    for k in 0..200 {
        p.insert(h, (k * 7919) % 211).unwrap();
        let r = p.take_last_op().unwrap();
        assert!(r.injected_total() <= 3, "{r:?}");
    }
}

#[test]
fn find_min_on_single_root_is_free() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::WorstCaseLedger);
    for k in 0..20 {
        p.insert(h, k).unwrap();
    }
    let links = p.counters().links;
    p.find_min(h).unwrap();
    assert_eq!(p.counters().links, links);
    assert_eq!(p.take_last_op().unwrap().injected, [0, 0, 0]);
    assert_eq!(p.ledger(h), PotentialLedger::default());
}

#[test]
fn five_roots_need_four_links() {
    let mut b = B::new(Variant::NoMeld);
    for k in [5, 3, 9, 1, 7] {
        b.root(k);
    }
    let links = b.p.counters().links;
    let m = b.p.find_min(b.h).unwrap().unwrap();
    assert_eq!(b.p.key(m), Some(1));
    assert_eq!(b.p.roots(b.h).len(), 1);
    // phase 2 links plus links made by reductions
    assert!(b.p.counters().links - links >= 4);
    let mut c = B::new(Variant::NoMeld);
    for k in [5, 3, 9, 1, 7] {
        let x = c.root(k);
        c.tag(x, Tag::A, 0, false);
    }
    let h = c.h;
    c.p.phase_link(h);
    assert_eq!(c.p.counters().links, 4);
    assert_eq!(c.p.roots(h).len(), 1);
}

#[test]
fn delete_min_sorted_output() {
    let mut p = HeapPool::new(Variant::Meld);
    let h = p.make_heap(Policy::Amortized);
    let keys: Vec<i64> = (1..=100).map(|k| (k * 37) % 101).collect();
    for &k in &keys {
        p.insert(h, k).unwrap();
    }
    let mut out = Vec::new();
    while let Ok((k, _)) = p.delete_min(h) {
        out.push(k);
    }
    let mut want = keys.clone();
    want.sort();
    assert_eq!(out, want);
    assert_eq!(p.delete_min(h), Err(HeapError::Empty));
}

#[test]
fn decrease_key_errors_and_equal_key() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::Amortized);
    let x = p.insert(h, 5).unwrap();
    p.insert(h, 1).unwrap();
    assert_eq!(p.decrease_key(h, x, 6), Err(HeapError::KeyIncrease(x)));
    let before = p.counters().clone();
    assert_eq!(p.decrease_key(h, x, 5), Ok(()));
    assert_eq!(p.counters(), &before);
    p.decrease_key(h, x, 0).unwrap();
    assert_eq!(p.delete_min(h).unwrap().0, 0);
    assert_eq!(p.decrease_key(h, x, -1), Err(HeapError::StaleHandle(x)));
}

#[test]
fn decrease_leaf_to_new_minimum() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::Amortized);
    let xs: Vec<NodeId> = (0..64).map(|k| p.insert(h, 100 + k).unwrap()).collect();
    p.delete_min(h).unwrap();
    let leaf = *xs.iter().rev().find(|&&x| p.is_live(x) && p.children(x).is_empty()).unwrap();
    p.decrease_key(h, leaf, 1).unwrap();
    assert_eq!(p.find_min(h), Ok(Some(leaf)));
}

#[test]
fn cut_rank_child_of_rank_child_adds_loss() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let pp = b.rank_child(r, 2);
    let x = b.rank_child(pp, 3);
    b.tag(r, Tag::A, 0, true);
    b.assert_ok();
    let before = b.coords();
    let h = b.h;
    b.p.remove_child(h, pp, x);
    assert_eq!(b.p.loss(pp), Some(1));
    assert_eq!(b.p.tag(pp), Some(Tag::L));
    assert!(b.p.rec(h).caches[Tag::L.slot()].iter().any(|y| y == pp));
    assert_eq!(diff(before, b.coords()), [0, 0, 4]);
}

#[test]
fn decrease_key_can_inject_four_into_phi_a() {
    // The cut re-caches a placed rank root (+1) and makes x an A root (+2).
    // Three matches settle the ledger with x still cached at rank 3, so the
    // phase-2 rank link with the placed root r re-types r (+1).
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    for k in 50..53 {
        b.rank_child(r, k);
    }
    let pp = b.nonrank_child(r, 10);
    let x = b.rank_child(pp, 20);
    for k in 21..24 {
        b.rank_child(pp, k);
    }
    let q0 = b.nonrank_child(r, 30);
    let q1 = b.nonrank_child(r, 31);
    b.rank_child(q1, 60);
    let q2 = b.nonrank_child(r, 32);
    b.rank_child(q2, 61);
    b.rank_child(q2, 62);
    for n in [r, pp, q0, q1, q2] {
        b.tag(n, Tag::A, 0, true);
    }
    b.assert_ok();
    let h = b.h;
    b.p.decrease_key(h, x, 2).unwrap();
    let rep = b.p.take_last_op().unwrap();
    assert_eq!(rep.injected, [0, 4, 0]);
    assert!(rep.injected_total() <= 8);
    assert!(rep.reduction_steps <= 12);
    assert_eq!(b.p.parent(x), Some(r));
    b.assert_ok();
}

// ---- set_violation_type ----

#[test]
fn set_type_n_to_a() {
    let mut b = B::new(Variant::NoMeld);
    let x = b.root(1);
    let before = b.coords();
    let h = b.h;
    b.p.set_violation_type(h, x, Tag::A, true);
    assert_eq!(diff(before, b.coords()), [0, 2, 0]);
    assert_eq!(b.p.tracked_phi(h), b.coords());
}

#[test]
fn set_type_placed_a_to_n() {
    let mut b = B::new(Variant::NoMeld);
    let x = b.root(1);
    b.tag(x, Tag::A, 0, true);
    let h = b.h;
    let before = b.phi();
    b.p.set_violation_type(h, x, Tag::N, true);
    assert_eq!(b.p.reg_get(h, Tag::A, 0), None);
    assert_eq!(b.p.cache_len(h, Tag::A), 0);
    assert!(b.phi() <= before);
}

#[test]
fn placed_loss_node_gains_second_loss() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let x = b.rank_child(r, 2);
    let c1 = b.rank_child(x, 3);
    b.rank_child(x, 4);
    b.tag(r, Tag::A, 0, true);
    b.tag(x, Tag::L, 1, true);
    b.assert_ok();
    let h = b.h;
    b.p.remove_child(h, x, c1);
    assert_eq!(b.p.reg_get(h, Tag::L, 1), None);
    assert_eq!(b.p.loss(x), Some(2));
    assert_eq!(b.p.rec(h).caches[Tag::L.slot()].iter().last(), Some(x));
}

// ---- rank_decrement ----

#[test]
fn rank_decrement_cases_nomeld() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let pp = b.rank_child(r, 2);
    let q = b.rank_child(r, 3);
    b.tag(r, Tag::A, 0, true);
    b.rank_child(pp, 4);
    for k in 0..3 {
        b.rank_child(q, 10 + k);
    }
    b.tag(q, Tag::L, 2, false);
    let h = b.h;

    // loss 0 -> 1: pushed, +4
    let before = b.coords();
    b.p.rank_decrement(h, pp, Cause::Alpha);
    assert_eq!(diff(before, b.coords()), [0, 0, 4]);

    // loss 2 -> 3: no cache action; the weight of its entry follows the loss
    let cached = b.p.cache_len(h, Tag::L);
    let before = b.coords();
    b.p.rank_decrement(h, q, Cause::Alpha);
    assert_eq!(b.p.cache_len(h, Tag::L), cached);
    assert_eq!(b.p.loss(q), Some(3));
    assert_eq!(diff(before, b.coords()), [0, 0, 4]);

    // rank root: stays A, re-cached, +1
    let before = b.coords();
    b.p.rank_decrement(h, r, Cause::Alpha);
    assert_eq!(b.p.tag(r), Some(Tag::A));
    assert_eq!(diff(before, b.coords()), [0, 1, 0]);
    assert_eq!(b.p.tracked_phi(h), b.coords());
}

#[test]
fn rank_decrement_meld_root_alpha_is_g_beta_keeps() {
    let mut b = B::new(Variant::Meld);
    let r = b.root(1);
    b.rank_child(r, 2);
    b.rank_child(r, 3);
    b.tag(r, Tag::A, 0, true);
    let h = b.h;
    b.p.rank_decrement(h, r, Cause::Beta);
    assert_eq!(b.p.tag(r), Some(Tag::A));
    b.p.rank_decrement(h, r, Cause::Alpha);
    assert_eq!(b.p.tag(r), Some(Tag::G));
    assert_eq!(b.p.tracked_phi(h), b.coords());
}

// ---- add_solid_child ----

#[test]
fn add_child_to_rank_child_is_free() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    b.tag(r, Tag::A, 0, true);
    let pp = b.rank_child(r, 2);
    let c = b.node(5);
    let h = b.h;
    let before = b.phi();
    b.p.add_solid_child(h, pp, c, true);
    assert_eq!(b.phi(), before);
    assert_eq!(b.p.rank(pp), Some(1));
}

#[test]
fn add_child_meld_a_to_g_runs_degree_reduction() {
    let mut b = B::new(Variant::Meld);
    let r = b.root(1);
    for k in [9, 4, 7] {
        b.deferred_child(r, k);
    }
    b.tag(r, Tag::A, 0, true);
    let c = b.node(20);
    b.tag(c, Tag::A, 0, false);
    let h = b.h;
    let deg = b.p.counters().degree_reduction_steps;
    let before = b.phi();
    b.p.add_solid_child(h, r, c, false);
    assert_eq!(b.p.tag(r), Some(Tag::G));
    assert_eq!(b.p.counters().degree_reduction_steps, deg + 1);
    assert!(b.phi() - before <= 10);
}

#[test]
fn first_link_makes_rank_one() {
    let mut b = B::new(Variant::NoMeld);
    let x = b.root(3);
    let y = b.root(7);
    b.tag(x, Tag::A, 0, false);
    b.tag(y, Tag::A, 0, false);
    let h = b.h;
    let s = b.p.link(h, x, y);
    assert_eq!(s, x);
    assert_eq!(b.p.rank(x), Some(1));
    assert_eq!(b.p.tag(y), Some(Tag::N));
    assert_eq!(b.p.children(x), vec![y]);
}

// ---- remove_child ----

#[test]
fn remove_nonrank_child_keeps_rank() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    b.tag(r, Tag::A, 0, true);
    b.rank_child(r, 2);
    let c = b.nonrank_child(r, 3);
    b.tag(c, Tag::A, 0, false);
    let h = b.h;
    b.p.remove_child(h, r, c);
    assert_eq!(b.p.rank(r), Some(1));
    assert_eq!(b.p.roots(h), vec![r, c]);
}

#[test]
fn remove_rank_child_of_root_recaches() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let c = b.rank_child(r, 2);
    b.tag(r, Tag::A, 0, true);
    let h = b.h;
    b.p.remove_child(h, r, c);
    assert_eq!(b.p.rank(r), Some(0));
    assert_eq!(b.p.tag(r), Some(Tag::A));
    assert_eq!(b.p.reg_get(h, Tag::A, 1), None);
    assert_eq!(b.p.cache_len(h, Tag::A), 1);
}

// ---- link ----

#[test]
fn link_unequal_ranks() {
    for v in [Variant::NoMeld, Variant::Meld] {
        let mut b = B::new(v);
        let x = b.root(3);
        b.rank_child(x, 10);
        b.rank_child(x, 11);
        let y = b.root(7);
        b.tag(x, Tag::A, 0, false);
        b.tag(y, Tag::A, 0, false);
        let h = b.h;
        b.p.link(h, x, y);
        assert_eq!(b.p.rank(x), Some(2));
        assert_eq!(b.p.tag(y), Some(Tag::A));
        let kids = b.p.children(x);
        match v {
            Variant::Meld => assert_eq!(kids[0], y),
            Variant::NoMeld => assert_eq!(*kids.last().unwrap(), y),
        }
        b.assert_ok();
    }
}

#[test]
fn link_equal_keys_uid_decides() {
    let mut b = B::new(Variant::NoMeld);
    let x = b.root(5);
    let y = b.root(5);
    b.tag(x, Tag::A, 0, false);
    b.tag(y, Tag::A, 0, false);
    let h = b.h;
    let c = b.p.counters().comparisons;
    assert_eq!(b.p.link(h, y, x), x);
    assert_eq!(b.p.counters().comparisons, c + 1);
    assert_eq!(b.p.parent(y), Some(x));
    assert_eq!(b.p.parent(x), None);
}

// ---- AC / LC reductions, no meld ----

#[test]
fn ac_stale_and_place_and_match() {
    let mut b = B::new(Variant::NoMeld);
    let x = b.root(1);
    b.tag(x, Tag::A, 0, false);
    let h = b.h;
    b.p.set_tag_raw(h, x, Tag::N);
    assert_eq!(b.step(Tag::A), (ReductionCase::AcStale, -2));

    let mut b = B::new(Variant::NoMeld);
    let x = b.root(1);
    b.tag(x, Tag::A, 0, false);
    assert_eq!(b.step(Tag::A), (ReductionCase::AcPlaced, -1));
    assert_eq!(b.step_none(Tag::A), None);

    let mut b = B::new(Variant::NoMeld);
    let y = b.root(2);
    b.tag(y, Tag::A, 0, true);
    let x = b.root(1);
    b.tag(x, Tag::A, 0, false);
    let ar = b.p.compute_phi(b.h).ar;
    let (case, d) = b.step(Tag::A);
    assert_eq!(case, ReductionCase::AcMatched);
    assert!(d <= -1);
    assert_eq!(b.p.compute_phi(b.h).ar, ar - 1);
    assert_eq!(b.p.parent(y), Some(x));
    b.assert_ok();
}

impl B {
    fn step_none(&mut self, t: Tag) -> Option<ReductionOutcome> {
        self.p.reduce_step(self.h, t).unwrap()
    }
}

#[test]
fn lc_stale_and_place() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let x = b.rank_child(r, 2);
    b.tag(r, Tag::A, 0, true);
    b.tag(x, Tag::L, 1, false);
    let h = b.h;
    b.p.set_loss_raw(h, x, 0);
    b.p.set_tag_raw(h, x, Tag::N);
    assert_eq!(b.step(Tag::L), (ReductionCase::LcStale, -4));

    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let x = b.rank_child(r, 2);
    b.tag(r, Tag::A, 0, true);
    b.tag(x, Tag::L, 1, false);
    assert_eq!(b.step(Tag::L), (ReductionCase::LcPlaced, -1));
    b.assert_ok();
}

/// root r (A, placed) -> rank child p (tag given) -> rank children x, y
/// with loss 1; y placed, x cached.
fn loss_pair(v: Variant, p_tag: Tag, p_loss: u32, p_placed: bool) -> (B, NodeId, NodeId, NodeId) {
    let mut b = B::new(v);
    let r = b.root(1);
    let pp = b.rank_child(r, 2);
    let x = b.rank_child(pp, 3);
    let y = b.rank_child(pp, 4);
    let rt = if v == Variant::Meld { Tag::G } else { Tag::A };
    b.tag(r, rt, 0, true);
    b.tag(pp, p_tag, p_loss, p_placed);
    b.tag(y, Tag::L, 1, true);
    b.tag(x, Tag::L, 1, false);
    (b, pp, x, y)
}

#[test]
fn lc_match_parent_n() {
    let (mut b, pp, x, y) = loss_pair(Variant::NoMeld, Tag::N, 0, false);
    b.assert_ok();
    assert_eq!(
        b.step(Tag::L),
        (ReductionCase::LcMatched(ParentCase::N), -3)
    );
    assert_eq!(b.p.parent(y), Some(x));
    assert_eq!(b.p.loss(pp), Some(1));
    assert_eq!(b.p.tag(pp), Some(Tag::L));
    assert_eq!((b.p.loss(x), b.p.loss(y)), (Some(0), Some(0)));
    assert_eq!((b.p.tag(x), b.p.tag(y)), (Some(Tag::N), Some(Tag::N)));
    b.assert_ok();
}

#[test]
fn lc_match_parent_in_lr() {
    let (mut b, pp, ..) = loss_pair(Variant::NoMeld, Tag::L, 1, true);
    b.assert_ok();
    assert_eq!(
        b.step(Tag::L),
        (ReductionCase::LcMatched(ParentCase::LInLr), -2)
    );
    assert_eq!(b.p.loss(pp), Some(2));
    b.assert_ok();
}

#[test]
fn one_node_reduction_parent_n() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    let pp = b.rank_child(r, 2);
    let x = b.rank_child(pp, 3);
    b.rank_child(pp, 4);
    b.rank_child(pp, 5);
    b.tag(r, Tag::A, 0, true);
    b.tag(x, Tag::L, 2, false);
    b.assert_ok();
    let (case, d) = b.step(Tag::L);
    assert_eq!(case, ReductionCase::LcMulti(ParentCase::N));
    assert!(d <= -2);
    assert_eq!(b.p.tag(x), Some(Tag::A));
    assert_eq!(b.p.loss(x), Some(0));
    assert_eq!(b.p.rank(pp), Some(2));
    assert_eq!(b.p.loss(pp), Some(1));
    assert_eq!(*b.p.children(pp).last().unwrap(), x);
    b.assert_ok();
}

#[test]
fn one_node_reduction_parent_rank_root() {
    for placed in [true, false] {
        let mut b = B::new(Variant::NoMeld);
        let r = b.root(1);
        let x = b.rank_child(r, 3);
        b.rank_child(x, 10);
        b.tag(r, Tag::A, 0, placed);
        b.tag(x, Tag::L, 2, false);
        let before = b.coords();
        let (case, _) = b.step(Tag::L);
        let d = diff(before, b.coords());
        if placed {
            assert_eq!(case, ReductionCase::LcMulti(ParentCase::AInAr));
            assert_eq!(d[1], 3);
        } else {
            assert_eq!(case, ReductionCase::LcMulti(ParentCase::AInAc));
            assert_eq!(d[1], 2);
        }
        assert_eq!(b.p.tag(r), Some(Tag::A));
        b.assert_ok();
    }
}

#[test]
fn two_node_same_parent() {
    let (mut b, pp, x, y) = loss_pair(Variant::NoMeld, Tag::N, 0, false);
    let total_loss = |b: &B| [pp, x, y].iter().map(|&n| b.p.loss(n).unwrap()).sum::<u32>();
    let before = total_loss(&b);
    b.step(Tag::L);
    assert!(total_loss(&b) < before);
    assert_eq!(b.p.rank(pp), Some(1));
}

#[test]
fn reduce_until_modes() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::WorstCaseLedger);
    assert_eq!(p.reduce_until(h, ReduceMode::DrainAll), Ok(0));
    let xs: Vec<NodeId> = (0..300).map(|k| p.insert(h, 1000 + k).unwrap()).collect();
    for (i, &x) in xs.iter().enumerate().skip(1).step_by(3) {
        p.decrease_key(h, x, i as i64).unwrap();
        p.reduce_until(h, ReduceMode::LedgerDriven).unwrap();
    }
    p.reduce_until(h, ReduceMode::DrainAll).unwrap();
    assert!(p.caches_empty(h));
    let s = p.compute_phi(h);
    assert_eq!(s.total(), (s.ar + 3 * s.lr) as i64);
}

#[test]
fn ledger_steps_after_decrease_key() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::WorstCaseLedger);
    let xs: Vec<NodeId> = (0..500).map(|k| p.insert(h, 10_000 + k).unwrap()).collect();
    for _ in 0..50 {
        p.delete_min(h).unwrap();
    }
    for (i, &x) in xs.iter().enumerate().skip(60).step_by(7) {
        let start = p.tracked_phi(h);
        p.decrease_key(h, x, i as i64).unwrap();
        let r = p.take_last_op().unwrap();
        let d0 = r.injected;
        let _ = start;
        let bound = (-1i64).max(d0[1]) + (-3i64).max(d0[2]) + 4;
        assert!(r.reduction_steps as i64 <= bound.max(12), "{r:?}");
        assert!(r.reduction_steps <= 12);
    }
}

// ---- meld extension ----

#[test]
fn degree_reduction_restructures_three_deferred() {
    let mut b = B::new(Variant::Meld);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, true);
    let s0 = b.nonrank_child(x, 2);
    b.tag(s0, Tag::A, 0, true);
    let d: Vec<NodeId> = [9, 4, 7].iter().map(|&k| b.deferred_child(x, k)).collect();
    b.assert_ok();
    let h = b.h;
    let deg = b.p.children(x).len();
    assert!(b.p.degree_reduction_step(h, x));
    let (s, m, l) = (d[1], d[2], d[0]);
    assert_eq!(b.p.children(x).len(), deg - 2);
    assert_eq!(b.p.children(x)[0], s);
    assert_eq!(b.p.rank(s), Some(1));
    assert_eq!(b.p.children(s), vec![m]);
    assert_eq!(b.p.children(m), vec![l]);
    assert_eq!(b.p.tag(s), Some(Tag::A));
    assert_eq!(b.p.n(l).kind, Kind::Deferred);
    b.assert_ok();
}

#[test]
fn degree_reduction_with_two_deferred_is_noop() {
    let mut b = B::new(Variant::Meld);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, true);
    b.deferred_child(x, 5);
    b.deferred_child(x, 6);
    let h = b.h;
    let before = b.p.children(x);
    assert!(!b.p.degree_reduction_step(h, x));
    assert_eq!(b.p.children(x), before);
}

#[test]
fn a_match_with_three_deferred_children() {
    let mut b = B::new(Variant::Meld);
    let y = b.root(2);
    b.tag(y, Tag::A, 0, true);
    let x = b.root(1);
    for k in [5, 6, 7] {
        b.deferred_child(x, k);
    }
    b.tag(x, Tag::A, 0, false);
    assert_eq!(b.step(Tag::A), (ReductionCase::AcMatchedDeferred, -1));
    b.assert_ok();

    let mut b = B::new(Variant::Meld);
    let y = b.root(2);
    b.tag(y, Tag::A, 0, true);
    let x = b.root(1);
    b.tag(x, Tag::A, 0, false);
    assert_eq!(b.step(Tag::A), (ReductionCase::AcMatched, -7));
    b.assert_ok();
}

#[test]
fn gc_cases() {
    let mut b = B::new(Variant::Meld);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, false);
    let h = b.h;
    b.p.set_tag_raw(h, x, Tag::A);
    assert_eq!(b.step(Tag::G), (ReductionCase::GcStale, -4));

    let mut b = B::new(Variant::Meld);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, false);
    assert_eq!(b.step(Tag::G), (ReductionCase::GcPlaced, -1));

    let mut b = B::new(Variant::Meld);
    let y = b.root(2);
    b.tag(y, Tag::G, 0, true);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, false);
    let s0 = b.p.compute_phi(b.h);
    assert_eq!(b.step(Tag::G), (ReductionCase::GcMatched, -1));
    let s1 = b.p.compute_phi(b.h);
    assert_eq!((s1.gr, s1.ac), (s0.gr - 1, s0.ac + 1));
    assert_eq!(b.p.tag(x), Some(Tag::A));
    b.assert_ok();
}

#[test]
fn meld_l_prime_parent_g_in_gr() {
    let mut b = B::new(Variant::Meld);
    let r = b.root(1);
    let x = b.rank_child(r, 3);
    b.rank_child(x, 10);
    b.tag(r, Tag::G, 0, true);
    b.tag(x, Tag::L, 2, false);
    let (case, d) = b.step(Tag::L);
    assert_eq!(case, ReductionCase::LcMulti(ParentCase::GInGr));
    assert!(d <= -17);
    b.assert_ok();
}

#[test]
fn meld_l_match_parent_a_in_ar() {
    let mut b = B::new(Variant::Meld);
    let r = b.root(1);
    let x = b.rank_child(r, 3);
    let y = b.rank_child(r, 4);
    b.tag(r, Tag::A, 0, true);
    b.tag(y, Tag::L, 1, true);
    b.tag(x, Tag::L, 1, false);
    b.assert_ok();
    assert_eq!(
        b.step(Tag::L),
        (ReductionCase::LcMatched(ParentCase::AInAr), -22)
    );
    b.assert_ok();
}

#[test]
fn heap_size_decrement_cycles_single_node() {
    let mut b = B::new(Variant::Meld);
    let x = b.root(1);
    b.tag(x, Tag::G, 0, true);
    let h = b.h;
    let steps = b.p.counters().degree_reduction_steps;
    b.p.heap_size_decrement(h);
    assert_eq!(b.p.counters().degree_reduction_steps, steps + 4);
    assert_eq!(b.p.node_list(h), vec![x]);
    assert_eq!(b.p.rec(h).size, 0);

    let mut p: HeapPool<i64> = HeapPool::new(Variant::Meld);
    let g = p.make_heap(Policy::Amortized);
    p.rec_mut(g).size = 1;
    p.rec_mut(g).refcount = 1;
    p.heap_size_decrement(g);
    assert_eq!(p.counters().degree_reduction_steps, 0);
    assert_eq!(p.rec(g).size, 0);
}

#[test]
fn meld_sizes_and_retirement() {
    let mut p = HeapPool::new(Variant::Meld);
    let a = p.make_heap(Policy::Amortized);
    let b = p.make_heap(Policy::Amortized);
    for k in [30, 10, 20] {
        p.insert(a, k).unwrap();
    }
    for k in 0..10 {
        p.insert(b, 15 + k).unwrap();
    }
    let s = p.meld(a, b).unwrap();
    assert_eq!(s, b);
    assert_eq!(p.len(b), Ok(13));
    assert_eq!(p.len(a), Err(HeapError::Retired(a)));
    assert_eq!(p.peek_min(b).unwrap().unwrap().0, 10);
    assert!(p.check_refcounts().is_ok(), "{}", p.check_refcounts());
    assert!(p.take_last_op().unwrap().injected_total() <= 14);
    assert_eq!(p.meld(a, b), Err(HeapError::Retired(a)));
    assert_eq!(p.meld(b, b), Err(HeapError::SelfMeld(b)));

    let e = p.make_heap(Policy::Amortized);
    assert_eq!(p.meld(e, b), Ok(b));
    assert!(p.is_discarded(e));
    let mut q: HeapPool<i64> = HeapPool::new(Variant::NoMeld);
    let (x, y) = (q.make_heap(Policy::Amortized), q.make_heap(Policy::Amortized));
    assert_eq!(q.meld(x, y), Err(HeapError::MeldUnsupported));
}

#[test]
fn melded_root_becomes_solid_g() {
    let mut p = HeapPool::new(Variant::Meld);
    let a = p.make_heap(Policy::WorstCaseLedger);
    let b = p.make_heap(Policy::WorstCaseLedger);
    let x = p.insert(a, 1).unwrap();
    p.insert(b, 5).unwrap();
    p.insert(b, 6).unwrap();
    p.meld(a, b).unwrap();
    assert!(p.is_discarded(a));
    assert_eq!(p.n(x).owner, b);
    assert_eq!(p.parent(x), None);
    assert!(p.roots(b).contains(&x));
    assert!(matches!(p.tag(x), Some(Tag::A | Tag::G)));
    assert_eq!(p.refcount(b), Some(3));
}

#[test]
fn convert_implicit_lone_node_and_idempotence() {
    let mut p = HeapPool::new(Variant::Meld);
    let a = p.make_heap(Policy::Amortized);
    let b = p.make_heap(Policy::Amortized);
    let r = p.insert(a, 1).unwrap();
    let c = p.insert(a, 2).unwrap();
    p.insert(b, 0).unwrap();
    p.insert(b, 3).unwrap();
    p.insert(b, 4).unwrap();
    // melding a into b makes r and c implicit; detach c to reach it alone
    let (ra, rc) = (p.refcount(a), p.n(c).parent);
    assert_eq!((ra, rc), (Some(2), Some(r)));
    p.rec_mut(a).size = -1;
    p.degree_reduction_step(b, c);
    assert_eq!(p.n(c).owner, b);
    assert_eq!(p.refcount(a), Some(1));
    p.degree_reduction_step(b, r);
    assert!(p.is_discarded(a));
    let conv = p.counters().conversions;
    p.degree_reduction_step(b, r);
    assert_eq!(p.counters().conversions, conv);
}

// ---- accounting ----

#[test]
fn compute_phi_example() {
    let mut b = B::new(Variant::NoMeld);
    let r0 = b.root(1);
    let r1 = b.root(2);
    b.rank_child(r1, 3);
    let l = b.rank_child(r1, 4);
    b.rank_child(l, 5);
    b.tag(r0, Tag::A, 0, true);
    b.tag(r1, Tag::A, 0, true);
    b.tag(l, Tag::L, 1, true);
    let z = b.root(6);
    b.tag(z, Tag::A, 0, false);
    let h = b.h;
    b.p.set_tag_raw(h, z, Tag::N);
    let s = b.p.compute_phi(h);
    assert_eq!((s.ar, s.ac, s.lr, s.lc_weighted), (2, 1, 1, 0));
    assert_eq!(s.total(), 7);
}

#[test]
fn lc_weight_counts_multi_loss_node_once() {
    let mut b = B::new(Variant::NoMeld);
    let r = b.root(1);
    b.tag(r, Tag::A, 0, true);
    let x = b.rank_child(r, 2);
    for k in 0..3 {
        b.rank_child(x, 10 + k);
    }
    b.tag(x, Tag::L, 3, false);
    let h = b.h;
    b.p.cache_push(h, Tag::L, x);
    let s = b.p.compute_phi(h);
    assert_eq!(s.lc_weighted, 4);
    assert_eq!(b.p.tracked_phi(h), b.coords());
}

#[test]
fn debug_mode_tracks_blocks() {
    let mut p = HeapPool::new(Variant::Meld);
    p.set_instrumentation(crate::accounting::Instrumentation::all());
    let h = p.make_heap(Policy::WorstCaseLedger);
    let xs: Vec<NodeId> = (0..200).map(|k| p.insert(h, 1000 - k).unwrap()).collect();
    for &x in xs.iter().step_by(5) {
        let k = p.key(x).unwrap() - 500;
        p.decrease_key(h, x, k).unwrap();
    }
    for _ in 0..50 {
        p.delete_min(h).unwrap();
    }
    assert!(p.step_violations().is_empty());
    let log = p.take_block_log();
    assert!(!log.is_empty());
    for rec in &log {
        let (v, _) = crate::accounting::check_block(Variant::Meld, rec);
        assert!(v.is_empty(), "{v:?}");
        if let crate::accounting::BlockKind::Link = rec.kind {
            assert!(rec.d_phi.iter().sum::<i64>() <= 10);
        }
    }
}

// ---- checker ----

#[test]
fn checker_finds_seeded_defects() {
    let mut p = HeapPool::new(Variant::NoMeld);
    let h = p.make_heap(Policy::Amortized);
    let xs: Vec<NodeId> = (0..1000).map(|k| p.insert(h, (k * 7919) % 1009).unwrap()).collect();
    p.delete_min(h).unwrap();
    let r = p.check_structure(h, Strictness::AfterAmortized);
    assert!(r.is_ok(), "{r}");
    assert_eq!(r, p.check_structure(h, Strictness::AfterAmortized));

    let c = *xs.iter().find(|&&x| p.is_live(x) && p.parent(x).is_some()).unwrap();
    let parent = p.parent(c).unwrap();
    let mut q = p.clone();
    q.nm(c).key = -1;
    let r = q.check_structure(h, Strictness::AnyTime);
    let f = r.findings.iter().find(|f| f.invariant == "heap-order").unwrap();
    assert_eq!(f.nodes, vec![c, parent]);
    assert_eq!(f.path.last(), Some(&c));

    let n = *xs
        .iter()
        .find(|&&x| p.is_live(x) && p.tag(x) == Some(Tag::N) && p.parent(x).is_some())
        .unwrap();
    let mut q = p.clone();
    q.nm(n).loss = 2;
    assert!(q.check_structure(h, Strictness::AnyTime).has("tag"));
}
