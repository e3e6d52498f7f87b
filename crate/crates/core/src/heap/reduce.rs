//! Cache reductions and the find-min phases.

use super::blocks::Cause;
use super::lists::Siblings;
use super::{HeapPool, Plan, Variant};
use crate::accounting::{ParentCase, ReductionCase, StepViolation};
use crate::error::HeapError;
use crate::node::{HeapId, Kind, NodeId, Tag};

/// Which stopping rule [`HeapPool::reduce_until`] applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceMode {
    /// Until every cache is empty.
    DrainAll,
    /// While a coordinate grew since method entry and its cache is nonempty.
    LedgerDriven,
}

/// Result of one explicit reduction step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionOutcome {
    pub case: ReductionCase,
    /// Tracked potential change of the step (G, A, L).
    pub d_phi: [i64; 3],
}

impl<K: Ord + Copy> HeapPool<K> {
    /// Runs reduction steps on `h` until `mode` says stop; returns how many.
    pub fn reduce_until(&mut self, h: HeapId, mode: ReduceMode) -> Result<u64, HeapError> {
        self.live_record(h)?;
        let before = self.counters.reduction_steps;
        match mode {
            ReduceMode::DrainAll => self.drain(h, true),
            ReduceMode::LedgerDriven => self.ledger_reduce(h),
        }
        Ok(self.counters.reduction_steps - before)
    }

    /// One reduction step on the cache of type `t`; `None` if it is empty.
    pub fn reduce_step(
        &mut self,
        h: HeapId,
        t: Tag,
    ) -> Result<Option<ReductionOutcome>, HeapError> {
        self.live_record(h)?;
        if t == Tag::N || self.rec(h).caches[t.slot()].is_empty() {
            return Ok(None);
        }
        let before = self.rec(h).phi;
        let case = self.step(h, t);
        let after = self.rec(h).phi;
        Ok(Some(ReductionOutcome {
            case,
            d_phi: [after[0] - before[0], after[1] - before[1], after[2] - before[2]],
        }))
    }

    pub(crate) fn find_min_inner(&mut self, h: HeapId, plan: Plan) -> Option<NodeId> {
        if self.rec(h).roots.is_some() {
            self.phase_roots(h);
        }
        self.reduce_phase(h, plan, true);
        self.phase_link(h);
        self.reduce_phase(h, plan, false);
        self.rec(h).roots
    }

    /// Clears stale parent pointers, makes every root explicit and solid,
    /// and gives each root a rank-root type.
    fn phase_roots(&mut self, h: HeapId) {
        let mut cur = self.rec(h).roots;
        while let Some(r) = cur {
            cur = self.n(r).right;
            self.nm(r).parent = None;
            if self.is_implicit(r) {
                self.convert_implicit(h, r);
            }
            if self.n(r).kind == Kind::Deferred {
                self.nm(r).kind = Kind::NonrankChild;
                self.set_violation_type(h, r, Tag::G, true);
            } else if !matches!(self.n(r).tag, Tag::A | Tag::G) {
                self.set_violation_type(h, r, Tag::A, true);
            }
            if self.n(r).loss != 0 {
                self.set_loss_raw(h, r, 0);
            }
        }
    }

    pub(super) fn phase_link(&mut self, h: HeapId) {
        let Some(mut cursor) = self.rec(h).roots else {
            return;
        };
        loop {
            let d = self.n(cursor).left;
            if d == cursor {
                break;
            }
            let s = self.link(h, cursor, d);
            cursor = self.n(s).left;
        }
    }

    fn reduce_phase(&mut self, h: HeapId, plan: Plan, first: bool) {
        match plan {
            Plan::Drain => self.drain(h, true),
            Plan::Ledger => self.ledger_reduce(h),
            Plan::Simple { lc_steps } => {
                if first {
                    for _ in 0..lc_steps {
                        if self.rec(h).caches[Tag::L.slot()].is_empty() {
                            break;
                        }
                        self.step(h, Tag::L);
                    }
                }
                self.drain(h, false);
            }
        }
    }

    fn drain(&mut self, h: HeapId, with_loss: bool) {
        loop {
            let c = &self.rec(h).caches;
            let t = if with_loss && !c[2].is_empty() {
                Tag::L
            } else if !c[1].is_empty() {
                Tag::A
            } else if !c[0].is_empty() {
                Tag::G
            } else {
                break;
            };
            self.step(h, t);
        }
    }

    fn ledger_reduce(&mut self, h: HeapId) {
        loop {
            let r = self.rec(h);
            let d = |i: usize| r.phi[i] - r.ledger_start[i];
            let t = if d(2) > 0 && !r.caches[2].is_empty() {
                Tag::L
            } else if d(1) > 0 && !r.caches[1].is_empty() {
                Tag::A
            } else if d(0) > 0 && !r.caches[0].is_empty() {
                Tag::G
            } else {
                break;
            };
            self.step(h, t);
        }
    }

    fn step(&mut self, h: HeapId, t: Tag) -> ReductionCase {
        let before = self.rec(h).phi;
        let w0 = self.counters.nontree_writes;
        let exact_before = self.instr.check_steps.then(|| self.compute_phi(h).total());
        let case = match t {
            Tag::L => self.reduce_loss_step(h),
            _ => self.reduce_root_step(h, t),
        };
        let after = self.rec(h).phi;
        self.counters.reduction_steps += 1;
        self.counters.cases[case.index()] += 1;
        let delta = [after[0] - before[0], after[1] - before[1], after[2] - before[2]];
        self.note_reduction(delta, self.counters.nontree_writes - w0);
        let (tb, ta) = (before.iter().sum::<i64>(), after.iter().sum::<i64>());
        if ta > tb - 1 {
            self.step_violations.push(StepViolation {
                case,
                before: tb,
                after: ta,
                exhaustive: false,
            });
        }
        if let Some(eb) = exact_before {
            let ea = self.compute_phi(h).total();
            if ea > eb - 1 {
                self.step_violations.push(StepViolation {
                    case,
                    before: eb,
                    after: ea,
                    exhaustive: true,
                });
            }
        }
        case
    }

    fn reduce_root_step(&mut self, h: HeapId, t: Tag) -> ReductionCase {
        let is_a = t == Tag::A;
        let x = self.cache_pop(h, t).expect("nonempty cache");
        if self.n(x).tag != t {
            return if is_a {
                ReductionCase::AcStale
            } else {
                ReductionCase::GcStale
            };
        }
        let r = self.n(x).rank;
        match self.reg_get(h, t, r) {
            Some(y) if y == x => {
                if is_a {
                    ReductionCase::AcPresent
                } else {
                    ReductionCase::GcPresent
                }
            }
            None => {
                self.reg_place(h, t, r, x);
                if is_a {
                    ReductionCase::AcPlaced
                } else {
                    ReductionCase::GcPlaced
                }
            }
            Some(y) => {
                self.reg_take(h, t, r);
                let restructured = self.match_rank_roots(h, x, y, t);
                match (is_a, restructured) {
                    (true, false) => ReductionCase::AcMatched,
                    (true, true) => ReductionCase::AcMatchedDeferred,
                    (false, _) => ReductionCase::GcMatched,
                }
            }
        }
    }

    /// Links two rank roots of equal rank and type, neither of which is in
    /// the registry or cache any more. Returns whether a degree reduction
    /// restructured deferred children of the winner.
    fn match_rank_roots(&mut self, h: HeapId, x: NodeId, y: NodeId, t: Tag) -> bool {
        let (s, l) = if self.less(x, y) { (x, y) } else { (y, x) };
        self.counters.links += 1;
        if self.n(l).parent.is_some() {
            self.detach(h, l);
        } else {
            self.sib_unlink(Siblings::Roots(h), l);
        }
        self.set_violation_type(h, l, Tag::N, false);
        self.attach_child(s, l, Kind::RankChild);
        self.nm(s).rank += 1;
        match (self.variant, t) {
            (Variant::NoMeld, _) => {
                self.set_violation_type(h, s, Tag::A, false);
                false
            }
            (Variant::Meld, Tag::A) => {
                self.set_violation_type(h, s, Tag::G, false);
                self.degree_reduction_step(h, s)
            }
            (Variant::Meld, _) => {
                self.set_violation_type(h, s, Tag::A, false);
                false
            }
        }
    }

    fn reduce_loss_step(&mut self, h: HeapId) -> ReductionCase {
        let x = self.cache_pop(h, Tag::L).expect("nonempty cache");
        if self.n(x).tag != Tag::L {
            return ReductionCase::LcStale;
        }
        if self.n(x).loss >= 2 {
            return ReductionCase::LcMulti(self.one_node_loss_reduction(h, x));
        }
        let r = self.n(x).rank;
        match self.reg_get(h, Tag::L, r) {
            Some(y) if y == x => ReductionCase::LcPresent,
            None => {
                self.reg_place(h, Tag::L, r, x);
                ReductionCase::LcPlaced
            }
            Some(y) => {
                self.reg_take(h, Tag::L, r);
                ReductionCase::LcMatched(self.two_node_loss_reduction(h, x, y))
            }
        }
    }

    /// Promotes the multi-loss node `x` to a rank root below its parent.
    fn one_node_loss_reduction(&mut self, h: HeapId, x: NodeId) -> ParentCase {
        let p = self.n(x).parent.expect("loss node has a parent");
        let mut pc = self.classify_parent(h, p);
        let meld = self.variant == Variant::Meld;
        let t = if meld { Tag::G } else { Tag::A };
        self.set_violation_type(h, x, t, false);
        self.set_loss_raw(h, x, 0);
        self.sib_unlink(Siblings::Children(p), x);
        self.attach_child(p, x, Kind::NonrankChild);
        let p_loss = self.n(p).loss;
        self.rank_decrement(h, p, Cause::Beta);
        if meld && !self.is_rank_root(p) && p_loss == 0 && self.degree_reduction_step(h, p) {
            debug_assert_eq!(pc, ParentCase::N);
            pc = ParentCase::NDeferred;
        }
        pc
    }

    /// Links two single-loss rank children of equal rank; both end with
    /// loss zero and type `N`.
    fn two_node_loss_reduction(&mut self, h: HeapId, x: NodeId, y: NodeId) -> ParentCase {
        let (s, l) = if self.less(x, y) { (x, y) } else { (y, x) };
        self.counters.links += 1;
        let p = self.n(l).parent.expect("loss node has a parent");
        let pc = self.classify_parent(h, p);
        self.detach(h, l);
        self.attach_child(s, l, Kind::RankChild);
        self.nm(s).rank += 1;
        self.set_violation_type(h, s, Tag::N, false);
        self.set_violation_type(h, l, Tag::N, false);
        self.set_loss_raw(h, s, 0);
        self.set_loss_raw(h, l, 0);
        pc
    }

    fn classify_parent(&self, h: HeapId, p: NodeId) -> ParentCase {
        let n = self.n(p);
        let placed = |t: Tag| self.reg_get(h, t, n.rank) == Some(p);
        if self.is_rank_root(p) {
            match n.tag {
                Tag::G if placed(Tag::G) => ParentCase::GInGr,
                Tag::G => ParentCase::GInGc,
                Tag::A if placed(Tag::A) => ParentCase::AInAr,
                _ => ParentCase::AInAc,
            }
        } else {
            match n.tag {
                Tag::L if n.loss == 1 && placed(Tag::L) => ParentCase::LInLr,
                Tag::L => ParentCase::LInLc,
                _ => ParentCase::N,
            }
        }
    }
}
