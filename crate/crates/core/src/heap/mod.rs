//! Heap engine: node arena, per-heap records, and the public methods.
//!
//! A [`HeapPool`] owns one node arena shared by every heap record created
//! from it. In the no-meld variant each record is an independent heap; in
//! the meld variant records can be melded, after which the nodes of the
//! smaller record become implicitly deferred members of the larger one.

mod blocks;
mod lists;
mod meld;
mod reduce;

use crate::accounting::{
    BlockKind, BlockRecord, Instrumentation, Method, OpCounters, OpReport, PhiWeights,
    PotentialLedger, StepViolation,
};
use crate::error::HeapError;
use crate::node::{HeapId, Kind, Node, NodeId, Tag};
use crate::registry::{RankRegistry, ViolationCache};

pub use reduce::{ReduceMode, ReductionOutcome};

/// With or without `meld` support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    NoMeld,
    Meld,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::NoMeld => "nomeld",
            Variant::Meld => "meld",
        }
    }
}

/// How much cache reduction a public method performs before returning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Drain every cache at the end of each method.
    Amortized,
    /// Reduce only while a potential coordinate grew since method entry and
    /// its cache is nonempty.
    WorstCaseLedger,
    /// Keep the rank-root caches drained and run two loss-cache steps after
    /// each decrease-key.
    WorstCaseSimple,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Amortized => "amortized",
            Policy::WorstCaseLedger => "worstcase",
            Policy::WorstCaseSimple => "simple",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Plan {
    Drain,
    Ledger,
    Simple { lc_steps: u32 },
}

#[derive(Clone, Debug)]
pub(crate) struct Record {
    /// Number of nodes; -1 once melded away.
    pub size: i64,
    /// Number of nodes whose owner is this record.
    pub refcount: u64,
    pub roots: Option<NodeId>,
    pub nodes: Option<NodeId>,
    /// Indexed by `Tag::slot`: G, A, L.
    pub registries: [RankRegistry; 3],
    pub caches: [ViolationCache; 3],
    pub policy: Policy,
    /// Tracked potential coordinates (G, A, L), weighted.
    pub phi: [i64; 3],
    pub ledger_start: [i64; 3],
    pub discarded: bool,
}

impl Record {
    fn new(policy: Policy) -> Self {
        Record {
            size: 0,
            refcount: 0,
            roots: None,
            nodes: None,
            registries: Default::default(),
            caches: Default::default(),
            policy,
            phi: [0; 3],
            ledger_start: [0; 3],
            discarded: false,
        }
    }
}

#[derive(Clone, Debug)]
struct OpState {
    method: Method,
    heap: HeapId,
    phi_start: [i64; 3],
    reduction_phi: [i64; 3],
    reduction_writes: u64,
    steps: u64,
    comparisons: u64,
    writes: u64,
    n_before: i64,
}

/// Arena of nodes plus all heap records created from it.
#[derive(Clone, Debug)]
pub struct HeapPool<K> {
    pub(crate) variant: Variant,
    pub(crate) nodes: Vec<Node<K>>,
    free: Vec<NodeId>,
    reuse_slots: bool,
    pub(crate) records: Vec<Record>,
    next_uid: u64,
    pub(crate) weights: PhiWeights,
    pub(crate) counters: OpCounters,
    pub(crate) instr: Instrumentation,
    pub(crate) block_log: Vec<BlockRecord>,
    pub(crate) step_violations: Vec<StepViolation>,
    op: Option<OpState>,
    last_op: Option<OpReport>,
}

#[derive(Clone, Copy)]
pub(crate) struct BlockMark {
    heap: HeapId,
    phi: [i64; 3],
    writes: u64,
}

impl<K: Ord + Copy> HeapPool<K> {
    pub fn new(variant: Variant) -> Self {
        HeapPool {
            variant,
            nodes: Vec::new(),
            free: Vec::new(),
            reuse_slots: false,
            records: Vec::new(),
            next_uid: 0,
            weights: PhiWeights::for_variant(variant),
            counters: OpCounters::default(),
            instr: Instrumentation::from_env(),
            block_log: Vec::new(),
            step_violations: Vec::new(),
            op: None,
            last_op: None,
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Allow arena slots of deleted nodes to be reused. Off by default so
    /// that stale handles are reported instead of aliasing new nodes.
    pub fn set_reuse_slots(&mut self, on: bool) {
        self.reuse_slots = on;
    }

    pub fn instrumentation(&self) -> Instrumentation {
        self.instr
    }

    pub fn set_instrumentation(&mut self, instr: Instrumentation) {
        self.instr = instr;
    }

    pub fn counters(&self) -> &OpCounters {
        &self.counters
    }

    /// Report of the most recent public method.
    pub fn last_op(&self) -> Option<&OpReport> {
        self.last_op.as_ref()
    }

    /// Takes the report of the most recent public method, so that a
    /// method returning early (equal-key decrease) is distinguishable.
    pub fn take_last_op(&mut self) -> Option<OpReport> {
        self.last_op.take()
    }

    /// Private-block records collected while block logging is enabled.
    pub fn block_log(&self) -> &[BlockRecord] {
        &self.block_log
    }

    pub fn take_block_log(&mut self) -> Vec<BlockRecord> {
        std::mem::take(&mut self.block_log)
    }

    /// Reduction steps that failed to decrease the potential.
    pub fn step_violations(&self) -> &[StepViolation] {
        &self.step_violations
    }

    pub fn make_heap(&mut self, policy: Policy) -> HeapId {
        let id = HeapId(self.records.len() as u32);
        self.records.push(Record::new(policy));
        id
    }

    pub fn policy(&self, h: HeapId) -> Result<Policy, HeapError> {
        Ok(self.live_record(h)?.policy)
    }

    /// Number of elements, or an error when the heap was melded away.
    pub fn len(&self, h: HeapId) -> Result<usize, HeapError> {
        Ok(self.live_record(h)?.size as usize)
    }

    pub fn is_empty(&self, h: HeapId) -> Result<bool, HeapError> {
        Ok(self.len(h)? == 0)
    }

    pub fn is_retired(&self, h: HeapId) -> bool {
        self.records.get(h.index()).is_some_and(|r| r.size < 0)
    }

    pub fn is_discarded(&self, h: HeapId) -> bool {
        self.records.get(h.index()).is_some_and(|r| r.discarded)
    }

    pub fn refcount(&self, h: HeapId) -> Option<u64> {
        self.records
            .get(h.index())
            .filter(|r| !r.discarded)
            .map(|r| r.refcount)
    }

    pub fn is_live(&self, x: NodeId) -> bool {
        self.nodes.get(x.index()).is_some_and(|n| n.live)
    }

    pub fn key(&self, x: NodeId) -> Option<K> {
        self.nodes.get(x.index()).filter(|n| n.live).map(|n| n.key)
    }

    pub fn uid(&self, x: NodeId) -> Option<u64> {
        self.nodes.get(x.index()).filter(|n| n.live).map(|n| n.uid)
    }

    pub fn rank(&self, x: NodeId) -> Option<u32> {
        self.nodes.get(x.index()).filter(|n| n.live).map(|n| n.rank)
    }

    pub fn loss(&self, x: NodeId) -> Option<u32> {
        self.nodes.get(x.index()).filter(|n| n.live).map(|n| n.loss)
    }

    pub fn tag(&self, x: NodeId) -> Option<Tag> {
        self.nodes.get(x.index()).filter(|n| n.live).map(|n| n.tag)
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        self.nodes.get(x.index()).and_then(|n| n.parent)
    }

    /// Children of `x`, leftmost first.
    pub fn children(&self, x: NodeId) -> Vec<NodeId> {
        self.sib_iter(self.n(x).child).collect()
    }

    /// Heap-tree roots of `h`, leftmost first.
    pub fn roots(&self, h: HeapId) -> Vec<NodeId> {
        self.sib_iter(self.rec(h).roots).collect()
    }

    /// Global node list of `h` (meld variant; empty otherwise).
    pub fn node_list(&self, h: HeapId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.rec(h).nodes;
        while let Some(x) = cur {
            out.push(x);
            cur = self.n(x).next;
        }
        out
    }

    /// Current potential ledger of `h`: change of each coordinate since the
    /// start of the running (or last) public method.
    pub fn ledger(&self, h: HeapId) -> PotentialLedger {
        let r = self.rec(h);
        PotentialLedger {
            d_phi_g: r.phi[0] - r.ledger_start[0],
            d_phi_a: r.phi[1] - r.ledger_start[1],
            d_phi_l: r.phi[2] - r.ledger_start[2],
        }
    }

    /// Tracked (incrementally maintained) potential coordinates G, A, L.
    pub fn tracked_phi(&self, h: HeapId) -> [i64; 3] {
        self.rec(h).phi
    }

    pub fn cache_len(&self, h: HeapId, t: Tag) -> usize {
        self.rec(h).caches[t.slot()].len()
    }

    pub fn registry_len(&self, h: HeapId, t: Tag) -> usize {
        self.rec(h).registries[t.slot()].len()
    }

    pub fn caches_empty(&self, h: HeapId) -> bool {
        self.rec(h).caches.iter().all(|c| c.is_empty())
    }

    // ---- public methods ----

    pub fn insert(&mut self, h: HeapId, key: K) -> Result<NodeId, HeapError> {
        self.live_record(h)?;
        self.begin_op(h, Method::Insert);
        let uid = self.next_uid;
        self.next_uid += 1;
        let x = self.alloc(key, uid, h);
        {
            let r = self.rec_mut(h);
            r.size += 1;
            r.refcount += 1;
        }
        self.sib_push_back(lists::Siblings::Roots(h), x);
        if self.variant == Variant::Meld {
            self.nl_push_back(h, x);
        }
        let plan = self.plan(h, false);
        self.find_min_inner(h, plan);
        self.end_op();
        Ok(x)
    }

    /// Consolidates the heap into one tree and returns its root, or `None`
    /// when the heap is empty.
    pub fn find_min(&mut self, h: HeapId) -> Result<Option<NodeId>, HeapError> {
        self.live_record(h)?;
        self.begin_op(h, Method::FindMin);
        let plan = self.plan(h, false);
        let m = self.find_min_inner(h, plan);
        self.end_op();
        Ok(m)
    }

    /// Key and uid of the minimum without running any method.
    pub fn peek_min(&self, h: HeapId) -> Result<Option<(K, u64)>, HeapError> {
        let r = self.live_record(h)?;
        Ok(r.roots.map(|x| (self.n(x).key, self.n(x).uid)))
    }

    pub fn delete_min(&mut self, h: HeapId) -> Result<(K, u64), HeapError> {
        if self.live_record(h)?.size == 0 {
            return Err(HeapError::Empty);
        }
        self.begin_op(h, Method::DeleteMin);
        let rho = self.rec(h).roots.expect("nonempty heap has a root");
        debug_assert!(self.n(rho).right.is_none(), "delete_min needs a single root");
        if self.variant == Variant::Meld {
            self.heap_size_decrement(h);
        } else {
            let r = self.rec_mut(h);
            r.size -= 1;
            r.refcount -= 1;
        }
        let kids = self.nm(rho).child.take();
        self.set_sib_head(lists::Siblings::Roots(h), kids);
        if self.variant == Variant::Meld {
            self.nl_unlink(h, rho);
        }
        self.set_violation_type(h, rho, Tag::N, true);
        self.find_min_inner(h, Plan::Drain);
        let out = (self.n(rho).key, self.n(rho).uid);
        self.discard_node(rho);
        self.end_op();
        Ok(out)
    }

    /// Lowers the key of `x`. An equal key is accepted and leaves the heap
    /// untouched.
    pub fn decrease_key(&mut self, h: HeapId, x: NodeId, key: K) -> Result<(), HeapError> {
        self.live_record(h)?;
        if !self.is_live(x) {
            return Err(HeapError::StaleHandle(x));
        }
        let cur = self.n(x).key;
        if key > cur {
            return Err(HeapError::KeyIncrease(x));
        }
        if key == cur {
            return Ok(());
        }
        self.begin_op(h, Method::DecreaseKey);
        if let Some(p) = self.n(x).parent {
            self.remove_child(h, p, x);
        }
        self.nm(x).key = key;
        let plan = self.plan(h, true);
        self.find_min_inner(h, plan);
        self.end_op();
        Ok(())
    }

    // ---- internals ----

    pub(crate) fn n(&self, x: NodeId) -> &Node<K> {
        &self.nodes[x.index()]
    }

    pub(crate) fn nm(&mut self, x: NodeId) -> &mut Node<K> {
        &mut self.nodes[x.index()]
    }

    pub(crate) fn rec(&self, h: HeapId) -> &Record {
        &self.records[h.index()]
    }

    pub(crate) fn rec_mut(&mut self, h: HeapId) -> &mut Record {
        &mut self.records[h.index()]
    }

    pub(crate) fn live_record(&self, h: HeapId) -> Result<&Record, HeapError> {
        let r = self.records.get(h.index()).ok_or(HeapError::UnknownHeap(h))?;
        if r.size < 0 {
            return Err(HeapError::Retired(h));
        }
        Ok(r)
    }

    fn alloc(&mut self, key: K, uid: u64, owner: HeapId) -> NodeId {
        if self.reuse_slots {
            if let Some(id) = self.free.pop() {
                let entries = self.n(id).lc_entries;
                let mut node = Node::new(id, key, uid, owner);
                node.lc_entries = entries;
                self.nodes[id.index()] = node;
                return id;
            }
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::new(id, key, uid, owner));
        id
    }

    fn discard_node(&mut self, x: NodeId) {
        let n = self.nm(x);
        n.live = false;
        n.parent = None;
        n.child = None;
        n.right = None;
        n.left = x;
        if self.reuse_slots && self.n(x).lc_entries == 0 {
            self.free.push(x);
        }
    }

    pub(crate) fn plan(&self, h: HeapId, after_decrease: bool) -> Plan {
        match self.rec(h).policy {
            Policy::Amortized => Plan::Drain,
            Policy::WorstCaseLedger => Plan::Ledger,
            Policy::WorstCaseSimple => Plan::Simple {
                lc_steps: if after_decrease { 2 } else { 0 },
            },
        }
    }

    /// Strict `(key, uid)` comparison; counts one key comparison.
    pub(crate) fn less(&mut self, a: NodeId, b: NodeId) -> bool {
        self.counters.comparisons += 1;
        let (x, y) = (self.n(a), self.n(b));
        (x.key, x.uid) < (y.key, y.uid)
    }

    pub(crate) fn is_implicit(&self, x: NodeId) -> bool {
        self.variant == Variant::Meld && self.rec(self.n(x).owner).size < 0
    }

    pub(crate) fn is_deferred(&self, x: NodeId) -> bool {
        self.is_implicit(x) || self.n(x).kind == Kind::Deferred
    }

    pub(crate) fn is_rank_child(&self, x: NodeId) -> bool {
        let n = self.n(x);
        n.parent.is_some() && n.kind == Kind::RankChild && !self.is_implicit(x)
    }

    /// Heap-tree root or solid nonrank child.
    pub(crate) fn is_rank_root(&self, x: NodeId) -> bool {
        let n = self.n(x);
        n.parent.is_none() || (n.kind == Kind::NonrankChild && !self.is_implicit(x))
    }

    // ---- potential bookkeeping ----

    pub(crate) fn lc_weight(&self, x: NodeId) -> i64 {
        let n = self.n(x);
        match n.lc_entries {
            0 => 0,
            e if n.tag == Tag::L && n.loss >= 2 => (e - 1 + n.loss) as i64,
            e => e as i64,
        }
    }

    pub(crate) fn set_tag_raw(&mut self, h: HeapId, x: NodeId, t: Tag) {
        let w0 = self.lc_weight(x);
        self.nm(x).tag = t;
        let dw = self.lc_weight(x) - w0;
        self.rec_mut(h).phi[2] += self.weights.cache[2] * dw;
    }

    pub(crate) fn set_loss_raw(&mut self, h: HeapId, x: NodeId, loss: u32) {
        let w0 = self.lc_weight(x);
        self.nm(x).loss = loss;
        let dw = self.lc_weight(x) - w0;
        self.rec_mut(h).phi[2] += self.weights.cache[2] * dw;
    }

    pub(crate) fn cache_push(&mut self, h: HeapId, t: Tag, x: NodeId) {
        let i = t.slot();
        self.counters.nontree_writes += 1;
        if t == Tag::L {
            let w0 = self.lc_weight(x);
            self.nm(x).lc_entries += 1;
            let dw = self.lc_weight(x) - w0;
            self.rec_mut(h).phi[2] += self.weights.cache[2] * dw;
        } else {
            let w = self.weights.cache[i];
            self.rec_mut(h).phi[i] += w;
        }
        self.rec_mut(h).caches[i].push(x);
    }

    pub(crate) fn cache_pop(&mut self, h: HeapId, t: Tag) -> Option<NodeId> {
        let i = t.slot();
        let x = self.rec_mut(h).caches[i].pop()?;
        if t == Tag::L {
            let w0 = self.lc_weight(x);
            self.nm(x).lc_entries -= 1;
            let dw = self.lc_weight(x) - w0;
            self.rec_mut(h).phi[2] += self.weights.cache[2] * dw;
        } else {
            let w = self.weights.cache[i];
            self.rec_mut(h).phi[i] -= w;
        }
        Some(x)
    }

    pub(crate) fn reg_get(&self, h: HeapId, t: Tag, rank: u32) -> Option<NodeId> {
        self.rec(h).registries[t.slot()].get(rank)
    }

    pub(crate) fn reg_place(&mut self, h: HeapId, t: Tag, rank: u32, x: NodeId) {
        let i = t.slot();
        self.counters.nontree_writes += 1;
        let w = self.weights.registry[i];
        let r = self.rec_mut(h);
        let old = r.registries[i].set(rank, Some(x));
        debug_assert!(old.is_none());
        r.phi[i] += w;
    }

    pub(crate) fn reg_take(&mut self, h: HeapId, t: Tag, rank: u32) -> Option<NodeId> {
        let i = t.slot();
        self.counters.nontree_writes += 1;
        let w = self.weights.registry[i];
        let r = self.rec_mut(h);
        let old = r.registries[i].take(rank);
        if old.is_some() {
            r.phi[i] -= w;
        }
        old
    }

    /// Clears the registry slot referencing `x` under its current tag and
    /// rank. Returns whether it was there; when it was not and the tag is
    /// not `N`, `x` is known to sit in the cache of its tag.
    pub(crate) fn unplace(&mut self, h: HeapId, x: NodeId) -> bool {
        let (t, r) = (self.n(x).tag, self.n(x).rank);
        if t == Tag::N || self.reg_get(h, t, r) != Some(x) {
            return false;
        }
        self.reg_take(h, t, r);
        true
    }

    // ---- instrumentation ----

    fn begin_op(&mut self, h: HeapId, method: Method) {
        self.counters.calls[method as usize] += 1;
        let phi = self.rec(h).phi;
        self.rec_mut(h).ledger_start = phi;
        self.op = Some(OpState {
            method,
            heap: h,
            phi_start: phi,
            reduction_phi: [0; 3],
            reduction_writes: 0,
            steps: self.counters.reduction_steps,
            comparisons: self.counters.comparisons,
            writes: self.counters.nontree_writes,
            n_before: self.rec(h).size,
        });
    }

    fn end_op(&mut self) {
        let Some(op) = self.op.take() else { return };
        let phi = self.rec(op.heap).phi;
        let mut injected = [0; 3];
        for i in 0..3 {
            injected[i] = phi[i] - op.phi_start[i] - op.reduction_phi[i];
        }
        self.last_op = Some(OpReport {
            method: op.method,
            heap: op.heap,
            reduction_steps: self.counters.reduction_steps - op.steps,
            comparisons: self.counters.comparisons - op.comparisons,
            nontree_writes: self.counters.nontree_writes - op.writes,
            injected_writes: self.counters.nontree_writes - op.writes - op.reduction_writes,
            phi_before: op.phi_start,
            phi_after: phi,
            injected,
            n_before: op.n_before.max(0) as u64,
            n_after: self.rec(op.heap).size.max(0) as u64,
        });
    }

    pub(crate) fn note_reduction(&mut self, delta: [i64; 3], writes: u64) {
        if let Some(op) = &mut self.op {
            op.reduction_writes += writes;
            for (acc, d) in op.reduction_phi.iter_mut().zip(delta) {
                *acc += d;
            }
        }
    }

    pub(crate) fn mark(&self, h: HeapId) -> BlockMark {
        BlockMark {
            heap: h,
            phi: self.rec(h).phi,
            writes: self.counters.nontree_writes,
        }
    }

    pub(crate) fn block_done(&mut self, mark: BlockMark, kind: BlockKind) {
        if !self.instr.block_log && !self.instr.debug_phi {
            return;
        }
        let phi = self.rec(mark.heap).phi;
        if self.instr.block_log {
            let n = self.rec(mark.heap).size.max(0) as u64;
            self.block_log.push(BlockRecord {
                kind,
                d_phi: [
                    phi[0] - mark.phi[0],
                    phi[1] - mark.phi[1],
                    phi[2] - mark.phi[2],
                ],
                writes: self.counters.nontree_writes - mark.writes,
                n,
            });
        }
        if self.instr.debug_phi {
            let exact = self.compute_phi(mark.heap);
            let exact = [exact.phi_g, exact.phi_a, exact.phi_l];
            assert_eq!(
                phi, exact,
                "tracked potential diverged from recomputed value after block {kind:?}"
            );
        }
    }
}

/// A single standalone heap: convenience wrapper over a one-record pool.
#[derive(Clone, Debug)]
pub struct Heap<K> {
    pool: HeapPool<K>,
    id: HeapId,
}

impl<K: Ord + Copy> Heap<K> {
    pub fn new(policy: Policy) -> Self {
        let mut pool = HeapPool::new(Variant::NoMeld);
        let id = pool.make_heap(policy);
        Heap { pool, id }
    }

    pub fn push(&mut self, key: K) -> NodeId {
        self.pool.insert(self.id, key).expect("live heap")
    }

    pub fn peek(&self) -> Option<K> {
        self.pool.peek_min(self.id).expect("live heap").map(|(k, _)| k)
    }

    pub fn pop(&mut self) -> Option<K> {
        match self.pool.delete_min(self.id) {
            Ok((k, _)) => Some(k),
            Err(HeapError::Empty) => None,
            Err(e) => unreachable!("{e}"),
        }
    }

    pub fn decrease_key(&mut self, x: NodeId, key: K) -> Result<(), HeapError> {
        self.pool.decrease_key(self.id, x, key)
    }

    pub fn len(&self) -> usize {
        self.pool.len(self.id).expect("live heap")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pool(&self) -> &HeapPool<K> {
        &self.pool
    }

    pub fn id(&self) -> HeapId {
        self.id
    }
}

#[cfg(test)]
mod tests;
