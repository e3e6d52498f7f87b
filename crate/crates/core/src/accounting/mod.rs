//! Potential accounting: exact Φ recomputation, tracked ledgers, counters
//! and the bound tables used by the tests.

mod tables;

pub use tables::{
    assert_table_bounds, block_bound, check_block, method_bound, BlockBound, BoundViolation,
    MethodBound, WriteWarning,
};

use crate::heap::{HeapPool, Variant};
use crate::node::{HeapId, NodeId, Tag};
use std::collections::HashSet;

/// Registry and cache weights, indexed G, A, L.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhiWeights {
    pub registry: [i64; 3],
    pub cache: [i64; 3],
}

impl PhiWeights {
    pub fn for_variant(v: Variant) -> Self {
        match v {
            Variant::Meld => PhiWeights {
                registry: [3, 5, 10],
                cache: [4, 6, 11],
            },
            Variant::NoMeld => PhiWeights {
                registry: [0, 1, 3],
                cache: [0, 2, 4],
            },
        }
    }
}

/// Exact registry and cache populations of one heap record.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhiSnapshot {
    pub gr: u64,
    pub gc: u64,
    pub ar: u64,
    pub ac: u64,
    pub lr: u64,
    /// Loss-cache entries; the first entry of a node that currently is a
    /// multi-loss node weighs its loss, every other entry weighs one.
    pub lc_weighted: u64,
    pub phi_g: i64,
    pub phi_a: i64,
    pub phi_l: i64,
}

impl PhiSnapshot {
    pub fn total(&self) -> i64 {
        self.phi_g + self.phi_a + self.phi_l
    }

    /// Flat `(name, value)` list for metrics export.
    pub fn fields(&self) -> [(&'static str, i64); 10] {
        [
            ("gr", self.gr as i64),
            ("gc", self.gc as i64),
            ("ar", self.ar as i64),
            ("ac", self.ac as i64),
            ("lr", self.lr as i64),
            ("lc_weighted", self.lc_weighted as i64),
            ("phi_g", self.phi_g),
            ("phi_a", self.phi_a),
            ("phi_l", self.phi_l),
            ("phi", self.total()),
        ]
    }
}

/// Change of each potential coordinate since public-method entry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PotentialLedger {
    pub d_phi_g: i64,
    pub d_phi_a: i64,
    pub d_phi_l: i64,
}

/// Parent situation in loss reductions: where the parent of the promoted
/// node (or of the loser of a loss match) sits before the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParentCase {
    GInGr,
    GInGc,
    AInAr,
    AInAc,
    LInLr,
    LInLc,
    N,
    /// Meld only: parent of type `N` whose degree reduction restructured
    /// three deferred children.
    NDeferred,
}

impl ParentCase {
    pub const ALL: [ParentCase; 8] = [
        ParentCase::GInGr,
        ParentCase::GInGc,
        ParentCase::AInAr,
        ParentCase::AInAc,
        ParentCase::LInLr,
        ParentCase::LInLc,
        ParentCase::N,
        ParentCase::NDeferred,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            ParentCase::GInGr => "g_in_gr",
            ParentCase::GInGc => "g_in_gc",
            ParentCase::AInAr => "a_in_ar",
            ParentCase::AInAc => "a_in_ac",
            ParentCase::LInLr => "l_in_lr",
            ParentCase::LInLc => "l_in_lc",
            ParentCase::N => "n",
            ParentCase::NDeferred => "n_deferred",
        }
    }
}

/// Outcome of one cache reduction step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionCase {
    /// Popped entry no longer has the cache's type.
    AcStale,
    /// Popped node already occupies its registry slot.
    AcPresent,
    AcPlaced,
    AcMatched,
    /// Meld only: the match winner's degree reduction restructured three
    /// deferred children.
    AcMatchedDeferred,
    GcStale,
    GcPresent,
    GcPlaced,
    GcMatched,
    LcStale,
    LcPresent,
    LcPlaced,
    /// Multi-loss node promoted to a rank root.
    LcMulti(ParentCase),
    /// Two single-loss nodes of equal rank linked.
    LcMatched(ParentCase),
}

impl ReductionCase {
    pub const COUNT: usize = 12 + 2 * ParentCase::ALL.len();

    pub fn index(self) -> usize {
        use ReductionCase::*;
        match self {
            AcStale => 0,
            AcPresent => 1,
            AcPlaced => 2,
            AcMatched => 3,
            AcMatchedDeferred => 4,
            GcStale => 5,
            GcPresent => 6,
            GcPlaced => 7,
            GcMatched => 8,
            LcStale => 9,
            LcPresent => 10,
            LcPlaced => 11,
            LcMulti(p) => 12 + p.index(),
            LcMatched(p) => 12 + ParentCase::ALL.len() + p.index(),
        }
    }

    pub fn all() -> Vec<ReductionCase> {
        use ReductionCase::*;
        let mut v = vec![
            AcStale, AcPresent, AcPlaced, AcMatched, AcMatchedDeferred, GcStale, GcPresent,
            GcPlaced, GcMatched, LcStale, LcPresent, LcPlaced,
        ];
        v.extend(ParentCase::ALL.iter().map(|&p| LcMulti(p)));
        v.extend(ParentCase::ALL.iter().map(|&p| LcMatched(p)));
        v
    }

    pub fn name(self) -> String {
        use ReductionCase::*;
        match self {
            AcStale => "ac_stale".into(),
            AcPresent => "ac_present".into(),
            AcPlaced => "ac_placed".into(),
            AcMatched => "ac_matched".into(),
            AcMatchedDeferred => "ac_matched_deferred".into(),
            GcStale => "gc_stale".into(),
            GcPresent => "gc_present".into(),
            GcPlaced => "gc_placed".into(),
            GcMatched => "gc_matched".into(),
            LcStale => "lc_stale".into(),
            LcPresent => "lc_present".into(),
            LcPlaced => "lc_placed".into(),
            LcMulti(p) => format!("lc_multi_parent_{}", p.name()),
            LcMatched(p) => format!("lc_matched_parent_{}", p.name()),
        }
    }

    /// The reduction rows a variant's analysis table lists; each must be
    /// exercised by the fuzz campaign.
    pub fn table_rows(v: Variant) -> Vec<ReductionCase> {
        use ParentCase::*;
        use ReductionCase::*;
        match v {
            Variant::NoMeld => {
                let parents = [AInAr, AInAc, LInLr, LInLc, N];
                let mut rows = vec![AcStale, AcPlaced, AcMatched, LcStale];
                rows.extend(parents.iter().map(|&p| LcMulti(p)));
                rows.push(LcPlaced);
                rows.extend(parents.iter().map(|&p| LcMatched(p)));
                rows
            }
            Variant::Meld => {
                let mut rows = vec![
                    AcStale,
                    AcPlaced,
                    AcMatched,
                    AcMatchedDeferred,
                    GcStale,
                    GcPlaced,
                    GcMatched,
                    LcStale,
                ];
                rows.extend(ParentCase::ALL.iter().map(|&p| LcMulti(p)));
                rows.push(LcPlaced);
                rows.extend(ParentCase::ALL[..7].iter().map(|&p| LcMatched(p)));
                rows
            }
        }
    }
}

/// Cumulative operation counters of a pool.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpCounters {
    pub comparisons: u64,
    pub links: u64,
    pub reduction_steps: u64,
    /// Indexed by [`ReductionCase::index`].
    pub cases: [u64; ReductionCase::COUNT],
    pub nontree_writes: u64,
    pub degree_reduction_steps: u64,
    pub conversions: u64,
    /// Public method calls, indexed by `Method as usize`.
    pub calls: [u64; 5],
}

impl Default for OpCounters {
    fn default() -> Self {
        OpCounters {
            comparisons: 0,
            links: 0,
            reduction_steps: 0,
            cases: [0; ReductionCase::COUNT],
            nontree_writes: 0,
            degree_reduction_steps: 0,
            conversions: 0,
            calls: [0; 5],
        }
    }
}

impl OpCounters {
    pub fn case(&self, c: ReductionCase) -> u64 {
        self.cases[c.index()]
    }

    pub fn merge(&mut self, o: &OpCounters) {
        self.comparisons += o.comparisons;
        self.links += o.links;
        self.reduction_steps += o.reduction_steps;
        for (a, b) in self.cases.iter_mut().zip(o.cases.iter()) {
            *a += b;
        }
        self.nontree_writes += o.nontree_writes;
        self.degree_reduction_steps += o.degree_reduction_steps;
        self.conversions += o.conversions;
        for (a, b) in self.calls.iter_mut().zip(o.calls.iter()) {
            *a += b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Insert,
    FindMin,
    DeleteMin,
    DecreaseKey,
    Meld,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Insert,
        Method::FindMin,
        Method::DeleteMin,
        Method::DecreaseKey,
        Method::Meld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Insert => "insert",
            Method::FindMin => "find_min",
            Method::DeleteMin => "delete_min",
            Method::DecreaseKey => "decrease_key",
            Method::Meld => "meld",
        }
    }
}

/// Summary of one public method call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpReport {
    pub method: Method,
    pub heap: HeapId,
    pub reduction_steps: u64,
    pub comparisons: u64,
    pub nontree_writes: u64,
    /// Writes outside reduction steps.
    pub injected_writes: u64,
    pub phi_before: [i64; 3],
    pub phi_after: [i64; 3],
    /// Potential change not caused by reduction steps, per coordinate.
    pub injected: [i64; 3],
    pub n_before: u64,
    pub n_after: u64,
}

impl OpReport {
    pub fn injected_total(&self) -> i64 {
        self.injected.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    SetType(Tag),
    RankDecrement,
    AddSolidChild,
    ChildRemoval,
    /// Link of two heap-tree roots during consolidation.
    Link,
    DegreeReduction,
    HeapSizeDecrement,
}

/// Potential change and write count of one private block execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRecord {
    pub kind: BlockKind,
    pub d_phi: [i64; 3],
    pub writes: u64,
    pub n: u64,
}

/// A reduction step that did not decrease Φ by at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub case: ReductionCase,
    pub before: i64,
    pub after: i64,
    /// Measured with the exhaustive recomputation rather than the tracked
    /// coordinates.
    pub exhaustive: bool,
}

/// Optional instrumentation; all off by default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Instrumentation {
    /// Recompute Φ exhaustively around every reduction step.
    pub check_steps: bool,
    /// Cross-check tracked Φ against the recomputation after every private
    /// block; a mismatch panics naming the block.
    pub debug_phi: bool,
    /// Record every private block in the block log.
    pub block_log: bool,
}

impl Instrumentation {
    /// Defaults, with `debug_phi` switched on by `HEAP_DEBUG_PHI=1`.
    pub fn from_env() -> Self {
        Instrumentation {
            debug_phi: std::env::var("HEAP_DEBUG_PHI").is_ok_and(|v| v == "1"),
            ..Default::default()
        }
    }

    pub fn all() -> Self {
        Instrumentation {
            check_steps: true,
            debug_phi: true,
            block_log: true,
        }
    }
}

impl<K: Ord + Copy> HeapPool<K> {
    /// Exhaustive scan of the registries and caches of `h`.
    pub fn compute_phi(&self, h: HeapId) -> PhiSnapshot {
        let r = self.rec(h);
        let count = |t: Tag| r.registries[t.slot()].iter().count() as u64;
        let mut seen: HashSet<NodeId> = HashSet::new();
        let mut lc_weighted = 0u64;
        for x in r.caches[Tag::L.slot()].iter() {
            let n = self.n(x);
            lc_weighted += if n.tag == Tag::L && n.loss >= 2 && seen.insert(x) {
                n.loss as u64
            } else {
                1
            };
        }
        let mut s = PhiSnapshot {
            gr: count(Tag::G),
            gc: r.caches[Tag::G.slot()].len() as u64,
            ar: count(Tag::A),
            ac: r.caches[Tag::A.slot()].len() as u64,
            lr: count(Tag::L),
            lc_weighted,
            ..Default::default()
        };
        let w = self.weights;
        s.phi_g = w.registry[0] * s.gr as i64 + w.cache[0] * s.gc as i64;
        s.phi_a = w.registry[1] * s.ar as i64 + w.cache[1] * s.ac as i64;
        s.phi_l = w.registry[2] * s.lr as i64 + w.cache[2] * s.lc_weighted as i64;
        s
    }
}
