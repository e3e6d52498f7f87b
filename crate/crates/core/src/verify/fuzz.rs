//! Differential fuzzing of the heap against the sorted-multiset oracle.

use super::bounds::BoundFns;
use super::check::Strictness;
use super::oracle::OracleHeap;
use crate::accounting::{
    assert_table_bounds, check_block, BoundViolation, Instrumentation, Method, OpCounters,
    WriteWarning,
};
use crate::heap::{Policy, Variant};
use crate::node::{HeapId, NodeId};
use crate::trace::{Outcome, TraceOp, TraceRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// Relative operation frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpWeights {
    pub insert: u32,
    pub delete_min: u32,
    pub decrease_key: u32,
    /// Ignored without meld support.
    pub meld: u32,
    pub find_min: u32,
}

impl Default for OpWeights {
    fn default() -> Self {
        OpWeights {
            insert: 40,
            delete_min: 25,
            decrease_key: 30,
            meld: 5,
            find_min: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub ops: u64,
    pub variant: Variant,
    pub policy: Policy,
    /// Full structure check period in ops; 0 disables it.
    pub check_every: u64,
    pub weights: OpWeights,
    /// Recompute Φ exhaustively around every reduction step.
    pub check_steps: bool,
    /// Check every private block against its table row.
    pub check_blocks: bool,
}

impl FuzzConfig {
    pub fn new(seed: u64, ops: u64, variant: Variant, policy: Policy) -> Self {
        FuzzConfig {
            seed,
            ops,
            variant,
            policy,
            check_every: 0,
            weights: OpWeights::default(),
            check_steps: true,
            check_blocks: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MethodStats {
    pub calls: u64,
    pub steps: u64,
    pub max_steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzSummary {
    pub seed: u64,
    pub ops: u64,
    pub counters: OpCounters,
    /// Indexed by `Method as usize`.
    pub methods: [MethodStats; 5],
    pub structure_checks: u64,
    /// Method or block rows whose advisory write ceiling was exceeded.
    pub write_warnings: u64,
    /// Warning count per table row.
    pub write_warning_rows: BTreeMap<String, u64>,
    pub blocks_checked: u64,
    /// Hard table-bound violations per `row/quantity`. They are recorded
    /// rather than aborting the run so the remaining checks still cover
    /// the whole campaign.
    pub bound_violations: BTreeMap<String, u64>,
    /// First violation seen, with its op index and report.
    pub first_bound_violation: Option<String>,
    /// Reduction steps and potential allowance summed over methods
    /// (meaningful for the amortized policy).
    pub amortized_steps: u64,
    pub amortized_allowance: u64,
    pub max_size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzFailure {
    pub seed: u64,
    pub op_index: u64,
    pub message: String,
    /// Ops up to and including the failing one.
    pub trace: Vec<TraceOp>,
}

impl fmt::Display for FuzzFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed {} op {}: {}", self.seed, self.op_index, self.message)
    }
}

impl std::error::Error for FuzzFailure {}

struct Driver {
    cfg: FuzzConfig,
    rng: ChaCha8Rng,
    run: TraceRunner,
    oracle: OracleHeap<i64>,
    live: Vec<usize>,
    pos: Vec<usize>,
    trace: Vec<TraceOp>,
    bounds: BoundFns,
    sum: FuzzSummary,
}

const NONE: usize = usize::MAX;

impl Driver {
    fn new(cfg: &FuzzConfig) -> Self {
        let mut run = TraceRunner::new(cfg.variant, cfg.policy);
        run.pool.set_instrumentation(Instrumentation {
            check_steps: cfg.check_steps,
            block_log: cfg.check_blocks,
            ..run.pool.instrumentation()
        });
        let mut oracle = OracleHeap::new(cfg.variant == Variant::Meld);
        oracle.make_heap();
        Driver {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            run,
            oracle,
            live: Vec::new(),
            pos: Vec::new(),
            trace: Vec::new(),
            bounds: BoundFns::new(cfg.variant),
            sum: FuzzSummary {
                seed: cfg.seed,
                ops: 0,
                counters: OpCounters::default(),
                methods: Default::default(),
                structure_checks: 0,
                write_warnings: 0,
                write_warning_rows: BTreeMap::new(),
                blocks_checked: 0,
                bound_violations: BTreeMap::new(),
                first_bound_violation: None,
                amortized_steps: 0,
                amortized_allowance: 0,
                max_size: 0,
            },
            cfg: cfg.clone(),
        }
    }

    fn pick_ref(&mut self) -> usize {
        let refs = self.run.live_refs();
        refs[self.rng.gen_range(0..refs.len())]
    }

    fn heap_arg(r: usize) -> Option<usize> {
        (r != 0).then_some(r)
    }

    fn gen_op(&mut self) -> TraceOp {
        let w = self.cfg.weights;
        let meld_w = if self.cfg.variant == Variant::Meld { w.meld } else { 0 };
        let total = w.insert + w.delete_min + w.decrease_key + meld_w + w.find_min;
        let mut x = self.rng.gen_range(0..total.max(1));
        let mut kind = 0;
        for (i, wi) in [w.insert, w.delete_min, w.decrease_key, meld_w, w.find_min]
            .into_iter()
            .enumerate()
        {
            if x < wi {
                kind = i;
                break;
            }
            x -= wi;
        }
        let insert = |d: &mut Self| {
            let r = d.pick_ref();
            TraceOp::Insert {
                key: d.rng.gen(),
                heap: Self::heap_arg(r),
            }
        };
        match kind {
            1 => {
                let refs: Vec<usize> = self
                    .run
                    .live_refs()
                    .into_iter()
                    .filter(|&r| self.run.resolve(r).is_ok_and(|h| self.run.pool.len(h) != Ok(0)))
                    .collect();
                if refs.is_empty() {
                    return insert(self);
                }
                let r = refs[self.rng.gen_range(0..refs.len())];
                TraceOp::DeleteMin {
                    heap: Self::heap_arg(r),
                }
            }
            2 => {
                if self.live.is_empty() {
                    return insert(self);
                }
                let handle = self.live[self.rng.gen_range(0..self.live.len())];
                let cur = self.run.pool.key(NodeId(handle as u32)).unwrap();
                let d: i64 = self.rng.gen_range(1..=1i64 << 32);
                TraceOp::DecreaseKey {
                    handle,
                    key: cur.saturating_sub(d),
                }
            }
            3 => {
                let refs = self.run.live_refs();
                if refs.len() < 2 || (refs.len() < 8 && self.rng.gen_bool(0.5)) {
                    return TraceOp::NewHeap;
                }
                let i = self.rng.gen_range(0..refs.len());
                let mut j = self.rng.gen_range(0..refs.len() - 1);
                if j >= i {
                    j += 1;
                }
                TraceOp::Meld {
                    a: refs[i],
                    b: refs[j],
                }
            }
            4 => TraceOp::FindMin {
                heap: Self::heap_arg(self.pick_ref()),
            },
            _ => insert(self),
        }
    }

    fn fail(&self, i: u64, msg: String) -> FuzzFailure {
        FuzzFailure {
            seed: self.cfg.seed,
            op_index: i,
            message: msg,
            trace: self.trace.clone(),
        }
    }

    fn track_insert(&mut self, handle: usize) {
        if self.pos.len() <= handle {
            self.pos.resize(handle + 1, NONE);
        }
        self.pos[handle] = self.live.len();
        self.live.push(handle);
    }

    fn track_delete(&mut self, handle: usize) {
        let p = self.pos[handle];
        self.pos[handle] = NONE;
        self.live.swap_remove(p);
        if p < self.live.len() {
            let moved = self.live[p];
            self.pos[moved] = p;
        }
    }

    /// Applies op `i` to heap and oracle and compares results.
    fn step(&mut self, i: u64, op: TraceOp) -> Result<Option<HeapId>, FuzzFailure> {
        let heap_of = |d: &Self, h: Option<usize>| d.run.resolve(h.unwrap_or(0)).ok();
        let (oracle_res, touched): (Result<Outcome, String>, Option<HeapId>) = match op {
            TraceOp::Insert { key, heap } => {
                let h = heap_of(self, heap).unwrap();
                let r = self.oracle.insert(h, key).map(Outcome::Inserted);
                (r.map_err(|e| e.to_string()), Some(h))
            }
            TraceOp::DeleteMin { heap } => {
                let h = heap_of(self, heap).unwrap();
                let r = self.oracle.delete_min(h).map(|(k, u)| Outcome::Deleted(k, u));
                (r.map_err(|e| e.to_string()), Some(h))
            }
            TraceOp::FindMin { heap } => {
                let h = heap_of(self, heap).unwrap();
                let r = self.oracle.find_min(h).map(Outcome::Min);
                (r.map_err(|e| e.to_string()), Some(h))
            }
            TraceOp::DecreaseKey { handle, key } => {
                let (_, h) = self.run.handle(handle).map_err(|e| self.fail(i, e.to_string()))?;
                let r = self
                    .oracle
                    .decrease_key(h, NodeId(handle as u32), key)
                    .map(|_| Outcome::Decreased);
                (r.map_err(|e| e.to_string()), Some(h))
            }
            TraceOp::NewHeap => {
                let h = self.oracle.make_heap();
                (Ok(Outcome::NewHeap(h)), None)
            }
            TraceOp::Meld { a, b } => {
                let ha = self.run.resolve(a).unwrap();
                let hb = self.run.resolve(b).unwrap();
                let r = self.oracle.meld(ha, hb).map(Outcome::Melded);
                let t = r.as_ref().ok().and_then(|o| match o {
                    Outcome::Melded(h) => Some(*h),
                    _ => None,
                });
                (r.map_err(|e| e.to_string()), t)
            }
        };
        let heap_res = self.run.apply(op).map_err(|e| e.to_string());
        if heap_res != oracle_res {
            return Err(self.fail(
                i,
                format!("divergence on `{op}`: heap {heap_res:?}, oracle {oracle_res:?}"),
            ));
        }
        match heap_res {
            Ok(Outcome::Inserted(x)) => self.track_insert(x.index()),
            Ok(Outcome::Deleted(_, uid)) => self.track_delete(uid as usize),
            _ => {}
        }
        Ok(touched)
    }

    fn after(&mut self, i: u64, touched: Option<HeapId>) -> Result<(), FuzzFailure> {
        let pool = &mut self.run.pool;
        if let Some(h) = touched {
            let got = pool.peek_min(h).map_err(|e| self.fail(i, e.to_string()))?;
            let want = self.oracle.find_min(h).unwrap();
            if got != want {
                return Err(self.fail(i, format!("minimum {got:?}, oracle {want:?}")));
            }
            let n = self.run.pool.len(h).unwrap() as u64;
            self.sum.max_size = self.sum.max_size.max(n);
            if self.cfg.policy == Policy::Amortized && !self.run.pool.caches_empty(h) {
                return Err(self.fail(i, "caches not empty after an amortized method".into()));
            }
        }
        let pool = &mut self.run.pool;
        if let Some(v) = pool.step_violations().first() {
            let v = *v;
            return Err(self.fail(i, format!("reduction step did not decrease potential: {v:?}")));
        }
        if let Some(rep) = pool.take_last_op() {
            let steps = rep.reduction_steps;
            let ms = &mut self.sum.methods[rep.method as usize];
            ms.calls += 1;
            ms.steps += steps;
            ms.max_steps = ms.max_steps.max(steps);
            let n = rep.n_before;
            if rep.method == Method::DeleteMin {
                if self.cfg.policy != Policy::WorstCaseSimple
                    && steps > self.bounds.delete_min_steps(n)
                {
                    return Err(self.fail(
                        i,
                        format!("delete-min took {steps} reduction steps, bound {}", self.bounds.delete_min_steps(n)),
                    ));
                }
                let cmp_bound = 30.0 * (n.max(2) as f64).log2() + 300.0;
                if rep.comparisons as f64 > cmp_bound {
                    return Err(self.fail(
                        i,
                        format!("delete-min made {} comparisons, bound {cmp_bound:.0}", rep.comparisons),
                    ));
                }
            } else if self.cfg.policy == Policy::WorstCaseLedger
                && steps > self.bounds.method_steps()
            {
                return Err(self.fail(
                    i,
                    format!("{:?} took {steps} reduction steps, bound {}", rep.method, self.bounds.method_steps()),
                ));
            }
            let (viol, warn) = assert_table_bounds(self.cfg.variant, &rep);
            self.violations(i, &viol, || format!("{rep:?}"));
            self.warn(warn);
            self.sum.amortized_steps += steps;
            self.sum.amortized_allowance += self.bounds.amortized_allowance(rep.method, n);
            if self.cfg.policy == Policy::Amortized
                && self.cfg.variant == Variant::NoMeld
                && self.sum.amortized_steps > self.sum.amortized_allowance
            {
                return Err(self.fail(
                    i,
                    format!(
                        "amortized total {} reduction steps exceeds allowance {}",
                        self.sum.amortized_steps, self.sum.amortized_allowance
                    ),
                ));
            }
        }
        if self.cfg.check_blocks {
            for b in self.run.pool.take_block_log() {
                self.sum.blocks_checked += 1;
                let (viol, warn) = check_block(self.cfg.variant, &b);
                self.violations(i, &viol, || format!("{b:?}"));
                self.warn(warn);
            }
        }
        if self.cfg.check_every > 0 && (i + 1) % self.cfg.check_every == 0 {
            self.full_check(i)?;
        }
        Ok(())
    }

    fn violations(&mut self, i: u64, viol: &[BoundViolation], ctx: impl Fn() -> String) {
        for v in viol {
            *self.sum.bound_violations.entry(format!("{}/{}", v.row, v.quantity)).or_default() += 1;
            if self.sum.first_bound_violation.is_none() {
                self.sum.first_bound_violation = Some(format!(
                    "op {i}: {} {} observed {} bound {} in {}",
                    v.row,
                    v.quantity,
                    v.observed,
                    v.bound,
                    ctx()
                ));
            }
        }
    }

    fn warn(&mut self, w: Option<WriteWarning>) {
        if let Some(w) = w {
            self.sum.write_warnings += 1;
            *self.sum.write_warning_rows.entry(w.row).or_default() += 1;
        }
    }

    fn full_check(&mut self, i: u64) -> Result<(), FuzzFailure> {
        self.sum.structure_checks += 1;
        let strict = if self.cfg.policy == Policy::Amortized {
            Strictness::AfterAmortized
        } else {
            Strictness::AnyTime
        };
        for r in self.run.live_refs() {
            let h = self.run.resolve(r).unwrap();
            let rep = self.run.pool.check_structure(h, strict);
            if !rep.is_ok() {
                return Err(self.fail(i, format!("structure check of {h:?} failed:\n{rep}")));
            }
        }
        let rep = self.run.pool.check_refcounts();
        if !rep.is_ok() {
            return Err(self.fail(i, format!("refcount check failed:\n{rep}")));
        }
        Ok(())
    }
}

/// Runs `cfg.ops` random operations on heap and oracle in lockstep.
pub fn fuzz_run(cfg: &FuzzConfig) -> Result<FuzzSummary, FuzzFailure> {
    let mut d = Driver::new(cfg);
    for i in 0..cfg.ops {
        let op = d.gen_op();
        d.trace.push(op);
        let touched = d.step(i, op)?;
        d.after(i, touched)?;
    }
    if cfg.check_every > 0 {
        d.full_check(cfg.ops.saturating_sub(1))?;
    }
    d.sum.ops = cfg.ops;
    d.sum.counters = d.run.pool.counters().clone();
    Ok(d.sum)
}

/// Re-runs `cfg` up to and including op `op_index`.
pub fn replay(cfg: &FuzzConfig, op_index: u64) -> Result<FuzzSummary, FuzzFailure> {
    let mut c = cfg.clone();
    c.ops = op_index + 1;
    fuzz_run(&c)
}
