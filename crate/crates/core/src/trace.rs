//! Line-oriented trace format and an executor over a [`HeapPool`].
//!
//! ```text
//! # comment
//! insert <key> [heap]
//! deletemin [heap]
//! findmin [heap]
//! decreasekey <handle> <key>
//! newheap
//! meld <heap> <heap>
//! ```
//!
//! Heap 0 exists from the start; each `newheap` adds the next heap
//! reference. Handles number inserts from 0. After a meld both references
//! name the surviving heap.

use crate::error::HeapError;
use crate::heap::{HeapPool, Policy, Variant};
use crate::node::{HeapId, NodeId};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOp {
    Insert { key: i64, heap: Option<usize> },
    DeleteMin { heap: Option<usize> },
    FindMin { heap: Option<usize> },
    DecreaseKey { handle: usize, key: i64 },
    NewHeap,
    Meld { a: usize, b: usize },
}

impl fmt::Display for TraceOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |h: &Option<usize>| h.map(|h| format!(" {h}")).unwrap_or_default();
        match self {
            TraceOp::Insert { key, heap } => write!(f, "insert {key}{}", opt(heap)),
            TraceOp::DeleteMin { heap } => write!(f, "deletemin{}", opt(heap)),
            TraceOp::FindMin { heap } => write!(f, "findmin{}", opt(heap)),
            TraceOp::DecreaseKey { handle, key } => write!(f, "decreasekey {handle} {key}"),
            TraceOp::NewHeap => write!(f, "newheap"),
            TraceOp::Meld { a, b } => write!(f, "meld {a} {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceError {
    /// 1-based line number; 0 when not tied to a line.
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for TraceError {}

fn num<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T, TraceError> {
    let tok = tok.ok_or_else(|| TraceError {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| TraceError {
        line,
        msg: format!("invalid {what} {tok:?}"),
    })
}

/// Parses a trace; returns `(line number, op)` pairs.
pub fn parse_trace(text: &str) -> Result<Vec<(usize, TraceOp)>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let cmd = it.next().unwrap();
        let heap_opt = |t: Option<&str>| -> Result<Option<usize>, TraceError> {
            t.map(|t| num(Some(t), "heap reference", line)).transpose()
        };
        let op = match cmd {
            "insert" => {
                let key = num(it.next(), "key", line)?;
                TraceOp::Insert {
                    key,
                    heap: heap_opt(it.next())?,
                }
            }
            "deletemin" => TraceOp::DeleteMin {
                heap: heap_opt(it.next())?,
            },
            "findmin" => TraceOp::FindMin {
                heap: heap_opt(it.next())?,
            },
            "decreasekey" => TraceOp::DecreaseKey {
                handle: num(it.next(), "handle", line)?,
                key: num(it.next(), "key", line)?,
            },
            "newheap" => TraceOp::NewHeap,
            "meld" => TraceOp::Meld {
                a: num(it.next(), "heap reference", line)?,
                b: num(it.next(), "heap reference", line)?,
            },
            other => {
                return Err(TraceError {
                    line,
                    msg: format!("unknown operation {other:?}"),
                })
            }
        };
        if let Some(extra) = it.next() {
            return Err(TraceError {
                line,
                msg: format!("unexpected token {extra:?}"),
            });
        }
        out.push((line, op));
    }
    Ok(out)
}

pub fn format_trace(ops: &[TraceOp]) -> String {
    let mut s = String::new();
    for op in ops {
        s.push_str(&op.to_string());
        s.push('\n');
    }
    s
}

/// Result of one executed trace op.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Inserted(NodeId),
    Deleted(i64, u64),
    Min(Option<(i64, u64)>),
    Decreased,
    NewHeap(HeapId),
    Melded(HeapId),
}

impl Outcome {
    /// Line printed for delete-min and find-min results.
    pub fn render(&self) -> Option<String> {
        match self {
            Outcome::Deleted(k, _) => Some(k.to_string()),
            Outcome::Min(Some((k, _))) => Some(k.to_string()),
            Outcome::Min(None) => Some("empty".into()),
            _ => None,
        }
    }
}

/// Failure of a single op: a dangling reference or a heap error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpError {
    Dangling(String),
    Heap(HeapError),
}

impl fmt::Display for OpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpError::Dangling(s) => f.write_str(s),
            OpError::Heap(e) => write!(f, "{e}"),
        }
    }
}

impl From<HeapError> for OpError {
    fn from(e: HeapError) -> Self {
        OpError::Heap(e)
    }
}

/// Executes trace ops against a pool while resolving heap references and
/// insert handles.
#[derive(Clone, Debug)]
pub struct TraceRunner {
    pub pool: HeapPool<i64>,
    policy: Policy,
    /// heap reference -> record
    heaps: Vec<HeapId>,
    /// union-find over heap references, merged by melds
    alias: Vec<usize>,
    /// handle -> (node, heap reference used at insert)
    handles: Vec<(NodeId, usize)>,
}

impl TraceRunner {
    pub fn new(variant: Variant, policy: Policy) -> Self {
        let mut pool = HeapPool::new(variant);
        let h0 = pool.make_heap(policy);
        TraceRunner {
            pool,
            policy,
            heaps: vec![h0],
            alias: vec![0],
            handles: Vec::new(),
        }
    }

    fn find(&self, mut r: usize) -> usize {
        while self.alias[r] != r {
            r = self.alias[r];
        }
        r
    }

    pub fn heap_refs(&self) -> usize {
        self.heaps.len()
    }

    pub fn handles(&self) -> usize {
        self.handles.len()
    }

    /// Live record currently named by heap reference `r`.
    pub fn resolve(&self, r: usize) -> Result<HeapId, OpError> {
        if r >= self.heaps.len() {
            return Err(OpError::Dangling(format!("unknown heap reference {r}")));
        }
        Ok(self.heaps[self.find(r)])
    }

    /// Node and owning heap of insert handle `i`.
    pub fn handle(&self, i: usize) -> Result<(NodeId, HeapId), OpError> {
        let &(x, r) = self
            .handles
            .get(i)
            .ok_or_else(|| OpError::Dangling(format!("unknown handle {i}")))?;
        if !self.pool.is_live(x) {
            return Err(OpError::Dangling(format!("handle {i} was deleted")));
        }
        Ok((x, self.resolve(r)?))
    }

    /// Distinct live heap references (class representatives).
    pub fn live_refs(&self) -> Vec<usize> {
        (0..self.heaps.len()).filter(|&r| self.find(r) == r).collect()
    }

    pub fn apply(&mut self, op: TraceOp) -> Result<Outcome, OpError> {
        match op {
            TraceOp::Insert { key, heap } => {
                let r = heap.unwrap_or(0);
                let h = self.resolve(r)?;
                let x = self.pool.insert(h, key)?;
                self.handles.push((x, r));
                Ok(Outcome::Inserted(x))
            }
            TraceOp::DeleteMin { heap } => {
                let h = self.resolve(heap.unwrap_or(0))?;
                let (k, u) = self.pool.delete_min(h)?;
                Ok(Outcome::Deleted(k, u))
            }
            TraceOp::FindMin { heap } => {
                let h = self.resolve(heap.unwrap_or(0))?;
                let m = self.pool.find_min(h)?;
                Ok(Outcome::Min(m.map(|x| {
                    (self.pool.key(x).unwrap(), self.pool.uid(x).unwrap())
                })))
            }
            TraceOp::DecreaseKey { handle, key } => {
                let (x, h) = self.handle(handle)?;
                self.pool.decrease_key(h, x, key)?;
                Ok(Outcome::Decreased)
            }
            TraceOp::NewHeap => {
                let h = self.pool.make_heap(self.policy);
                self.heaps.push(h);
                self.alias.push(self.alias.len());
                Ok(Outcome::NewHeap(h))
            }
            TraceOp::Meld { a, b } => {
                let (ra, rb) = (
                    self.find(self.check_ref(a)?),
                    self.find(self.check_ref(b)?),
                );
                let out = self.pool.meld(self.heaps[ra], self.heaps[rb])?;
                let (keep, gone) = if self.heaps[ra] == out { (ra, rb) } else { (rb, ra) };
                self.alias[gone] = keep;
                Ok(Outcome::Melded(out))
            }
        }
    }

    fn check_ref(&self, r: usize) -> Result<usize, OpError> {
        if r >= self.heaps.len() {
            return Err(OpError::Dangling(format!("unknown heap reference {r}")));
        }
        Ok(r)
    }
}

/// Runs a parsed trace and collects the printed lines.
pub fn run_ops(
    ops: &[(usize, TraceOp)],
    variant: Variant,
    policy: Policy,
) -> Result<(Vec<String>, TraceRunner), TraceError> {
    let mut runner = TraceRunner::new(variant, policy);
    let mut out = Vec::new();
    for &(line, op) in ops {
        let o = runner.apply(op).map_err(|e| TraceError {
            line,
            msg: e.to_string(),
        })?;
        out.extend(o.render());
    }
    Ok((out, runner))
}
