//! Structural invariant checker.

use super::bounds::{nomeld_degree_bound, positional_degree_bound, rank_bound};
use crate::heap::{HeapPool, Variant};
use crate::node::{HeapId, Kind, NodeId, Tag};
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    /// Right after a public method under the amortized policy: caches
    /// empty and the equilibrium bounds hold.
    AfterAmortized,
    /// Between public methods under any policy.
    AnyTime,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub invariant: &'static str,
    pub nodes: Vec<NodeId>,
    /// Root-to-node path of the first offending node.
    pub path: Vec<NodeId>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub findings: Vec<Finding>,
}

impl CheckReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, invariant: &str) -> bool {
        self.findings.iter().any(|f| f.invariant == invariant)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return write!(f, "ok");
        }
        for x in &self.findings {
            writeln!(f, "{}: {:?} {} (path {:?})", x.invariant, x.nodes, x.detail, x.path)?;
        }
        Ok(())
    }
}

struct Ctx<'a, K> {
    pool: &'a HeapPool<K>,
    h: HeapId,
    report: CheckReport,
}

impl<K: Ord + Copy> Ctx<'_, K> {
    fn path(&self, x: NodeId) -> Vec<NodeId> {
        let mut p = vec![x];
        let mut cur = x;
        while let Some(q) = self.pool.n(cur).parent {
            if p.len() > self.pool.nodes.len() {
                break;
            }
            p.push(q);
            cur = q;
        }
        p.reverse();
        p
    }

    fn fail(&mut self, invariant: &'static str, nodes: Vec<NodeId>, detail: String) {
        let path = nodes.first().map(|&x| self.path(x)).unwrap_or_default();
        self.report.findings.push(Finding {
            invariant,
            nodes,
            path,
            detail,
        });
    }
}

impl<K: Ord + Copy> HeapPool<K> {
    /// Verifies every structural invariant of heap `h`. Read-only.
    pub fn check_structure(&self, h: HeapId, strictness: Strictness) -> CheckReport {
        let mut c = Ctx {
            pool: self,
            h,
            report: CheckReport::default(),
        };
        let Some(rec) = self.records.get(h.index()) else {
            c.fail("record", vec![], format!("unknown heap {h:?}"));
            return c.report;
        };
        if rec.size < 0 {
            c.fail("record", vec![], format!("heap {h:?} is retired"));
            return c.report;
        }
        let meld = self.variant == Variant::Meld;
        let n = rec.size as u64;
        let r_n = rank_bound(n) as u64;

        // Traverse the forest.
        let roots: Vec<NodeId> = self.sib_iter(rec.roots).take(self.nodes.len() + 1).collect();
        if (n == 0) != roots.is_empty() {
            c.fail("size", roots.clone(), format!("size {n} with {} roots", roots.len()));
        }
        if roots.len() > 1 {
            c.fail("single-root", roots.clone(), format!("{} roots", roots.len()));
        }
        self.check_list(&mut c, rec.roots, None);
        let mut seen: HashSet<NodeId> = HashSet::new();
        let mut stack: Vec<NodeId> = roots.clone();
        let mut order = Vec::new();
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                c.fail("acyclic", vec![x], "node reached twice".into());
                continue;
            }
            order.push(x);
            let kids: Vec<NodeId> = self.sib_iter(self.n(x).child).take(self.nodes.len() + 1).collect();
            self.check_list(&mut c, self.n(x).child, Some(x));
            stack.extend(kids);
        }
        if order.len() as u64 != n {
            c.fail("size", vec![], format!("size {n} but {} reachable nodes", order.len()));
        }

        let mut total_loss = 0u64;
        let mut count_a = 0u64;
        let mut count_g = 0u64;
        let mut max_rank = 0u64;
        for &x in &order {
            self.check_node(&mut c, x, roots.contains(&x));
            let nx = self.n(x);
            if self.is_implicit(x) {
                continue;
            }
            total_loss += nx.loss as u64;
            match nx.tag {
                Tag::A => count_a += 1,
                Tag::G => count_g += 1,
                _ => {}
            }
            max_rank = max_rank.max(nx.rank as u64);
            if !meld && strictness == Strictness::AfterAmortized {
                let deg = self.sib_iter(nx.child).count() as u64;
                if deg > nomeld_degree_bound(n) {
                    c.fail("degree", vec![x], format!("degree {deg} > {}", nomeld_degree_bound(n)));
                }
            }
        }

        self.check_registries(&mut c, &seen);
        self.check_cache_membership(&mut c, &order);
        if meld {
            self.check_node_list(&mut c, &seen, strictness);
        }

        if strictness == Strictness::AfterAmortized {
            for t in [Tag::G, Tag::A, Tag::L] {
                if !rec.caches[t.slot()].is_empty() {
                    c.fail("caches-empty", vec![], format!("cache {t:?} has {} entries", rec.caches[t.slot()].len()));
                }
            }
            if total_loss > r_n + 1 {
                c.fail("total-loss", vec![], format!("total loss {total_loss} > R(n)+1 = {}", r_n + 1));
            }
            if count_a > r_n + 1 {
                c.fail("count-a", vec![], format!("{count_a} nodes of type A > {}", r_n + 1));
            }
            if count_g > r_n + 1 {
                c.fail("count-g", vec![], format!("{count_g} nodes of type G > {}", r_n + 1));
            }
            if max_rank > r_n {
                c.fail("max-rank", vec![], format!("max rank {max_rank} > R(n) = {r_n}"));
            }
        }
        c.report
    }

    fn check_list(&self, c: &mut Ctx<'_, K>, head: Option<NodeId>, parent: Option<NodeId>) {
        let Some(f) = head else { return };
        let mut prev = self.n(f).left;
        let mut cur = Some(f);
        let mut steps = 0;
        let mut last = f;
        let mut seen_deferred = false;
        while let Some(x) = cur {
            steps += 1;
            if steps > self.nodes.len() {
                c.fail("sibling-list", vec![f], "sibling list does not terminate".into());
                return;
            }
            let nx = self.n(x);
            if x != f && nx.left != prev {
                c.fail("sibling-list", vec![x], format!("left link {:?} expected {prev:?}", nx.left));
            }
            if let Some(p) = parent {
                if nx.parent != Some(p) {
                    c.fail("parent-link", vec![x, p], format!("parent {:?}", nx.parent));
                }
                if self.less_static(x, p) {
                    c.fail("heap-order", vec![x, p], "child smaller than parent".into());
                }
                if self.variant == Variant::Meld {
                    let d = self.is_deferred(x);
                    if seen_deferred && !d {
                        c.fail("solid-prefix", vec![x, p], "solid child right of a deferred child".into());
                    }
                    seen_deferred |= d;
                }
            } else if nx.parent.is_some() {
                c.fail("parent-link", vec![x], "root with parent link".into());
            }
            if !nx.live {
                c.fail("live", vec![x], "dead node in a list".into());
            }
            prev = x;
            last = x;
            cur = nx.right;
        }
        if self.n(f).left != last {
            c.fail("sibling-list", vec![f], "leftmost does not point to rightmost".into());
        }
    }

    fn less_static(&self, a: NodeId, b: NodeId) -> bool {
        let (x, y) = (self.n(a), self.n(b));
        (x.key, x.uid) < (y.key, y.uid)
    }

    fn check_node(&self, c: &mut Ctx<'_, K>, x: NodeId, is_root: bool) {
        let nx = self.n(x);
        let implicit = self.is_implicit(x);
        let kids: Vec<NodeId> = self.sib_iter(nx.child).collect();
        if implicit {
            if let Some(&k) = kids.iter().find(|&&k| !self.is_deferred(k)) {
                c.fail("implicit-children", vec![x, k], "implicit node with solid child".into());
            }
            return;
        }
        if self.variant == Variant::Meld && nx.owner != c.h {
            c.fail("owner", vec![x], format!("owner {:?} is neither retired nor {:?}", nx.owner, c.h));
        }
        let solid_rank_kids = kids
            .iter()
            .filter(|&&k| self.n(k).kind == Kind::RankChild && !self.is_implicit(k))
            .count() as u32;
        let deferred = !is_root && nx.kind == Kind::Deferred;
        if deferred {
            if solid_rank_kids > 0 {
                c.fail("deferred-children", vec![x], "explicitly deferred node with solid rank child".into());
            }
            if nx.tag != Tag::N || nx.loss != 0 {
                c.fail("deferred-state", vec![x], format!("tag {:?} loss {}", nx.tag, nx.loss));
            }
        }
        if nx.rank != solid_rank_kids {
            c.fail("rank", vec![x], format!("rank {} but {solid_rank_kids} rank children", nx.rank));
        }
        let rank_root = is_root || nx.kind == Kind::NonrankChild;
        if deferred {
            return;
        }
        if rank_root {
            if nx.loss != 0 {
                c.fail("loss", vec![x], format!("rank root with loss {}", nx.loss));
            }
            if !matches!(nx.tag, Tag::A | Tag::G) {
                c.fail("tag", vec![x], format!("rank root with tag {:?}", nx.tag));
            }
        } else {
            if nx.loss >= 1 && nx.tag != Tag::L {
                c.fail("tag", vec![x], format!("loss {} with tag {:?}", nx.loss, nx.tag));
            }
            if nx.loss == 0 && nx.tag != Tag::N {
                c.fail("tag", vec![x], format!("rank child without loss has tag {:?}", nx.tag));
            }
        }
        if self.variant == Variant::NoMeld && nx.tag == Tag::G {
            c.fail("tag", vec![x], "type G without meld".into());
        }
    }

    fn check_registries(&self, c: &mut Ctx<'_, K>, members: &HashSet<NodeId>) {
        let rec = self.rec(c.h);
        let mut placed: HashMap<NodeId, Tag> = HashMap::new();
        for t in [Tag::G, Tag::A, Tag::L] {
            for (r, x) in rec.registries[t.slot()].iter() {
                let nx = self.n(x);
                if !members.contains(&x) {
                    c.fail("registry", vec![x], format!("{t:?}[{r}] holds a foreign node"));
                    continue;
                }
                if nx.rank != r || nx.tag != t || (t == Tag::L && nx.loss != 1) {
                    c.fail(
                        "registry",
                        vec![x],
                        format!("{t:?}[{r}] holds rank {} tag {:?} loss {}", nx.rank, nx.tag, nx.loss),
                    );
                }
                if placed.insert(x, t).is_some() {
                    c.fail("registry", vec![x], "node placed twice".into());
                }
            }
        }
    }

    /// Every non-`N` node not in its registry must be in its cache.
    fn check_cache_membership(&self, c: &mut Ctx<'_, K>, order: &[NodeId]) {
        let rec = self.rec(c.h);
        let cached: [HashSet<NodeId>; 3] =
            std::array::from_fn(|i| rec.caches[i].iter().collect());
        for &x in order {
            let nx = self.n(x);
            if self.is_implicit(x) || nx.tag == Tag::N {
                continue;
            }
            let i = nx.tag.slot();
            if rec.registries[i].get(nx.rank) != Some(x) && !cached[i].contains(&x) {
                c.fail("cache-membership", vec![x], format!("tag {:?} but neither placed nor cached", nx.tag));
            }
        }
    }

    fn check_node_list(&self, c: &mut Ctx<'_, K>, members: &HashSet<NodeId>, strictness: Strictness) {
        let rec = self.rec(c.h);
        let n = rec.size as u64;
        let mut seen = HashSet::new();
        let mut cur = rec.nodes;
        let mut prev: Option<NodeId> = None;
        let mut p = 0u64;
        while let Some(x) = cur {
            p += 1;
            if p > self.nodes.len() as u64 + 1 || !seen.insert(x) {
                c.fail("node-list", vec![x], "node list cycles".into());
                return;
            }
            if !members.contains(&x) {
                c.fail("node-list", vec![x], "listed node not in the heap".into());
            }
            if let Some(q) = prev {
                if self.n(x).prev != q {
                    c.fail("node-list", vec![x], "prev link mismatch".into());
                }
            }
            if strictness == Strictness::AfterAmortized {
                let nx = self.n(x);
                let deg = self.sib_iter(nx.child).count() as f64;
                let solid = !self.is_deferred(x) || self.n(x).parent.is_none();
                let b = positional_degree_bound(n, p, solid && nx.loss == 0);
                if deg > b {
                    c.fail("degree", vec![x], format!("degree {deg} > {b:.2} at position {p}"));
                }
            }
            prev = Some(x);
            cur = self.n(x).next;
        }
        if let (Some(f), Some(l)) = (rec.nodes, prev) {
            if self.n(f).prev != l {
                c.fail("node-list", vec![f], "head does not point to tail".into());
            }
        }
        if seen.len() != members.len() {
            c.fail("node-list", vec![], format!("{} listed, {} in trees", seen.len(), members.len()));
        }
    }

    /// Pool-wide check: each record's refcount equals the number of live
    /// nodes it owns, and retired records are discarded exactly at zero.
    pub fn check_refcounts(&self) -> CheckReport {
        let mut report = CheckReport::default();
        if self.variant != Variant::Meld {
            return report;
        }
        let mut owned = vec![0u64; self.records.len()];
        for n in self.nodes.iter().filter(|n| n.live) {
            owned[n.owner.index()] += 1;
        }
        for (i, r) in self.records.iter().enumerate() {
            let id = HeapId(i as u32);
            if r.discarded {
                if owned[i] != 0 {
                    report.findings.push(Finding {
                        invariant: "refcount",
                        nodes: vec![],
                        path: vec![],
                        detail: format!("{id:?} discarded but owns {} nodes", owned[i]),
                    });
                }
                continue;
            }
            if r.refcount != owned[i] {
                report.findings.push(Finding {
                    invariant: "refcount",
                    nodes: vec![],
                    path: vec![],
                    detail: format!("{id:?} refcount {} but owns {}", r.refcount, owned[i]),
                });
            }
            if r.size < 0 && r.refcount == 0 {
                report.findings.push(Finding {
                    invariant: "refcount",
                    nodes: vec![],
                    path: vec![],
                    detail: format!("{id:?} retired with refcount 0 but not discarded"),
                });
            }
        }
        report
    }
}
