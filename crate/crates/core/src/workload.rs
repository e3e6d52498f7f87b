//! Benchmark workloads and their reference implementations.

use crate::heap::{HeapPool, Policy, Variant};
use crate::node::{HeapId, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Undirected graph with positive integer edge weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub adj: Vec<Vec<(usize, u64)>>,
}

impl Graph {
    pub fn vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn add(&mut self, a: usize, b: usize, w: u64) {
        self.adj[a].push((b, w));
        self.adj[b].push((a, w));
    }
}

/// Connected random graph: a random spanning tree plus uniformly random
/// extra edges up to `m` edges in total. Weights are uniform in 1..=1000.
pub fn random_graph(n: usize, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph {
        adj: vec![Vec::new(); n],
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add(u, v, rng.gen_range(1..=1000));
    }
    if n >= 2 {
        for _ in n - 1..m {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            g.add(a, b, rng.gen_range(1..=1000));
        }
    }
    g
}

pub fn complete_graph(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph {
        adj: vec![Vec::new(); n],
    };
    for a in 0..n {
        for b in a + 1..n {
            g.add(a, b, rng.gen_range(1..=1000));
        }
    }
    g
}

#[derive(Clone, Debug)]
pub struct DijkstraRun {
    /// `u64::MAX` for unreachable vertices.
    pub dist: Vec<u64>,
    /// Sum of all finite distances.
    pub checksum: u64,
    pub decreases: u64,
    pub pool: HeapPool<u64>,
}

pub fn checksum(dist: &[u64]) -> u64 {
    dist.iter().filter(|&&d| d != u64::MAX).sum()
}

/// Dijkstra from vertex 0 using `decrease_key`.
pub fn dijkstra(g: &Graph, variant: Variant, policy: Policy) -> DijkstraRun {
    let n = g.vertices();
    let mut pool = HeapPool::new(variant);
    let h = pool.make_heap(policy);
    let mut dist = vec![u64::MAX; n];
    let mut node: Vec<Option<NodeId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut vertex_of = Vec::with_capacity(n);
    let mut decreases = 0;
    if n > 0 {
        dist[0] = 0;
        node[0] = Some(pool.insert(h, 0).unwrap());
        vertex_of.push(0);
    }
    while let Ok((d, uid)) = pool.delete_min(h) {
        let u = vertex_of[uid as usize];
        done[u] = true;
        for &(v, w) in &g.adj[u] {
            let nd = d + w;
            if done[v] || nd >= dist[v] {
                continue;
            }
            dist[v] = nd;
            match node[v] {
                Some(x) => {
                    pool.decrease_key(h, x, nd).unwrap();
                    decreases += 1;
                }
                None => {
                    node[v] = Some(pool.insert(h, nd).unwrap());
                    vertex_of.push(v);
                }
            }
        }
    }
    DijkstraRun {
        checksum: checksum(&dist),
        dist,
        decreases,
        pool,
    }
}

/// Quadratic Dijkstra without a priority queue.
pub fn reference_dijkstra(g: &Graph) -> Vec<u64> {
    let n = g.vertices();
    let mut dist = vec![u64::MAX; n];
    let mut done = vec![false; n];
    if n == 0 {
        return dist;
    }
    dist[0] = 0;
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&v| !done[v] && dist[v] != u64::MAX)
            .min_by_key(|&v| dist[v])
        else {
            break;
        };
        done[u] = true;
        for &(v, w) in &g.adj[u] {
            dist[v] = dist[v].min(dist[u] + w);
        }
    }
    dist
}

/// Sorts by inserting everything and deleting the minimum repeatedly.
/// Uniformly random keys from a seeded generator.
pub fn random_keys(n: usize, seed: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen()).collect()
}

/// Inserts all keys, then deletes until empty.
pub fn heapsort(keys: &[i64], variant: Variant, policy: Policy) -> (Vec<i64>, HeapPool<i64>) {
    let mut pool = HeapPool::new(variant);
    let h = pool.make_heap(policy);
    for &k in keys {
        pool.insert(h, k).unwrap();
    }
    let mut out = Vec::with_capacity(keys.len());
    while let Ok((k, _)) = pool.delete_min(h) {
        out.push(k);
    }
    (out, pool)
}

#[derive(Clone, Debug)]
pub struct ChurnRun {
    /// Wrapping sum of deleted keys.
    pub sum: i64,
    pub heap: HeapId,
    pub pool: HeapPool<i64>,
}

/// Random mixed workload around a steady heap size.
pub fn churn(ops: u64, size: usize, seed: u64, variant: Variant, policy: Policy) -> ChurnRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = HeapPool::new(variant);
    let h = pool.make_heap(policy);
    let mut live: Vec<NodeId> = Vec::new();
    let mut sum = 0i64;
    for _ in 0..size {
        live.push(pool.insert(h, rng.gen_range(0..1 << 40)).unwrap());
    }
    for _ in 0..ops {
        match rng.gen_range(0..3) {
            0 => live.push(pool.insert(h, rng.gen_range(0..1 << 40)).unwrap()),
            1 if !live.is_empty() => {
                let i = rng.gen_range(0..live.len());
                let x = live[i];
                if pool.is_live(x) {
                    let k = pool.key(x).unwrap() - rng.gen_range(0..1 << 20);
                    pool.decrease_key(h, x, k).unwrap();
                } else {
                    // deleted earlier; drop the stale handle
                    live.swap_remove(i);
                }
            }
            _ => {
                if let Ok((k, _)) = pool.delete_min(h) {
                    sum = sum.wrapping_add(k);
                }
            }
        }
        if live.len() > 4 * size.max(1) {
            live.shuffle(&mut rng);
            live.truncate(2 * size.max(1));
        }
    }
    ChurnRun { sum, heap: h, pool }
}
