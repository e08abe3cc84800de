//! Structural analysis of sampled graphs: component censuses, the 1-out
//! digraph's cycle and tail structure, orbit trajectories, and an exhaustive
//! connected-set counting oracle for tiny cubes.

use std::collections::BTreeMap;

use crate::hypercube::{Dimension, VertexId};
use crate::sampler::{FunctionalMap, UndirectedView};
use crate::{Error, Result};

/// Union-find over a flat vertex array, path halving + union by size.
pub(crate) struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    pub(crate) fn union(&mut self, a: u32, b: u32) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.size[ra as usize] += self.size[rb as usize];
        self.parent[rb as usize] = ra;
    }

    pub(crate) fn component_size(&mut self, x: u32) -> u32 {
        let r = self.find(x);
        self.size[r as usize]
    }
}

/// Census of the connected components of an undirected sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSummary {
    sizes: Vec<u64>,
    total: u64,
}

impl ComponentSummary {
    fn new(mut sizes: Vec<u64>, total: u64) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        debug_assert_eq!(sizes.iter().sum::<u64>(), total);
        ComponentSummary { sizes, total }
    }

    /// Component sizes, descending.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest(&self) -> u64 {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// Largest component size over 2^n.
    pub fn giant_fraction(&self) -> f64 {
        self.largest() as f64 / self.total as f64
    }

    /// Second largest component size over 2^n (0 for a connected graph).
    pub fn second_fraction(&self) -> f64 {
        self.sizes.get(1).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn is_connected(&self) -> bool {
        self.sizes.len() == 1
    }
}

/// Exact component census via union-find over the implicit adjacency oracle.
pub fn components(view: &UndirectedView) -> ComponentSummary {
    let n = view.n();
    let size = n.vertex_count();
    let mut uf = UnionFind::new(size);
    for v in n.vertices() {
        // each edge once, from its endpoint with the 0-bit in the flipped
        // coordinate
        let mut up = view.neighbor_mask(v) & !v;
        while up != 0 {
            let d = up.trailing_zeros();
            up &= up - 1;
            uf.union(v, v | (1 << d));
        }
    }
    collect_sizes(&mut uf, size)
}

/// BFS fallback for the same census; kept as an independent route for
/// cross-checking the union-find path.
pub fn components_bfs(view: &UndirectedView) -> ComponentSummary {
    let n = view.n();
    let size = n.vertex_count();
    let mut seen = vec![false; size];
    let mut sizes = Vec::new();
    let mut queue = Vec::new();
    for start in n.vertices() {
        if seen[start as usize] {
            continue;
        }
        seen[start as usize] = true;
        queue.push(start);
        let mut count = 0u64;
        while let Some(v) = queue.pop() {
            count += 1;
            let mut mask = view.neighbor_mask(v);
            while mask != 0 {
                let d = mask.trailing_zeros();
                mask &= mask - 1;
                let w = v ^ (1 << d);
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push(w);
                }
            }
        }
        sizes.push(count);
    }
    ComponentSummary::new(sizes, size as u64)
}

fn collect_sizes(uf: &mut UnionFind, size: usize) -> ComponentSummary {
    let mut sizes = Vec::new();
    for v in 0..size as u32 {
        if uf.find(v) == v {
            sizes.push(uf.component_size(v) as u64);
        }
    }
    ComponentSummary::new(sizes, size as u64)
}

/// Σ |C_i|^2 over the components: the same-component pair statistic. Always
/// at least (largest component)^2.
pub fn pair_statistic(summary: &ComponentSummary) -> u64 {
    summary.sizes().iter().map(|&s| s * s).sum()
}

/// Cycle and tail census of a 1-out functional digraph. Every component of
/// the sample carries exactly one cycle, so the cycle total doubles as a
/// component count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleCensus {
    counts: BTreeMap<u32, u64>,
    max_tail: u32,
}

impl CycleCensus {
    /// Number of cycles per cycle length.
    pub fn counts(&self) -> &BTreeMap<u32, u64> {
        &self.counts
    }

    pub fn two_cycles(&self) -> u64 {
        self.counts.get(&2).copied().unwrap_or(0)
    }

    /// Cycles of length four or more.
    pub fn longer_cycles(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(&len, _)| len > 2)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn cycle_count(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Longest pre-cycle path length over all vertices.
    pub fn max_tail(&self) -> u32 {
        self.max_tail
    }
}

/// Walks every orbit once, three-state coloring, O(2^n) total.
pub fn cycle_census(fmap: &FunctionalMap) -> CycleCensus {
    let size = fmap.n().vertex_count();
    // dist < MAX marks a finished vertex; mark/pos track the current walk
    let mut dist = vec![u32::MAX; size];
    let mut mark = vec![0u32; size];
    let mut pos = vec![0u32; size];
    let mut counts = BTreeMap::new();
    let mut path: Vec<u32> = Vec::new();
    for start in 0..size as u32 {
        if dist[start as usize] != u32::MAX {
            continue;
        }
        path.clear();
        let wid = start + 1;
        let mut u = start;
        while dist[u as usize] == u32::MAX && mark[u as usize] != wid {
            mark[u as usize] = wid;
            pos[u as usize] = path.len() as u32;
            path.push(u);
            u = fmap.f(u);
        }
        let tail_end = if dist[u as usize] == u32::MAX {
            // closed a new cycle at pos[u]
            let p = pos[u as usize] as usize;
            let len = (path.len() - p) as u32;
            *counts.entry(len).or_insert(0) += 1;
            for &x in &path[p..] {
                dist[x as usize] = 0;
            }
            p
        } else {
            // ran into an already-finished vertex
            path.len()
        };
        for i in (0..tail_end).rev() {
            let successor = if i + 1 < path.len() { path[i + 1] } else { u };
            dist[path[i] as usize] = dist[successor as usize] + 1;
        }
    }
    let max_tail = dist.iter().copied().max().unwrap_or(0);
    CycleCensus { counts, max_tail }
}

/// The orbit of one start vertex: visited vertices, the coordinate flipped
/// at each step, and the Hamming distance back to the start after each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryView {
    orbit: Vec<VertexId>,
    flips: Vec<u8>,
    lsizes: Vec<u32>,
}

impl TrajectoryView {
    /// `orbit[i] = f^i(start)`, length `steps + 1`.
    pub fn orbit(&self) -> &[VertexId] {
        &self.orbit
    }

    /// `flips[i-1]` is the coordinate in which `f^(i-1)` and `f^i` differ.
    pub fn flips(&self) -> &[u8] {
        &self.flips
    }

    /// `lsizes[i]` is the number of coordinates where `f^i(start)` differs
    /// from `start`; it moves by exactly ±1 each step and starts at 0.
    pub fn lsizes(&self) -> &[u32] {
        &self.lsizes
    }
}

pub fn trajectory(fmap: &FunctionalMap, start: VertexId, steps: usize) -> TrajectoryView {
    let mut orbit = Vec::with_capacity(steps + 1);
    let mut flips = Vec::with_capacity(steps);
    let mut lsizes = Vec::with_capacity(steps + 1);
    let mut cur = start;
    orbit.push(cur);
    lsizes.push(0);
    for _ in 0..steps {
        flips.push(fmap.direction(cur) as u8);
        cur = fmap.f(cur);
        orbit.push(cur);
        lsizes.push((start ^ cur).count_ones());
    }
    TrajectoryView {
        orbit,
        flips,
        lsizes,
    }
}

/// Exact number of connected vertex sets of size `s` containing `v`, by
/// exhaustive enumeration. Only for tiny cubes: refuses beyond n = 4, s = 6.
pub fn count_connected_sets(n: Dimension, v: VertexId, s: u32) -> Result<u64> {
    if s == 0 {
        return Err(Error::InvalidParameter("set size must be positive".into()));
    }
    if n.get() > 4 || s > 6 {
        return Err(Error::BudgetExceeded(format!(
            "connected-set enumeration is capped at n <= 4, s <= 6 (got n = {}, s = {s})",
            n.get()
        )));
    }
    let size = n.vertex_count() as u32;
    let mut count = 0u64;
    for mask in 0u32..(1u32 << size) {
        if mask.count_ones() != s || mask >> v & 1 == 0 {
            continue;
        }
        if mask_connected(mask, n) {
            count += 1;
        }
    }
    Ok(count)
}

fn mask_connected(mask: u32, n: Dimension) -> bool {
    let start = mask.trailing_zeros();
    let mut reach = 1u32 << start;
    loop {
        let mut grow = reach;
        let mut frontier = reach;
        while frontier != 0 {
            let v = frontier.trailing_zeros();
            frontier &= frontier - 1;
            for d in 0..n.get() {
                let w = v ^ (1 << d);
                if mask >> w & 1 == 1 {
                    grow |= 1 << w;
                }
            }
        }
        if grow == reach {
            return reach == mask;
        }
        reach = grow;
    }
}
