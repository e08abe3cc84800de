//! Connectivity-grade analyses: connectivity and vertex-connectivity checks,
//! degree census, minimal disconnected-set censuses for a removal set,
//! the capped active-set computation, and subcube-component scanning with a
//! planted-instance generator.

use std::collections::BTreeMap;

use crate::hypercube::{
    subcube_outer_boundary, subcube_vertices, Dimension, SubcubeSpec, VertexId,
};
use crate::sampler::{vertex_stream, KOutSample, Seed, SplitMix64, UndirectedView, TAG_PLANT};
use crate::structure::UnionFind;
use crate::{Error, Result};

/// Vertex-count cap for exact vertex connectivity.
pub const KCONN_VERTEX_LIMIT: usize = 4096;

/// Enumeration caps for the active-set computation.
pub const ACTIVE_SET_CAP_LIMIT: u32 = 12;
const ACTIVE_SET_WORK_LIMIT: u64 = 1 << 34;

pub fn is_connected(view: &UndirectedView) -> bool {
    let n = view.n();
    let size = n.vertex_count();
    let mut seen = vec![false; size];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut visited = 0usize;
    while let Some(v) = stack.pop() {
        visited += 1;
        let mut mask = view.neighbor_mask(v);
        while mask != 0 {
            let d = mask.trailing_zeros();
            mask &= mask - 1;
            let w = v ^ (1 << d);
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    visited == size
}

/// Exact histogram of undirected degrees, plus the count of vertices whose
/// degree equals the sample's k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeCensus {
    histogram: BTreeMap<u32, u64>,
    degree_k_count: u64,
    min_degree: u32,
}

impl DegreeCensus {
    pub fn histogram(&self) -> &BTreeMap<u32, u64> {
        &self.histogram
    }

    pub fn degree_k_count(&self) -> u64 {
        self.degree_k_count
    }

    pub fn min_degree(&self) -> u32 {
        self.min_degree
    }
}

pub fn degree_census(sample: &KOutSample) -> DegreeCensus {
    let view = sample.undirected();
    let mut histogram = BTreeMap::new();
    let mut min_degree = u32::MAX;
    for v in sample.n().vertices() {
        let d = view.degree(v);
        *histogram.entry(d).or_insert(0u64) += 1;
        min_degree = min_degree.min(d);
    }
    let degree_k_count = histogram.get(&sample.k()).copied().unwrap_or(0);
    DegreeCensus {
        histogram,
        degree_k_count,
        min_degree,
    }
}

struct Dinic {
    // adjacency: (to, cap, index of reverse arc)
    adj: Vec<Vec<(u32, u32, u32)>>,
}

impl Dinic {
    fn new(nodes: usize) -> Self {
        Dinic {
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: u32, to: u32, cap: u32) {
        let rev_from = self.adj[to as usize].len() as u32;
        let rev_to = self.adj[from as usize].len() as u32;
        self.adj[from as usize].push((to, cap, rev_from));
        self.adj[to as usize].push((from, 0, rev_to));
    }

    fn bfs(&self, s: u32, t: u32, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s as usize] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &(to, cap, _) in &self.adj[u as usize] {
                if cap > 0 && level[to as usize] < 0 {
                    level[to as usize] = level[u as usize] + 1;
                    queue.push_back(to);
                }
            }
        }
        level[t as usize] >= 0
    }

    fn dfs(&mut self, u: u32, t: u32, pushed: u32, level: &[i32], iter: &mut [usize]) -> u32 {
        if u == t {
            return pushed;
        }
        while iter[u as usize] < self.adj[u as usize].len() {
            let (to, cap, rev) = self.adj[u as usize][iter[u as usize]];
            if cap > 0 && level[to as usize] == level[u as usize] + 1 {
                let d = self.dfs(to, t, pushed.min(cap), level, iter);
                if d > 0 {
                    self.adj[u as usize][iter[u as usize]].1 -= d;
                    self.adj[to as usize][rev as usize].1 += d;
                    return d;
                }
            }
            iter[u as usize] += 1;
        }
        0
    }

    /// Max flow from s to t, stopping early once `limit` is reached.
    fn max_flow(&mut self, s: u32, t: u32, limit: u32) -> u32 {
        let nodes = self.adj.len();
        let mut flow = 0;
        let mut level = vec![-1i32; nodes];
        while flow < limit && self.bfs(s, t, &mut level) {
            let mut iter = vec![0usize; nodes];
            loop {
                let pushed = self.dfs(s, t, limit - flow, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
                if flow >= limit {
                    break;
                }
            }
        }
        flow
    }
}

/// Minimum vertex-cut size between two non-adjacent vertices, via unit
/// vertex-split max flow: every vertex becomes an in/out pair joined by a
/// capacity-1 arc, every undirected edge two uncapped arcs.
fn pair_connectivity(neighbor_lists: &[Vec<u32>], s: u32, t: u32, limit: u32) -> u32 {
    let n = neighbor_lists.len() as u32;
    let inf = n;
    let mut dinic = Dinic::new(2 * n as usize);
    // v_in = v, v_out = v + n
    for (v, nbrs) in neighbor_lists.iter().enumerate() {
        let v = v as u32;
        dinic.add_arc(v, v + n, 1);
        for &w in nbrs {
            dinic.add_arc(v + n, w, inf);
        }
    }
    dinic.max_flow(s + n, t, limit)
}

/// Exact vertex connectivity of an arbitrary undirected graph given as
/// symmetric adjacency lists, computed up to `ceiling`: the result is
/// `min(kappa, ceiling)`. A graph on one vertex or a complete graph has
/// connectivity |V| - 1 by convention.
pub fn vertex_connectivity_of(neighbor_lists: &[Vec<u32>], ceiling: u32) -> u32 {
    let size = neighbor_lists.len();
    assert!(size >= 1);
    if size == 1 {
        return 0u32;
    }
    let degrees: Vec<u32> = neighbor_lists.iter().map(|l| l.len() as u32).collect();
    let s = (0..size as u32).min_by_key(|&v| degrees[v as usize]).unwrap();
    let min_degree = degrees[s as usize];
    let mut best = min_degree.min(ceiling);
    if best == 0 {
        return if size > 1 { 0 } else { best };
    }
    let adjacent = |u: u32, w: u32| neighbor_lists[u as usize].contains(&w);
    let mut complete = true;
    // flows from a minimum-degree vertex to all its non-neighbors
    for t in 0..size as u32 {
        if t == s || adjacent(s, t) {
            continue;
        }
        complete = false;
        best = best.min(pair_connectivity(neighbor_lists, s, t, best));
        if best == 0 {
            return 0;
        }
    }
    // sweep over non-adjacent pairs of s's neighbors: a minimum cut that
    // contains s must separate two of them
    let nbrs = &neighbor_lists[s as usize];
    for (i, &u) in nbrs.iter().enumerate() {
        for &w in &nbrs[i + 1..] {
            if adjacent(u, w) {
                continue;
            }
            complete = false;
            best = best.min(pair_connectivity(neighbor_lists, u, w, best));
            if best == 0 {
                return 0;
            }
        }
    }
    if complete {
        return (size as u32 - 1).min(ceiling);
    }
    best
}

/// Exact vertex connectivity of an undirected sample, up to `ceiling`.
/// Refuses above 4096 vertices; `ceiling` must lie in `[1, n]`.
pub fn vertex_connectivity(view: &UndirectedView, ceiling: u32) -> Result<u32> {
    let n = view.n();
    if n.vertex_count() > KCONN_VERTEX_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "vertex connectivity is capped at {KCONN_VERTEX_LIMIT} vertices, got 2^{}",
            n.get()
        )));
    }
    if ceiling < 1 || ceiling > n.get() {
        return Err(Error::InvalidParameter(format!(
            "ceiling {ceiling} out of range 1..={}",
            n.get()
        )));
    }
    let lists: Vec<Vec<u32>> = n
        .vertices()
        .map(|v| view.neighbors(v).collect())
        .collect();
    Ok(vertex_connectivity_of(&lists, ceiling))
}

/// A removal set L for disconnection queries: distinct in-range vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutQuery {
    removed: Vec<VertexId>,
}

impl CutQuery {
    pub fn new(mut removed: Vec<VertexId>, n: Dimension) -> Result<Self> {
        removed.sort_unstable();
        if removed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("repeated vertex in cut".into()));
        }
        if removed.iter().any(|&v| !n.contains(v)) {
            return Err(Error::InvalidParameter("cut vertex out of range".into()));
        }
        Ok(CutQuery { removed })
    }

    pub fn removed(&self) -> &[VertexId] {
        &self.removed
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }
}

/// The minimal L-disconnected sets for a removal set L: exactly the
/// connected components of the sample with L deleted. They are disjoint,
/// connected, have no sample edge to anything outside themselves and L, and
/// together with L they cover every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisconnectionCensus {
    removed: Vec<VertexId>,
    sets: Vec<Vec<VertexId>>,
}

impl DisconnectionCensus {
    pub fn removed(&self) -> &[VertexId] {
        &self.removed
    }

    /// The minimal sets, each sorted ascending, ordered by smallest member.
    pub fn sets(&self) -> &[Vec<VertexId>] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(|s| s.len()).collect()
    }
}

pub fn minimal_disconnected_sets(view: &UndirectedView, cut: &CutQuery) -> DisconnectionCensus {
    let n = view.n();
    let size = n.vertex_count();
    let mut blocked = vec![false; size];
    for &v in cut.removed() {
        blocked[v as usize] = true;
    }
    let mut seen = vec![false; size];
    let mut sets = Vec::new();
    let mut stack = Vec::new();
    for start in n.vertices() {
        if blocked[start as usize] || seen[start as usize] {
            continue;
        }
        seen[start as usize] = true;
        stack.push(start);
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            let mut mask = view.neighbor_mask(v);
            while mask != 0 {
                let d = mask.trailing_zeros();
                mask &= mask - 1;
                let w = v ^ (1 << d);
                if !blocked[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        sets.push(comp);
    }
    let covered: usize = sets.iter().map(|s| s.len()).sum();
    assert_eq!(
        covered + cut.len(),
        size,
        "minimal sets plus the cut must cover all vertices"
    );
    DisconnectionCensus {
        removed: cut.removed().to_vec(),
        sets,
    }
}

/// Witness that a vertex is active: a small connected set containing it and
/// a removal set of size k-1 under which the set is a whole component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveWitness {
    pub set: Vec<VertexId>,
    pub removed: Vec<VertexId>,
}

/// The active set under a size cap: every vertex lying in some component of
/// size at most `cap` of the base sample minus some removal set of size k-1,
/// where k-1 is the base sample's own parameter.
#[derive(Debug, Clone)]
pub struct ActiveSetReport {
    cap: u32,
    active: Vec<VertexId>,
    witnesses: BTreeMap<VertexId, ActiveWitness>,
}

impl ActiveSetReport {
    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Active vertices, ascending.
    pub fn active(&self) -> &[VertexId] {
        &self.active
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.active.binary_search(&v).is_ok()
    }

    pub fn witness(&self, v: VertexId) -> Option<&ActiveWitness> {
        self.witnesses.get(&v)
    }

    /// Per-vertex membership flags, the shape `staged_sample` wants.
    pub fn membership(&self, n: Dimension) -> Vec<bool> {
        let mut flags = vec![false; n.vertex_count()];
        for &v in &self.active {
            flags[v as usize] = true;
        }
        flags
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Computes the active set of a (k-1)-out base sample by enumerating every
/// removal set L of size k-1 and collecting the components of `g0 - L` of
/// size at most `cap`, with one witness per active vertex. Refuses when the
/// enumeration would be too large.
pub fn active_set(g0: &KOutSample, cap: u32) -> Result<ActiveSetReport> {
    if cap > ACTIVE_SET_CAP_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "active-set cap is limited to {ACTIVE_SET_CAP_LIMIT}, got {cap}"
        )));
    }
    let n = g0.n();
    let size = n.vertex_count();
    let cut_size = g0.k() as usize; // the base holds k-1 choices
    let combos = binomial(size as u64, cut_size as u64);
    let work = combos.saturating_mul(size as u64 * n.get() as u64);
    if work > ACTIVE_SET_WORK_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "active-set enumeration needs ~{work} steps, limit is {ACTIVE_SET_WORK_LIMIT}"
        )));
    }
    let view = g0.undirected();
    let mut is_active = vec![false; size];
    let mut witnesses = BTreeMap::new();
    // epoch-stamped visited array shared by all BFS scans
    let mut visit_mark = vec![0u32; size];
    let mut epoch = 0u32;
    let mut blocked = vec![false; size];
    let mut stack: Vec<u32> = Vec::new();
    let mut comp: Vec<u32> = Vec::new();

    let mut cut: Vec<u32> = (0..cut_size as u32).collect();
    loop {
        for &v in &cut {
            blocked[v as usize] = true;
        }
        epoch += 1;
        for start in 0..size as u32 {
            if blocked[start as usize] || visit_mark[start as usize] == epoch {
                continue;
            }
            visit_mark[start as usize] = epoch;
            stack.push(start);
            comp.clear();
            while let Some(v) = stack.pop() {
                comp.push(v);
                let mut mask = view.neighbor_mask(v);
                while mask != 0 {
                    let d = mask.trailing_zeros();
                    mask &= mask - 1;
                    let w = v ^ (1 << d);
                    if !blocked[w as usize] && visit_mark[w as usize] != epoch {
                        visit_mark[w as usize] = epoch;
                        stack.push(w);
                    }
                }
            }
            if comp.len() <= cap as usize {
                let mut sorted = comp.clone();
                sorted.sort_unstable();
                for &v in &sorted {
                    if !is_active[v as usize] {
                        is_active[v as usize] = true;
                        witnesses.insert(
                            v,
                            ActiveWitness {
                                set: sorted.clone(),
                                removed: cut.clone(),
                            },
                        );
                    }
                }
            }
        }
        for &v in &cut {
            blocked[v as usize] = false;
        }
        if !next_combination(&mut cut, size as u32) {
            break;
        }
    }
    let active: Vec<VertexId> = (0..size as u32).filter(|&v| is_active[v as usize]).collect();
    Ok(ActiveSetReport {
        cap,
        active,
        witnesses,
    })
}

/// Advances `combo` to the next k-subset of `0..limit` in lexicographic
/// order; false when exhausted. An empty combo has no successor.
fn next_combination(combo: &mut [u32], limit: u32) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < limit - (k - i) as u32 {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Scans the components of a sample for proper subcube components: a
/// component whose vertex set is exactly a subcube (every coordinate outside
/// a free set is constant) and whose members' choices all stay inside. The
/// full-cube component of a connected sample is not reported.
pub fn subcube_component_scan(sample: &KOutSample) -> Vec<SubcubeSpec> {
    let n = sample.n();
    let size = n.vertex_count();
    let view = sample.undirected();
    let mut uf = UnionFind::new(size);
    for v in n.vertices() {
        let mut up = view.neighbor_mask(v) & !v;
        while up != 0 {
            let d = up.trailing_zeros();
            up &= up - 1;
            uf.union(v, v | (1 << d));
        }
    }
    // per-root accumulators, ordered by first appearance
    let mut slot_of_root: Vec<u32> = vec![u32::MAX; size];
    let mut roots: Vec<u32> = Vec::new();
    let mut ones_acc: Vec<u32> = Vec::new();
    let mut zeros_acc: Vec<u32> = Vec::new();
    let mut choice_acc: Vec<u32> = Vec::new();
    let mut sizes: Vec<u64> = Vec::new();
    let full = n.coord_mask();
    for v in n.vertices() {
        let root = uf.find(v);
        let slot = if slot_of_root[root as usize] == u32::MAX {
            slot_of_root[root as usize] = roots.len() as u32;
            roots.push(root);
            ones_acc.push(full);
            zeros_acc.push(full);
            choice_acc.push(0);
            sizes.push(0);
            roots.len() - 1
        } else {
            slot_of_root[root as usize] as usize
        };
        ones_acc[slot] &= v;
        zeros_acc[slot] &= !v & full;
        choice_acc[slot] |= sample.choice_mask(v);
        sizes[slot] += 1;
    }
    let mut specs = Vec::new();
    for slot in 0..roots.len() {
        let sz = sizes[slot];
        if sz as usize == size || !sz.is_power_of_two() {
            continue;
        }
        let ones = ones_acc[slot];
        let zeros = zeros_acc[slot];
        let free = full & !(ones | zeros);
        if 1u64 << free.count_ones() != sz {
            continue;
        }
        if choice_acc[slot] & !free != 0 {
            continue;
        }
        specs.push(SubcubeSpec::new(ones, free, zeros, n).expect("masks partition by construction"));
    }
    specs
}

/// Builds a sample in which the given subcube spans a whole component:
/// vertices inside choose exactly their k internal directions, each outer
/// boundary vertex draws its k choices from its n-1 non-inward directions,
/// and every other vertex samples normally. Requires `|free| = k`.
pub fn plant_subcube_component(
    n: Dimension,
    k: u32,
    spec: &SubcubeSpec,
    seed: Seed,
) -> Result<KOutSample> {
    if k < 1 || k > n.get() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} out of range 1..={}",
            n.get()
        )));
    }
    if spec.free_count() != k {
        return Err(Error::InvalidSpec(format!(
            "planting needs |free| = k, got |free| = {} and k = {k}",
            spec.free_count()
        )));
    }
    let size = n.vertex_count();
    let mut choices = vec![u32::MAX; size];
    for v in subcube_vertices(spec, n) {
        choices[v as usize] = spec.free_mask();
    }
    let forced = spec.ones_mask() | spec.zeros_mask();
    for w in subcube_outer_boundary(spec, n) {
        let deviation = (w & forced) ^ spec.ones_mask();
        debug_assert_eq!(deviation.count_ones(), 1);
        let inward = deviation.trailing_zeros();
        let mut rng = vertex_stream(seed, TAG_PLANT, n.get(), k as u64, w);
        choices[w as usize] = subset_avoiding(&mut rng, n.get(), k, inward);
    }
    for v in n.vertices() {
        if choices[v as usize] == u32::MAX {
            let mut rng = vertex_stream(seed, TAG_PLANT, n.get(), k as u64, v);
            choices[v as usize] = subset_avoiding(&mut rng, n.get(), k, n.get());
        }
    }
    KOutSample::from_choices(n, k, choices)
}

/// Uniform k-subset of the directions `0..n` excluding `avoid` (pass
/// `avoid >= n` to exclude nothing), via partial Fisher-Yates.
fn subset_avoiding(rng: &mut SplitMix64, n: u32, k: u32, avoid: u32) -> u32 {
    let mut dirs = [0u8; 32];
    let mut len = 0u32;
    for d in 0..n {
        if d != avoid {
            dirs[len as usize] = d as u8;
            len += 1;
        }
    }
    debug_assert!(k <= len);
    let mut mask = 0u32;
    for i in 0..k {
        let j = i + rng.next_below(len - i);
        dirs.swap(i as usize, j as usize);
        mask |= 1 << dirs[i as usize];
    }
    mask
}

/// The connectivity threshold location `log2(n) - 2*log2(log2(n))` in double
/// precision. Defined for n >= 2; at n = 2, 4 and 16 the value is an exact
/// integer, so the ceiling in [`k_one`] is a no-op there.
pub fn k_zero(n: u32) -> Option<f64> {
    if n < 2 {
        return None;
    }
    let l = (n as f64).log2();
    Some(l - 2.0 * l.log2())
}

/// `ceil(k_zero(n)) + 1`, the parameter from which k-connectivity is claimed.
pub fn k_one(n: u32) -> Option<u32> {
    k_zero(n).map(|k0| (k0.ceil() as i64 + 1) as u32)
}
