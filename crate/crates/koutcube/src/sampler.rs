//! Random generation with reproducible splittable seeding.
//!
//! Every draw in the crate comes from a [`SplitMix64`] stream derived from a
//! label sequence `(master seed, tag, n, level, vertex, ...)`. Streams are
//! derived, never shared, so generation can run in any order — or in
//! parallel — and still produce bit-identical samples for a given seed.

use std::io::{Read, Write};

use crate::hypercube::{parity_class, Dimension, Parity, VertexId};
use crate::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

// Stream tags: one per draw family, so unrelated draws never share a stream.
pub(crate) const TAG_BASE: u64 = 1; // the base choices of sample_kout / sample_one_out
pub(crate) const TAG_EXTRA: u64 = 2; // the added choice of extend_half / staged_sample
pub(crate) const TAG_PLANT: u64 = 3; // plant_subcube_component draws
pub(crate) const TAG_WALK: u64 = 4; // biased-walk simulation
pub(crate) const TAG_TRIAL: u64 = 5; // per-trial seed derivation in experiments

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splitmix64 generator whose state is derived by absorbing a label
/// sequence. Two streams with different labels are independent for all
/// practical purposes; the same labels always give the same stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn derive(labels: &[u64]) -> Self {
        SplitMix64 {
            state: derive_key(labels),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw from `[0, bound)`, exact (rejection sampling, no modulo
    /// bias).
    pub fn next_below(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        let b = bound as u64;
        let threshold = b.wrapping_neg() % b;
        loop {
            let x = self.next_u64();
            let m = (x as u128) * (b as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u32;
            }
        }
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Mixes a label sequence down to one 64-bit key.
pub fn derive_key(labels: &[u64]) -> u64 {
    let mut acc = 0u64;
    for &l in labels {
        acc = mix64(acc.wrapping_add(GOLDEN_GAMMA).wrapping_add(l));
    }
    acc
}

/// Master seed of an experiment; every stream is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed { master }
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Seed { master }
    }
}

pub(crate) fn vertex_stream(seed: Seed, tag: u64, n: u32, level: u64, v: VertexId) -> SplitMix64 {
    SplitMix64::derive(&[seed.master, tag, n as u64, level, v as u64])
}

/// Uniform k-subset of the n directions as a bitmask, via partial
/// Fisher-Yates over the direction list.
fn uniform_direction_subset(rng: &mut SplitMix64, n: u32, k: u32) -> u32 {
    let mut dirs = [0u8; 32];
    for (i, d) in dirs.iter_mut().enumerate().take(n as usize) {
        *d = i as u8;
    }
    let mut mask = 0u32;
    for i in 0..k {
        let j = i + rng.next_below(n - i);
        dirs.swap(i as usize, j as usize);
        mask |= 1 << dirs[i as usize];
    }
    mask
}

/// One uniform direction among those not set in `have`, as a single-bit mask.
fn pick_unchosen(rng: &mut SplitMix64, n: u32, have: u32) -> u32 {
    let open = n - have.count_ones();
    debug_assert!(open > 0);
    let r = rng.next_below(open);
    let mut seen = 0;
    for d in 0..n {
        if have >> d & 1 == 0 {
            if seen == r {
                return 1 << d;
            }
            seen += 1;
        }
    }
    unreachable!("fewer unchosen directions than counted")
}

/// Per-vertex direction choices, one bitmask word per vertex, with no
/// constraint on how many directions each vertex holds. The undirected graph
/// it induces has an edge wherever at least one endpoint chose it; that view
/// is an implicit oracle, never materialized as an edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceGraph {
    n: Dimension,
    choices: Vec<u32>,
}

impl ChoiceGraph {
    pub fn new(n: Dimension, choices: Vec<u32>) -> Result<Self> {
        if choices.len() != n.vertex_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} choice masks, got {}",
                n.vertex_count(),
                choices.len()
            )));
        }
        if choices.iter().any(|&m| m & !n.coord_mask() != 0) {
            return Err(Error::InvalidParameter(
                "choice mask uses a direction out of range".into(),
            ));
        }
        Ok(ChoiceGraph { n, choices })
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn choices(&self) -> &[u32] {
        &self.choices
    }

    pub fn choice_mask(&self, v: VertexId) -> u32 {
        self.choices[v as usize]
    }

    pub fn undirected(&self) -> UndirectedView<'_> {
        UndirectedView::new(self.n, &self.choices)
    }
}

/// A k-out sample: every vertex holds exactly k chosen directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KOutSample {
    k: u32,
    graph: ChoiceGraph,
}

impl KOutSample {
    pub fn from_choices(n: Dimension, k: u32, choices: Vec<u32>) -> Result<Self> {
        if k < 1 || k > n.get() {
            return Err(Error::InvalidParameter(format!(
                "k = {k} out of range 1..={}",
                n.get()
            )));
        }
        let graph = ChoiceGraph::new(n, choices)?;
        if let Some(v) = graph.choices.iter().position(|m| m.count_ones() != k) {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} holds {} directions, expected {k}",
                graph.choices[v].count_ones()
            )));
        }
        Ok(KOutSample { k, graph })
    }

    pub fn n(&self) -> Dimension {
        self.graph.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn choices(&self) -> &[u32] {
        &self.graph.choices
    }

    pub fn choice_mask(&self, v: VertexId) -> u32 {
        self.graph.choice_mask(v)
    }

    pub fn graph(&self) -> &ChoiceGraph {
        &self.graph
    }

    pub fn into_graph(self) -> ChoiceGraph {
        self.graph
    }

    pub fn undirected(&self) -> UndirectedView<'_> {
        self.graph.undirected()
    }

    /// Binary dump: magic, n, k, seed header, then `2^n` little-endian
    /// 32-bit choice masks.
    pub fn write_to<W: Write>(&self, seed: Seed, out: &mut W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&self.n().get().to_le_bytes())?;
        out.write_all(&self.k.to_le_bytes())?;
        out.write_all(&seed.master.to_le_bytes())?;
        for &m in self.choices() {
            out.write_all(&m.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(inp: &mut R) -> Result<(Self, Seed)> {
        let mut magic = [0u8; 8];
        inp.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::MalformedFile("bad magic".into()));
        }
        let mut word = [0u8; 4];
        inp.read_exact(&mut word)?;
        let n_raw = u32::from_le_bytes(word);
        inp.read_exact(&mut word)?;
        let k = u32::from_le_bytes(word);
        let mut dword = [0u8; 8];
        inp.read_exact(&mut dword)?;
        let seed = Seed::new(u64::from_le_bytes(dword));
        let n =
            Dimension::new(n_raw).map_err(|_| Error::MalformedFile(format!("bad n = {n_raw}")))?;
        let mut choices = vec![0u32; n.vertex_count()];
        for m in choices.iter_mut() {
            inp.read_exact(&mut word)?;
            *m = u32::from_le_bytes(word);
        }
        let sample = Self::from_choices(n, k, choices)
            .map_err(|e| Error::MalformedFile(format!("inconsistent payload: {e}")))?;
        Ok((sample, seed))
    }
}

impl TryFrom<ChoiceGraph> for KOutSample {
    type Error = Error;

    fn try_from(graph: ChoiceGraph) -> Result<Self> {
        let k = graph.choices.first().map_or(0, |m| m.count_ones());
        KOutSample::from_choices(graph.n, k, graph.choices)
    }
}

const MAGIC: &[u8; 8] = b"KOUTCUBE";

/// Adjacency oracle for the undirected graph of a choice set: the edge
/// `(v, v ^ 2^d)` is present iff at least one endpoint chose direction `d`.
#[derive(Debug, Clone, Copy)]
pub struct UndirectedView<'a> {
    n: Dimension,
    choices: &'a [u32],
}

impl<'a> UndirectedView<'a> {
    pub fn new(n: Dimension, choices: &'a [u32]) -> Self {
        assert_eq!(choices.len(), n.vertex_count());
        UndirectedView { n, choices }
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    /// Directions along which `v` has an undirected edge.
    pub fn neighbor_mask(&self, v: VertexId) -> u32 {
        let mut m = self.choices[v as usize];
        for d in 0..self.n.get() {
            m |= (self.choices[(v ^ (1 << d)) as usize] >> d & 1) << d;
        }
        m
    }

    pub fn adjacent(&self, v: VertexId, d: u32) -> bool {
        (self.choices[v as usize] | self.choices[(v ^ (1 << d)) as usize]) >> d & 1 == 1
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.neighbor_mask(v).count_ones()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.n.vertices().map(|v| self.degree(v)).collect()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let mask = self.neighbor_mask(v);
        (0..self.n.get()).filter_map(move |d| {
            if mask >> d & 1 == 1 {
                Some(v ^ (1 << d))
            } else {
                None
            }
        })
    }

    /// Total number of undirected edges (deduplicated).
    pub fn edge_count(&self) -> u64 {
        let sum: u64 = self.n.vertices().map(|v| self.degree(v) as u64).sum();
        sum / 2
    }
}

/// Samples the k-out model: every vertex independently picks a uniform
/// k-subset of its n incident directions.
pub fn sample_kout(n: Dimension, k: u32, seed: Seed) -> Result<KOutSample> {
    if k < 1 || k > n.get() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} out of range 1..={}",
            n.get()
        )));
    }
    let mut choices = vec![0u32; n.vertex_count()];
    for v in n.vertices() {
        let mut rng = vertex_stream(seed, TAG_BASE, n.get(), k as u64, v);
        choices[v as usize] = uniform_direction_subset(&mut rng, n.get(), k);
    }
    Ok(KOutSample {
        k,
        graph: ChoiceGraph { n, choices },
    })
}

/// The 1-out functional digraph: each vertex points along one uniform
/// direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalMap {
    n: Dimension,
    dir: Vec<u8>,
}

impl FunctionalMap {
    pub fn from_directions(n: Dimension, dir: Vec<u8>) -> Result<Self> {
        if dir.len() != n.vertex_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} directions, got {}",
                n.vertex_count(),
                dir.len()
            )));
        }
        if dir.iter().any(|&d| d as u32 >= n.get()) {
            return Err(Error::InvalidParameter(
                "direction out of range".to_string(),
            ));
        }
        Ok(FunctionalMap { n, dir })
    }

    pub fn n(&self) -> Dimension {
        self.n
    }

    pub fn direction(&self, v: VertexId) -> u32 {
        self.dir[v as usize] as u32
    }

    /// The chosen out-neighbor `f(v) = v ^ 2^dir(v)`.
    pub fn f(&self, v: VertexId) -> VertexId {
        v ^ (1 << self.dir[v as usize])
    }

    /// The same choices as a 1-out sample.
    pub fn to_kout(&self) -> KOutSample {
        let choices = self.dir.iter().map(|&d| 1u32 << d).collect();
        KOutSample {
            k: 1,
            graph: ChoiceGraph {
                n: self.n,
                choices,
            },
        }
    }
}

pub fn sample_one_out(n: Dimension, seed: Seed) -> FunctionalMap {
    let mut dir = vec![0u8; n.vertex_count()];
    for v in n.vertices() {
        let mut rng = vertex_stream(seed, TAG_BASE, n.get(), 1, v);
        dir[v as usize] = rng.next_below(n.get()) as u8;
    }
    FunctionalMap { n, dir }
}

/// Adds one uniformly chosen new direction to every vertex of the given
/// parity class, drawn from the directions the vertex has not chosen yet.
/// The other class is untouched. Applying this to class Even and then Odd on
/// a 1-out base yields a graph distributed as a 2-out sample.
pub fn extend_half(base: &ChoiceGraph, class: Parity, seed: Seed) -> Result<ChoiceGraph> {
    let n = base.n();
    let mut choices = base.choices().to_vec();
    for v in n.vertices() {
        if parity_class(v) != class {
            continue;
        }
        let have = choices[v as usize];
        let level = have.count_ones();
        if level >= n.get() {
            return Err(Error::NoRoom);
        }
        let mut rng = vertex_stream(seed, TAG_EXTRA, n.get(), level as u64, v);
        choices[v as usize] = have | pick_unchosen(&mut rng, n.get(), have);
    }
    Ok(ChoiceGraph { n, choices })
}

/// 1-out base extended on the even class and then on the odd class: the
/// parity-staged construction of a 2-out sample.
pub fn two_out_via_parity_stages(n: Dimension, seed: Seed) -> Result<KOutSample> {
    let base = sample_one_out(n, seed).to_kout().into_graph();
    let half = extend_half(&base, Parity::Even, seed)?;
    let full = extend_half(&half, Parity::Odd, seed)?;
    KOutSample::try_from(full)
}

/// Three-phase staged build. `g0` is a (k-1)-out sample; every vertex's k-th
/// choice is drawn from its unchosen directions, landing in phase 1 for
/// vertices the predicate marks active and in phase 2 otherwise. The merged
/// graph is distributed exactly as a k-out sample for any predicate, because
/// a vertex's k-th draw never depends on the phase it lands in.
#[derive(Debug, Clone)]
pub struct StagedSample {
    g0: KOutSample,
    extra: Vec<u8>,
    active: Vec<bool>,
}

pub fn staged_sample<P>(n: Dimension, k: u32, active_predicate: P, seed: Seed) -> Result<StagedSample>
where
    P: FnOnce(&KOutSample) -> Vec<bool>,
{
    if k < 2 || k > n.get() {
        return Err(Error::InvalidParameter(format!(
            "staged build needs 2 <= k <= n, got k = {k}"
        )));
    }
    let g0 = sample_kout(n, k - 1, seed)?;
    let active = active_predicate(&g0);
    if active.len() != n.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "active predicate returned {} flags for {} vertices",
            active.len(),
            n.vertex_count()
        )));
    }
    let mut extra = vec![0u8; n.vertex_count()];
    for v in n.vertices() {
        let have = g0.choice_mask(v);
        let mut rng = vertex_stream(seed, TAG_EXTRA, n.get(), (k - 1) as u64, v);
        extra[v as usize] = pick_unchosen(&mut rng, n.get(), have).trailing_zeros() as u8;
    }
    Ok(StagedSample { g0, extra, active })
}

impl StagedSample {
    pub fn n(&self) -> Dimension {
        self.g0.n()
    }

    /// The final parameter k (the base holds k-1 choices).
    pub fn k(&self) -> u32 {
        self.g0.k() + 1
    }

    pub fn g0(&self) -> &KOutSample {
        &self.g0
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// The k-th direction of `v`, regardless of the phase it lands in.
    pub fn extra_direction(&self, v: VertexId) -> u32 {
        self.extra[v as usize] as u32
    }

    /// Choices after phase 1: active vertices hold their k-th direction,
    /// passive vertices still hold k-1.
    pub fn g1(&self) -> ChoiceGraph {
        let n = self.n();
        let choices = n
            .vertices()
            .map(|v| {
                let base = self.g0.choice_mask(v);
                if self.active[v as usize] {
                    base | 1 << self.extra[v as usize]
                } else {
                    base
                }
            })
            .collect();
        ChoiceGraph { n, choices }
    }

    /// The completed k-out sample.
    pub fn g2(&self) -> KOutSample {
        let n = self.n();
        let choices = n
            .vertices()
            .map(|v| self.g0.choice_mask(v) | 1 << self.extra[v as usize])
            .collect();
        KOutSample {
            k: self.k(),
            graph: ChoiceGraph { n, choices },
        }
    }
}

/// Draws uniform random s-subsets of the `2^n` vertex ids, reusing one
/// permutation buffer so each draw costs O(s).
pub struct SubsetSampler {
    perm: Vec<u32>,
    touched: Vec<(u32, u32)>,
}

impl SubsetSampler {
    pub fn new(n: Dimension) -> Self {
        SubsetSampler {
            perm: n.vertices().collect(),
            touched: Vec::new(),
        }
    }

    pub fn draw(&mut self, s: usize, rng: &mut SplitMix64) -> Vec<VertexId> {
        assert!(s <= self.perm.len());
        for &(i, j) in self.touched.iter().rev() {
            self.perm.swap(i as usize, j as usize);
        }
        self.touched.clear();
        let len = self.perm.len() as u32;
        for i in 0..s as u32 {
            let j = i + rng.next_below(len - i);
            self.perm.swap(i as usize, j as usize);
            self.touched.push((i, j));
        }
        self.perm[..s].to_vec()
    }
}
