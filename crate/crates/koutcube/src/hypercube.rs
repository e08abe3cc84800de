//! Deterministic combinatorics of the n-cube.
//!
//! Vertices are raw unsigned integers in `[0, 2^n)`; coordinate `i` is bit
//! `i`, so adjacency is a single XOR with a power of two and arrays can be
//! indexed directly by vertex id.

use crate::{Error, Result};

/// A vertex of the cube, `id < 2^n`.
pub type VertexId = u32;

/// Number of coordinates of the cube, capped at 30 so that `2^n` vertex ids
/// stay addressable and per-vertex arrays stay in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dimension(u32);

impl Dimension {
    pub const MAX: u32 = 30;

    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > Self::MAX {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `2^n`.
    pub fn vertex_count(self) -> usize {
        1usize << self.0
    }

    /// Bitmask with the n coordinate bits set.
    pub fn coord_mask(self) -> u32 {
        (1u32 << self.0) - 1
    }

    pub fn vertices(self) -> impl Iterator<Item = VertexId> {
        0..(1u32 << self.0)
    }

    pub fn contains(self, v: VertexId) -> bool {
        v < (1u32 << self.0)
    }
}

/// The n vertices differing from `v` in exactly one coordinate.
pub fn neighbors(v: VertexId, n: Dimension) -> impl Iterator<Item = VertexId> {
    debug_assert!(n.contains(v));
    (0..n.get()).map(move |d| v ^ (1 << d))
}

/// Bipartition class of a vertex: the parity of its popcount.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

pub fn parity_class(v: VertexId) -> Parity {
    if v.count_ones().is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Canonical code for an edge of the cube: the endpoint whose bit
/// `direction` is 0, plus the direction. Every edge has exactly one code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    base: VertexId,
    direction: u32,
}

impl EdgeId {
    pub fn new(v: VertexId, direction: u32) -> Self {
        EdgeId {
            base: v & !(1 << direction),
            direction,
        }
    }

    pub fn base(self) -> VertexId {
        self.base
    }

    pub fn direction(self) -> u32 {
        self.direction
    }

    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.base, self.base | (1 << self.direction))
    }
}

/// Dense membership bitmap over the 2^n vertex ids.
struct DenseSet {
    words: Vec<u64>,
}

impl DenseSet {
    fn from_slice(n: Dimension, vs: &[VertexId]) -> Self {
        let mut words = vec![0u64; n.vertex_count().div_ceil(64)];
        for &v in vs {
            debug_assert!(n.contains(v));
            words[(v >> 6) as usize] |= 1 << (v & 63);
        }
        DenseSet { words }
    }

    fn contains(&self, v: VertexId) -> bool {
        self.words[(v >> 6) as usize] >> (v & 63) & 1 == 1
    }
}

/// Number of cube edges with one endpoint in `a` and the other in `b`,
/// each unordered edge counted once: `edge_count(a, a, n)` counts the edges
/// inside `a` once each, and for disjoint sets every crossing edge is
/// counted once.
///
/// The handshake identity `d(A, V \ A) = n|A| - 2 d(A, A)` holds for every
/// set; [`boundary_edge_count`] computes the left-hand side directly.
///
/// `a` and `b` must not contain duplicate ids.
pub fn edge_count(a: &[VertexId], b: &[VertexId], n: Dimension) -> u64 {
    let aset = DenseSet::from_slice(n, a);
    let bset = DenseSet::from_slice(n, b);
    let mut ordered = 0u64;
    let mut doubled = 0u64; // ordered adjacent pairs inside a ∩ b
    for &v in a {
        let v_in_b = bset.contains(v);
        for d in 0..n.get() {
            let w = v ^ (1 << d);
            if bset.contains(w) {
                ordered += 1;
                if v_in_b && aset.contains(w) {
                    doubled += 1;
                }
            }
        }
    }
    ordered - doubled / 2
}

/// `d(A, V \ A)`: edges leaving `a`, each counted once.
pub fn boundary_edge_count(a: &[VertexId], n: Dimension) -> u64 {
    let aset = DenseSet::from_slice(n, a);
    let mut count = 0u64;
    for &v in a {
        for d in 0..n.get() {
            if !aset.contains(v ^ (1 << d)) {
                count += 1;
            }
        }
    }
    count
}

/// The edge-isoperimetric lower bound `n*s - s*log2(s)` on `d(A, V \ A)`
/// for any set of size `s`. Subcubes attain it with equality.
pub fn iso_lower_bound(n: Dimension, s: u64) -> f64 {
    debug_assert!(s >= 1 && s <= n.vertex_count() as u64);
    let s_f = s as f64;
    n.get() as f64 * s_f - s_f * s_f.log2()
}

/// `min{f(a), f(b)}` with `f(s) = n*s - s*log2(s)`: a valid bound for any set
/// whose size lies in `[a, b]`, since `f` has a single interior maximum.
pub fn iso_lower_bound_interval(n: Dimension, a: u64, b: u64) -> f64 {
    debug_assert!(a <= b);
    iso_lower_bound(n, a).min(iso_lower_bound(n, b))
}

/// A subcube given by the coordinates forced to 1, the free coordinates,
/// and the coordinates forced to 0. The three masks partition `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubcubeSpec {
    ones: u32,
    free: u32,
    zeros: u32,
}

impl SubcubeSpec {
    pub fn new(ones: u32, free: u32, zeros: u32, n: Dimension) -> Result<Self> {
        let full = n.coord_mask();
        if ones & free != 0 || ones & zeros != 0 || free & zeros != 0 {
            return Err(Error::InvalidSpec(format!(
                "coordinate masks overlap: ones={ones:#b} free={free:#b} zeros={zeros:#b}"
            )));
        }
        if ones | free | zeros != full {
            return Err(Error::InvalidSpec(format!(
                "coordinate masks do not cover [0, {})",
                n.get()
            )));
        }
        Ok(SubcubeSpec { ones, free, zeros })
    }

    /// Builds a spec from coordinate lists; unlisted coordinates are forced
    /// to 0.
    pub fn from_coords(ones: &[u32], free: &[u32], n: Dimension) -> Result<Self> {
        let mut ones_mask = 0u32;
        let mut free_mask = 0u32;
        for (coords, mask) in [(ones, &mut ones_mask), (free, &mut free_mask)] {
            for &c in coords {
                if c >= n.get() {
                    return Err(Error::InvalidSpec(format!(
                        "coordinate {c} out of range for n={}",
                        n.get()
                    )));
                }
                if *mask >> c & 1 == 1 {
                    return Err(Error::InvalidSpec(format!("repeated coordinate {c}")));
                }
                *mask |= 1 << c;
            }
        }
        let zeros = n.coord_mask() & !(ones_mask | free_mask);
        Self::new(ones_mask, free_mask, zeros, n)
    }

    pub fn ones_mask(self) -> u32 {
        self.ones
    }

    pub fn free_mask(self) -> u32 {
        self.free
    }

    pub fn zeros_mask(self) -> u32 {
        self.zeros
    }

    /// Number of coordinates forced to 1 (the level the subcube lies at).
    pub fn level(self) -> u32 {
        self.ones.count_ones()
    }

    pub fn free_count(self) -> u32 {
        self.free.count_ones()
    }

    /// `2^|free|`.
    pub fn vertex_count(self) -> usize {
        1usize << self.free_count()
    }

    pub fn contains(self, v: VertexId) -> bool {
        v & (self.ones | self.zeros) == self.ones
    }

    /// Sorted coordinate lists `(ones, free, zeros)`.
    pub fn coordinate_lists(self) -> (Vec<u32>, Vec<u32>, Vec<u32>) {
        let bits = |mask: u32| (0..32).filter(|&c| mask >> c & 1 == 1).collect();
        (bits(self.ones), bits(self.free), bits(self.zeros))
    }
}

/// The vertices spanned by the subcube, ascending.
pub fn subcube_vertices(spec: &SubcubeSpec, n: Dimension) -> Vec<VertexId> {
    debug_assert_eq!(spec.ones | spec.free | spec.zeros, n.coord_mask());
    let mut out = Vec::with_capacity(spec.vertex_count());
    let free = spec.free_mask();
    let mut sub = 0u32;
    loop {
        out.push(spec.ones_mask() | sub);
        if sub == free {
            break;
        }
        sub = sub.wrapping_sub(free) & free;
    }
    out
}

/// The outer vertex boundary `N(V_H) ⊆ V \ V_H`, ascending. It has size
/// `2^|free| * (n - |free|)` and each member has exactly one neighbor inside
/// the subcube (its single deviating forced coordinate).
pub fn subcube_outer_boundary(spec: &SubcubeSpec, n: Dimension) -> Vec<VertexId> {
    let forced = spec.ones_mask() | spec.zeros_mask();
    let mut out = Vec::with_capacity(spec.vertex_count() * forced.count_ones() as usize);
    for v in subcube_vertices(spec, n) {
        let mut rest = forced;
        while rest != 0 {
            let d = rest.trailing_zeros();
            rest &= rest - 1;
            out.push(v ^ (1 << d));
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(n: u32) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn dimension_bounds() {
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(31).is_err());
        assert_eq!(dim(30).vertex_count(), 1 << 30);
        assert_eq!(dim(3).coord_mask(), 0b111);
    }

    #[test]
    fn neighbors_examples() {
        let collect = |v, n| neighbors(v, dim(n)).collect::<Vec<_>>();
        assert_eq!(collect(0, 3), vec![1, 2, 4]);
        assert_eq!(collect(3, 2), vec![2, 1]);
        assert_eq!(collect(5, 4), vec![4, 7, 1, 13]);
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_class(0), Parity::Even);
        assert_eq!(parity_class(3), Parity::Even);
        assert_eq!(parity_class(7), Parity::Odd);
        assert_eq!(parity_class(7).bit(), 1);
    }

    #[test]
    fn edge_id_canonical() {
        let e = EdgeId::new(5, 0); // 5 = 0b101 has bit 0 set; base drops it
        assert_eq!(e.base(), 4);
        assert_eq!(e.endpoints(), (4, 5));
        assert_eq!(EdgeId::new(4, 0), e);
    }

    #[test]
    fn edge_count_singleton_boundary() {
        for n_raw in 1..=6 {
            let n = dim(n_raw);
            let rest: Vec<VertexId> = n.vertices().filter(|&v| v != 0).collect();
            assert_eq!(edge_count(&[0], &rest, n), n_raw as u64);
            assert_eq!(boundary_edge_count(&[0], n), n_raw as u64);
        }
    }

    #[test]
    fn edge_count_subcube_inner() {
        // {0,1,2,3} spans a 4-cycle inside Q^3.
        let a = [0, 1, 2, 3];
        assert_eq!(edge_count(&a, &a, dim(3)), 4);
    }

    #[test]
    fn edge_count_full_cube() {
        for n_raw in 1..=8 {
            let n = dim(n_raw);
            let all: Vec<VertexId> = n.vertices().collect();
            assert_eq!(
                edge_count(&all, &all, n),
                n_raw as u64 * (n.vertex_count() as u64 / 2)
            );
        }
    }

    #[test]
    fn iso_bound_examples() {
        assert_eq!(iso_lower_bound(dim(3), 1), 3.0);
        assert_eq!(iso_lower_bound(dim(3), 8), 0.0);
        assert_eq!(iso_lower_bound(dim(4), 4), 8.0);
        // The 2-subcube {0,1,2,3} in Q^4 attains the bound exactly.
        assert_eq!(boundary_edge_count(&[0, 1, 2, 3], dim(4)), 8);
    }

    #[test]
    fn iso_interval_form() {
        let n = dim(4);
        let lo = iso_lower_bound_interval(n, 2, 12);
        assert_eq!(lo, iso_lower_bound(n, 2).min(iso_lower_bound(n, 12)));
        assert!(lo <= iso_lower_bound(n, 7));
    }

    #[test]
    fn subcube_example_n3() {
        let n = dim(3);
        let spec = SubcubeSpec::from_coords(&[], &[0], n).unwrap();
        assert_eq!(subcube_vertices(&spec, n), vec![0, 1]);
        assert_eq!(subcube_outer_boundary(&spec, n), vec![2, 3, 4, 5]);
    }

    #[test]
    fn subcube_full_cube() {
        let n = dim(2);
        let spec = SubcubeSpec::from_coords(&[], &[0, 1], n).unwrap();
        assert_eq!(subcube_vertices(&spec, n), vec![0, 1, 2, 3]);
        assert!(subcube_outer_boundary(&spec, n).is_empty());
    }

    #[test]
    fn subcube_level_one_boundary_size() {
        let n = dim(4);
        let spec = SubcubeSpec::from_coords(&[2], &[0, 1], n).unwrap();
        assert_eq!(spec.level(), 1);
        assert_eq!(subcube_vertices(&spec, n).len(), 4);
        assert_eq!(subcube_outer_boundary(&spec, n).len(), 4 * 2);
    }

    #[test]
    fn subcube_spec_rejects_malformed() {
        let n = dim(3);
        assert!(SubcubeSpec::new(0b001, 0b001, 0b110, n).is_err()); // overlap
        assert!(SubcubeSpec::new(0b001, 0b010, 0b000, n).is_err()); // gap
        assert!(SubcubeSpec::from_coords(&[3], &[], n).is_err()); // out of range
        assert!(SubcubeSpec::from_coords(&[1, 1], &[], n).is_err()); // repeat
    }

    #[test]
    fn boundary_vertices_have_one_inside_neighbor() {
        let n = dim(5);
        let spec = SubcubeSpec::from_coords(&[1, 4], &[0, 2], n).unwrap();
        let inside = subcube_vertices(&spec, n);
        for w in subcube_outer_boundary(&spec, n) {
            let inside_neighbors = neighbors(w, n)
                .filter(|x| inside.binary_search(x).is_ok())
                .count();
            assert_eq!(inside_neighbors, 1, "boundary vertex {w}");
        }
    }

    #[test]
    fn exhaustive_isoperimetry_tiny() {
        // Every nonempty A ⊆ V for n <= 4 satisfies the bound, with the
        // documented 1e-9 slack against exact-equality cases.
        for n_raw in 1..=4u32 {
            let n = dim(n_raw);
            let size = n.vertex_count();
            for mask in 1u32..(1u32 << size) {
                let a: Vec<VertexId> = (0..size as u32).filter(|&v| mask >> v & 1 == 1).collect();
                let d = boundary_edge_count(&a, n) as f64;
                let bound = iso_lower_bound(n, a.len() as u64);
                assert!(d >= bound - 1e-9, "n={n_raw} A={a:?} d={d} bound={bound}");
            }
        }
    }

    proptest! {
        #[test]
        fn neighbors_are_symmetric(n_raw in 1u32..=10, v_seed in 0u32..1024) {
            let n = dim(n_raw);
            let v = v_seed & n.coord_mask();
            let nb: Vec<VertexId> = neighbors(v, n).collect();
            prop_assert_eq!(nb.len(), n_raw as usize);
            for w in nb {
                prop_assert!(neighbors(w, n).any(|x| x == v));
            }
        }

        #[test]
        fn edges_join_opposite_parities(n_raw in 1u32..=10, v_seed in 0u32..1024, d_seed in 0u32..30) {
            let n = dim(n_raw);
            let v = v_seed & n.coord_mask();
            let d = d_seed % n_raw;
            let w = v ^ (1 << d);
            prop_assert!(parity_class(v) != parity_class(w));
        }

        #[test]
        fn handshake_identity(n_raw in 1u32..=8, mask in 0u64..u64::MAX) {
            let n = dim(n_raw);
            let a: Vec<VertexId> = n.vertices()
                .filter(|&v| mask >> (v % 64) & 1 == 1 || v % 7 == (mask % 7) as u32)
                .collect();
            prop_assume!(!a.is_empty());
            let inner = edge_count(&a, &a, n);
            let out = boundary_edge_count(&a, n);
            prop_assert_eq!(out, n_raw as u64 * a.len() as u64 - 2 * inner);
        }

        #[test]
        fn subcube_count_matches(free_bits in 0u32..=5, ones_bits in 0u32..=3) {
            let n = dim(8);
            let free: Vec<u32> = (0..free_bits).collect();
            let ones: Vec<u32> = (free_bits..free_bits + ones_bits).collect();
            let spec = SubcubeSpec::from_coords(&ones, &free, n).unwrap();
            let vs = subcube_vertices(&spec, n);
            prop_assert_eq!(vs.len(), 1 << free_bits);
            for &v in &vs {
                prop_assert!(spec.contains(v));
            }
            let boundary = subcube_outer_boundary(&spec, n);
            prop_assert_eq!(boundary.len(), (1usize << free_bits) * (8 - free_bits) as usize);
        }
    }
}
