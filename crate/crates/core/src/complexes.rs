//! Threshold schedule and filtered clique complexes over extended relevance.
//!
//! A set of neurons forms a simplex at threshold `t` when every ordered pair
//! `a > b` in it has extended relevance `r(a, b) >= t`. Each simplex is
//! stored once with the first schedule index at which it appears, so the
//! whole filtration lives in one sorted list.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use arrayvec::ArrayVec;
use rayon::prelude::*;
use thiserror::Error;

use crate::relevance::{RelevanceKind, RelevanceMatrix};
use crate::weightnet::NeuronId;
use crate::{FiltIndex, NUM_THRESHOLDS};

/// Largest simplex dimension built.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("relevance {0} is outside [0, 1]")]
    Domain(f64),
    #[error("filtration index {0} is outside 1..=64")]
    Index(usize),
    #[error("only max_dim = 2 is supported (got {0})")]
    MaxDim(usize),
    #[error("clique complexes are built from extended relevance")]
    NotExtended,
    #[error("simplex {0:?} has {1} vertices; 1 to 3 are supported")]
    SimplexSize(Vec<usize>, usize),
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("face {face:?} of {simplex:?} is missing or enters later")]
    MissingFace {
        face: Vec<usize>,
        simplex: Vec<usize>,
    },
    #[error("triangle {0:?} does not enter with its latest edge")]
    FlagRule(Vec<usize>),
    #[error("simplices are not in (filt_index, dim, vertices) order at position {0}")]
    Order(usize),
    #[error("duplicate simplex {0:?}")]
    Duplicate(Vec<usize>),
}

/// The 64 decreasing relevance thresholds: nine steps per decade from 1.0
/// down to 1e-7.
#[derive(Debug, Clone, PartialEq)]
pub struct FiltrationSchedule {
    thresholds: [f64; NUM_THRESHOLDS],
}

impl Default for FiltrationSchedule {
    fn default() -> Self {
        threshold_schedule()
    }
}

/// `t_n = (10 - l) / 10^(m + 1)` with `m = (n - 1) / 9`, `l = (n - 1) % 9`.
///
/// Both operands are exact integers in f64, so each threshold is the
/// correctly rounded decimal (`t_11` is exactly the literal `0.09`).
pub fn threshold_schedule() -> FiltrationSchedule {
    let mut thresholds = [0.0; NUM_THRESHOLDS];
    for (k, t) in thresholds.iter_mut().enumerate() {
        let (m, l) = (k / 9, k % 9);
        *t = (10 - l) as f64 / 10u64.pow(m as u32 + 1) as f64;
    }
    FiltrationSchedule { thresholds }
}

impl FiltrationSchedule {
    /// Threshold for 1-based index `n`.
    pub fn threshold(&self, n: FiltIndex) -> f64 {
        self.thresholds[n as usize - 1]
    }

    pub fn thresholds(&self) -> &[f64; NUM_THRESHOLDS] {
        &self.thresholds
    }

    /// Smallest `n` with `t_n <= r`, or `None` below the last threshold.
    pub fn index_of(&self, r: f64) -> Result<Option<FiltIndex>, ComplexError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(ComplexError::Domain(r));
        }
        let pos = self.thresholds.partition_point(|&t| t > r);
        Ok((pos < NUM_THRESHOLDS).then_some(pos as FiltIndex + 1))
    }
}

/// Schedule index at which relevance `r` first passes the threshold.
pub fn threshold_index(r: f64) -> Result<Option<FiltIndex>, ComplexError> {
    threshold_schedule().index_of(r)
}

/// A simplex of dimension at most 2 with its entry index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    vertices: ArrayVec<NeuronId, 3>,
    pub filt_index: FiltIndex,
}

impl Simplex {
    /// Sorts the vertices ascending and checks size and distinctness.
    pub fn new(vertices: &[usize], filt_index: FiltIndex) -> Result<Self, ComplexError> {
        if vertices.is_empty() || vertices.len() > MAX_DIM + 1 {
            return Err(ComplexError::SimplexSize(vertices.to_vec(), vertices.len()));
        }
        let mut sorted: ArrayVec<NeuronId, 3> = vertices.iter().map(|&v| NeuronId(v)).collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ComplexError::RepeatedVertex(vertices.to_vec()));
        }
        if filt_index == 0 || filt_index as usize > NUM_THRESHOLDS {
            return Err(ComplexError::Index(filt_index as usize));
        }
        Ok(Self {
            vertices: sorted,
            filt_index,
        })
    }

    fn from_sorted(vertices: &[usize], filt_index: FiltIndex) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self {
            vertices: vertices.iter().map(|&v| NeuronId(v)).collect(),
            filt_index,
        }
    }

    pub fn vertices(&self) -> &[NeuronId] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn key(&self) -> SimplexKey {
        let mut k = [usize::MAX; 3];
        for (slot, v) in k.iter_mut().zip(&self.vertices) {
            *slot = v.0;
        }
        SimplexKey(k)
    }

    /// Codimension-1 faces as vertex keys.
    pub fn facets(&self) -> impl Iterator<Item = SimplexKey> + '_ {
        let len = if self.dim() == 0 {
            0
        } else {
            self.vertices.len()
        };
        (0..len).map(move |skip| {
            let mut k = [usize::MAX; 3];
            for (slot, v) in k.iter_mut().zip(
                self.vertices
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, v)| v),
            ) {
                *slot = v.0;
            }
            SimplexKey(k)
        })
    }

    fn sort_key(&self) -> (FiltIndex, usize, SimplexKey) {
        (self.filt_index, self.dim(), self.key())
    }

    /// Vertices joined by `-`, e.g. `3-7`.
    pub fn label(&self) -> String {
        self.vertices
            .iter()
            .map(|v| v.0.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Vertex tuple of a simplex padded with `usize::MAX`; identifies a simplex
/// regardless of its filtration index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexKey(pub [usize; 3]);

impl SimplexKey {
    pub fn from_vertices(vertices: &[usize]) -> Self {
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let mut k = [usize::MAX; 3];
        for (slot, v) in k.iter_mut().zip(sorted) {
            *slot = v;
        }
        SimplexKey(k)
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied().take_while(|&v| v != usize::MAX)
    }
}

/// Simplices sorted by `(filt_index, dim, vertices)`; every prefix ending at
/// an index boundary is the complex at that threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
    n_vertices: usize,
}

impl FilteredComplex {
    /// Sorts the simplices and checks face closure.
    pub fn from_simplices(
        n_vertices: usize,
        mut simplices: Vec<Simplex>,
    ) -> Result<Self, ComplexError> {
        simplices.sort();
        let fc = Self {
            simplices,
            n_vertices,
        };
        fc.validate()?;
        Ok(fc)
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Position of each simplex in the sorted list.
    pub fn positions(&self) -> HashMap<SimplexKey, usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(p, s)| (s.key(), p))
            .collect()
    }

    /// Number of simplices with `filt_index <= n`.
    pub fn prefix_len(&self, n: FiltIndex) -> usize {
        self.simplices.partition_point(|s| s.filt_index <= n)
    }

    /// Checks ordering, uniqueness and face closure.
    pub fn validate(&self) -> Result<(), ComplexError> {
        if let Some(p) = self.simplices.windows(2).position(|w| w[0] > w[1]) {
            return Err(ComplexError::Order(p + 1));
        }
        let index: HashMap<SimplexKey, FiltIndex> = self
            .simplices
            .iter()
            .map(|s| (s.key(), s.filt_index))
            .collect();
        if index.len() != self.simplices.len() {
            let mut seen = BTreeSet::new();
            let dup = self
                .simplices
                .iter()
                .find(|s| !seen.insert(s.key()))
                .unwrap();
            return Err(ComplexError::Duplicate(dup.key().vertices().collect()));
        }
        for s in &self.simplices {
            for face in s.facets() {
                match index.get(&face) {
                    Some(&f) if f <= s.filt_index => {}
                    _ => {
                        return Err(ComplexError::MissingFace {
                            face: face.vertices().collect(),
                            simplex: s.key().vertices().collect(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks that every triangle enters exactly with its latest edge and
    /// that every vertex triple whose edges all exist is filled.
    pub fn check_flag_rule(&self) -> Result<(), ComplexError> {
        let index: HashMap<SimplexKey, FiltIndex> = self
            .simplices
            .iter()
            .map(|s| (s.key(), s.filt_index))
            .collect();
        for s in self.simplices.iter().filter(|s| s.dim() == 2) {
            let latest = s.facets().filter_map(|f| index.get(&f).copied()).max();
            if latest != Some(s.filt_index) {
                return Err(ComplexError::FlagRule(s.key().vertices().collect()));
            }
        }
        let mut lower: HashMap<usize, Vec<usize>> = HashMap::new();
        for s in self.simplices.iter().filter(|s| s.dim() == 1) {
            lower
                .entry(s.vertices[1].0)
                .or_default()
                .push(s.vertices[0].0);
        }
        for (&a, below) in &lower {
            for (x, &b) in below.iter().enumerate() {
                for &c in &below[x + 1..] {
                    let (lo, hi) = (b.min(c), b.max(c));
                    let closed = index.contains_key(&SimplexKey([lo, hi, usize::MAX]));
                    if closed && !index.contains_key(&SimplexKey([lo, hi, a])) {
                        return Err(ComplexError::FlagRule(vec![lo, hi, a]));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Simplices present at schedule index `n`: the prefix with `filt_index <= n`.
pub fn complex_at(fc: &FilteredComplex, n: FiltIndex) -> Result<&[Simplex], ComplexError> {
    if n == 0 || n as usize > NUM_THRESHOLDS {
        return Err(ComplexError::Index(n as usize));
    }
    Ok(&fc.simplices[..fc.prefix_len(n)])
}

/// Edge entry index for every pair `a > b`, indexed `a * n + b`.
fn edge_indices(r: &RelevanceMatrix) -> Vec<Option<FiltIndex>> {
    let n = r.n();
    let schedule = threshold_schedule();
    let mut idx = vec![None; n * n];
    for a in 0..n {
        for b in 0..a {
            // values come from a validated matrix, so they are in [0, 1]
            idx[a * n + b] = schedule.index_of(r.get(a, b)).ok().flatten();
        }
    }
    idx
}

/// Filtered clique complex of the extended relevance, up to triangles.
///
/// Vertices enter at index 1; an edge `a > b` enters at the first index whose
/// threshold `r(a, b)` meets; a triangle enters with its latest edge.
pub fn build_filtered_complex(
    r: &RelevanceMatrix,
    max_dim: usize,
) -> Result<FilteredComplex, ComplexError> {
    if max_dim != MAX_DIM {
        return Err(ComplexError::MaxDim(max_dim));
    }
    if r.kind() != RelevanceKind::Extended {
        return Err(ComplexError::NotExtended);
    }
    let n = r.n();
    let edge = edge_indices(r);
    // Lower neighbours of each vertex, ascending.
    let lower: Vec<Vec<(usize, FiltIndex)>> = (0..n)
        .map(|a| {
            (0..a)
                .filter_map(|b| edge[a * n + b].map(|f| (b, f)))
                .collect()
        })
        .collect();

    let mut simplices: Vec<Simplex> = (0..n).map(|v| Simplex::from_sorted(&[v], 1)).collect();
    let higher: Vec<Vec<Simplex>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            for (bi, &(b, fab)) in lower[a].iter().enumerate() {
                out.push(Simplex::from_sorted(&[b, a], fab));
                for &(c, fac) in &lower[a][..bi] {
                    if let Some(fbc) = edge[b * n + c] {
                        out.push(Simplex::from_sorted(&[c, b, a], fab.max(fac).max(fbc)));
                    }
                }
            }
            out
        })
        .collect();
    simplices.extend(higher.into_iter().flatten());
    simplices.par_sort_unstable();
    Ok(FilteredComplex {
        simplices,
        n_vertices: n,
    })
}

/// Recursive walk from `start`: follows entries `m[last][i] > 0`, multiplying
/// them along the walk, and while the product stays at or above `t` records
/// every non-empty vertex subset of the walk. Returned tuples are sorted
/// ascending and deduplicated.
///
/// The walk terminates on acyclic matrices such as the relevance of a
/// layered network, where positive entries only point to lower indices.
pub fn enumerate_simplices_from_vertex(
    m: &RelevanceMatrix,
    start: usize,
    t: f64,
) -> BTreeSet<Vec<usize>> {
    fn subsets(path: &[usize], out: &mut BTreeSet<Vec<usize>>) {
        for mask in 1u64..(1u64 << path.len()) {
            let mut s: Vec<usize> = path
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            s.sort_unstable();
            out.insert(s);
        }
    }

    fn visit(
        m: &RelevanceMatrix,
        path: &mut Vec<usize>,
        product: f64,
        t: f64,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if product < t {
            return;
        }
        subsets(path, out);
        let last = *path.last().unwrap();
        for (i, &v) in m.row(last).iter().enumerate() {
            if v > 0.0 && i != last {
                path.push(i);
                visit(m, path, product * v, t, out);
                path.pop();
            }
        }
    }

    let mut out = BTreeSet::new();
    let mut path = vec![start];
    visit(m, &mut path, m.get(start, start), t, &mut out);
    out
}

/// Filtered complex assembled from the recursive walk at every threshold:
/// each simplex (capped at dimension 2) takes the first index at which some
/// start vertex emits it.
pub fn build_walk_complex(m: &RelevanceMatrix) -> FilteredComplex {
    let schedule = threshold_schedule();
    let n = m.n();
    let per_vertex: Vec<HashMap<Vec<usize>, FiltIndex>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut first = HashMap::new();
            for (k, &t) in schedule.thresholds().iter().enumerate() {
                for simplex in enumerate_simplices_from_vertex(m, s, t) {
                    if simplex.len() <= MAX_DIM + 1 {
                        first.entry(simplex).or_insert(k as FiltIndex + 1);
                    }
                }
            }
            first
        })
        .collect();
    let mut first: HashMap<Vec<usize>, FiltIndex> = HashMap::new();
    for map in per_vertex {
        for (s, f) in map {
            let slot = first.entry(s).or_insert(f);
            *slot = (*slot).min(f);
        }
    }
    let mut simplices: Vec<Simplex> = first
        .into_iter()
        .map(|(v, f)| Simplex::from_sorted(&v, f))
        .collect();
    // every walk starts by emitting its own start vertex at product 1
    debug_assert_eq!(
        simplices
            .iter()
            .filter(|s| s.dim() == 0 && s.filt_index == 1)
            .count(),
        n
    );
    simplices.sort_unstable();
    FilteredComplex {
        simplices,
        n_vertices: n,
    }
}
