//! Persistent homology over Z/2 by boundary-matrix column reduction.
//!
//! Columns are reduced left to right within each dimension, triangles
//! first. An edge that becomes the pivot of a reduced triangle column is a
//! creator whose column would reduce to zero, so it is cleared instead of
//! reduced. Edge columns carry their accumulated chain so that zero columns
//! yield representative cycles directly.

use std::collections::HashMap;

use thiserror::Error;

use crate::complexes::{complex_at, FilteredComplex, FiltrationSchedule, Simplex};
use crate::weightnet::NeuronId;
use crate::{FiltIndex, NUM_THRESHOLDS};

/// Largest stage accepted by [`betti_brute_force`].
pub const BRUTE_FORCE_MAX_SIMPLICES: usize = 5_000;

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("face {face:?} of simplex {simplex:?} is not in the complex before it")]
    MissingFace {
        face: Vec<usize>,
        simplex: Vec<usize>,
    },
    #[error("stage {stage} has {size} simplices; brute-force Betti numbers are limited to {BRUTE_FORCE_MAX_SIMPLICES}")]
    TooLarge { stage: FiltIndex, size: usize },
    #[error("homology dimension {0} is not computed (only 0 and 1)")]
    Dimension(usize),
    #[error("filtration index {0} is outside 1..=64")]
    Index(FiltIndex),
}

/// Sparse Z/2 boundary columns in filtration order.
#[derive(Debug, Clone)]
pub struct BoundaryMatrix<'a> {
    complex: &'a FilteredComplex,
    /// Ascending positions of the codimension-1 faces.
    columns: Vec<Vec<usize>>,
}

impl BoundaryMatrix<'_> {
    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn complex(&self) -> &FilteredComplex {
        self.complex
    }
}

pub fn boundary_matrix(fc: &FilteredComplex) -> Result<BoundaryMatrix<'_>, PersistenceError> {
    let positions = fc.positions();
    let columns = fc
        .simplices()
        .iter()
        .enumerate()
        .map(|(p, s)| {
            let mut col = s
                .facets()
                .map(|face| match positions.get(&face) {
                    Some(&q) if q < p => Ok(q),
                    _ => Err(PersistenceError::MissingFace {
                        face: face.vertices().collect(),
                        simplex: s.key().vertices().collect(),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            col.sort_unstable();
            Ok(col)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoundaryMatrix {
        complex: fc,
        columns,
    })
}

/// Z/2 chain of dimension-p simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeCycle {
    pub simplices: Vec<Simplex>,
}

impl RepresentativeCycle {
    /// Vertices (for edge chains) appearing an odd number of times in the
    /// boundary; empty for a cycle.
    pub fn boundary(&self) -> Vec<Vec<usize>> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for s in &self.simplices {
            for face in s.facets() {
                *count.entry(face.vertices().collect()).or_default() += 1;
            }
        }
        let mut odd: Vec<Vec<usize>> = count
            .into_iter()
            .filter(|(_, c)| c % 2 == 1)
            .map(|(f, _)| f)
            .collect();
        odd.sort();
        odd
    }

    pub fn touches(&self, vertex: NeuronId) -> bool {
        self.simplices
            .iter()
            .any(|s| s.vertices().contains(&vertex))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: FiltIndex,
    /// `None` for essential classes.
    pub death: Option<FiltIndex>,
    pub creator: Simplex,
    pub destroyer: Option<Simplex>,
    /// Present for dimension-1 classes.
    pub representative: Option<RepresentativeCycle>,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_none()
    }

    /// Is the class alive at stage `n` (half-open lifetime)?
    pub fn alive_at(&self, n: FiltIndex) -> bool {
        self.birth <= n && self.death.is_none_or(|d| n < d)
    }

    fn sort_key(&self) -> (usize, FiltIndex, FiltIndex, Simplex) {
        (
            self.dim,
            self.birth,
            self.death.unwrap_or(FiltIndex::MAX),
            self.creator.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    /// Finite pairs with positive persistence plus essential classes,
    /// sorted by `(dim, birth, death)`.
    pub pairs: Vec<PersistencePair>,
    /// Finite pairs with `birth == death`; empty lifetimes kept for debugging.
    pub zero_persistence: Vec<PersistencePair>,
    /// Triangles whose columns reduce to zero (2-cycles of the truncated skeleton).
    pub dim2_creators: Vec<Simplex>,
    pub n_simplices: usize,
    pub schedule: FiltrationSchedule,
}

impl PersistenceDiagram {
    pub fn pairs_of_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Copy keeping only pairs of the listed dimensions.
    pub fn restricted_to(&self, dims: &[usize]) -> PersistenceDiagram {
        let keep = |p: &&PersistencePair| dims.contains(&p.dim);
        PersistenceDiagram {
            pairs: self.pairs.iter().filter(keep).cloned().collect(),
            zero_persistence: self.zero_persistence.iter().filter(keep).cloned().collect(),
            dim2_creators: self.dim2_creators.clone(),
            n_simplices: self.n_simplices,
            schedule: self.schedule.clone(),
        }
    }

    /// All pairs including zero-persistence ones, sorted.
    pub fn raw_pairs(&self) -> Vec<&PersistencePair> {
        let mut all: Vec<&PersistencePair> =
            self.pairs.iter().chain(&self.zero_persistence).collect();
        all.sort_by_key(|p| p.sort_key());
        all
    }
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Reduces the boundary matrix and reads off the persistence pairing.
pub fn reduce(bm: &BoundaryMatrix<'_>) -> PersistenceDiagram {
    let simplices = bm.complex.simplices();
    let n = simplices.len();
    let dim_of = |p: usize| simplices[p].dim();

    // pivot row -> column whose reduced form has that lowest entry
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut reduced: Vec<Vec<usize>> = vec![Vec::new(); n];
    // accumulated edge chains for dimension-1 columns
    let mut chains: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut cleared = vec![false; n];
    let mut dim2_creators = Vec::new();
    let mut cycle_chains: HashMap<usize, Vec<usize>> = HashMap::new();

    for p in (0..n).filter(|&p| dim_of(p) == 2) {
        let mut col = bm.columns[p].clone();
        while let Some(&low) = col.last() {
            match owner[low] {
                Some(k) => col = symmetric_difference(&col, &reduced[k]),
                None => break,
            }
        }
        match col.last() {
            Some(&low) => {
                owner[low] = Some(p);
                cleared[low] = true;
                reduced[p] = col;
            }
            None => dim2_creators.push(simplices[p].clone()),
        }
    }

    for p in (0..n).filter(|&p| dim_of(p) == 1 && !cleared[p]) {
        let mut col = bm.columns[p].clone();
        let mut chain = vec![p];
        while let Some(&low) = col.last() {
            match owner[low] {
                Some(k) => {
                    col = symmetric_difference(&col, &reduced[k]);
                    chain = symmetric_difference(&chain, &chains[&k]);
                }
                None => break,
            }
        }
        match col.last() {
            Some(&low) => {
                owner[low] = Some(p);
                reduced[p] = col;
                chains.insert(p, chain);
            }
            None => {
                cycle_chains.insert(p, chain);
            }
        }
    }

    let to_cycle = |positions: &[usize]| RepresentativeCycle {
        simplices: positions.iter().map(|&q| simplices[q].clone()).collect(),
    };

    let mut all = Vec::new();
    for p in 0..n {
        let d = dim_of(p);
        if d == 2 {
            continue;
        }
        let creator = &simplices[p];
        let is_creator = match d {
            0 => true,
            _ => cleared[p] || reduced[p].is_empty(),
        };
        if !is_creator {
            continue;
        }
        let destroyer = owner[p].map(|k| &simplices[k]);
        let representative = if d == 1 {
            match owner[p] {
                Some(k) => Some(to_cycle(&reduced[k])),
                None => cycle_chains.get(&p).map(|chain| to_cycle(chain)),
            }
        } else {
            None
        };
        all.push(PersistencePair {
            dim: d,
            birth: creator.filt_index,
            death: destroyer.map(|s| s.filt_index),
            creator: creator.clone(),
            destroyer: destroyer.cloned(),
            representative,
        });
    }
    all.sort_by_key(|p| p.sort_key());
    let (zero_persistence, pairs) = all.into_iter().partition(|p| p.death == Some(p.birth));
    PersistenceDiagram {
        pairs,
        zero_persistence,
        dim2_creators,
        n_simplices: n,
        schedule: FiltrationSchedule::default(),
    }
}

/// Boundary matrix and reduction in one step.
pub fn compute(fc: &FilteredComplex) -> Result<PersistenceDiagram, PersistenceError> {
    Ok(reduce(&boundary_matrix(fc)?))
}

/// `beta_p` at each of the 64 stages, counting classes with `birth <= n < death`.
pub fn betti_curve(pd: &PersistenceDiagram, p: usize) -> [usize; NUM_THRESHOLDS] {
    let mut curve = [0; NUM_THRESHOLDS];
    for pair in pd.pairs_of_dim(p) {
        let end = pair.death.map_or(NUM_THRESHOLDS as FiltIndex + 1, |d| d);
        for n in pair.birth..end {
            curve[n as usize - 1] += 1;
        }
    }
    curve
}

/// Rank over Z/2 of rows given as bitsets.
fn z2_rank(rows: Vec<Vec<u64>>) -> usize {
    let words = rows.first().map_or(0, Vec::len);
    let mut basis: Vec<Option<Vec<u64>>> = vec![None; words * 64];
    let mut rank = 0;
    for mut row in rows {
        while let Some(w) = row.iter().rposition(|&x| x != 0) {
            let bit = w * 64 + 63 - row[w].leading_zeros() as usize;
            match &basis[bit] {
                Some(b) => row.iter_mut().zip(b).for_each(|(x, y)| *x ^= y),
                None => {
                    basis[bit] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Betti number of stage `n` as `dim ker d_p - rank d_{p+1}`, by dense
/// Gaussian elimination over Z/2. Independent of the pairing in [`reduce`].
pub fn betti_brute_force(
    fc: &FilteredComplex,
    n: FiltIndex,
    p: usize,
) -> Result<usize, PersistenceError> {
    if p > 1 {
        return Err(PersistenceError::Dimension(p));
    }
    let stage = complex_at(fc, n).map_err(|_| PersistenceError::Index(n))?;
    if stage.len() > BRUTE_FORCE_MAX_SIMPLICES {
        return Err(PersistenceError::TooLarge {
            stage: n,
            size: stage.len(),
        });
    }
    let by_dim = |d: usize| stage.iter().filter(move |s| s.dim() == d);
    let vertex_pos: HashMap<usize, usize> = by_dim(0)
        .enumerate()
        .map(|(i, s)| (s.vertices()[0].0, i))
        .collect();
    let edge_pos: HashMap<(usize, usize), usize> = by_dim(1)
        .enumerate()
        .map(|(i, s)| ((s.vertices()[0].0, s.vertices()[1].0), i))
        .collect();

    let bitset = |len: usize, bits: &[usize]| {
        let mut row = vec![0u64; len.div_ceil(64).max(1)];
        for &b in bits {
            row[b / 64] ^= 1 << (b % 64);
        }
        row
    };
    let d1: Vec<Vec<u64>> = by_dim(1)
        .map(|s| {
            let v = s.vertices();
            bitset(
                vertex_pos.len(),
                &[vertex_pos[&v[0].0], vertex_pos[&v[1].0]],
            )
        })
        .collect();
    let d2: Vec<Vec<u64>> = by_dim(2)
        .map(|s| {
            let v: Vec<usize> = s.vertices().iter().map(|x| x.0).collect();
            bitset(
                edge_pos.len(),
                &[
                    edge_pos[&(v[0], v[1])],
                    edge_pos[&(v[0], v[2])],
                    edge_pos[&(v[1], v[2])],
                ],
            )
        })
        .collect();

    let rank1 = z2_rank(d1);
    Ok(match p {
        0 => vertex_pos.len() - rank1,
        _ => edge_pos.len() - rank1 - z2_rank(d2),
    })
}
