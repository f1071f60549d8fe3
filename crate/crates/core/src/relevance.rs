//! Pairwise relevance between neurons.
//!
//! Direct relevance is the positive part of each incoming weight divided by
//! the sum of positive incoming weights at the destination. Extended
//! relevance is the largest product of direct relevances over any forward
//! path between two neurons.

use rayon::prelude::*;
use thiserror::Error;

use crate::weightnet::NetworkGraph;

/// Largest graph accepted by [`brute_force_extended_relevance`].
pub const BRUTE_FORCE_MAX_NEURONS: usize = 14;

#[derive(Debug, Error)]
pub enum RelevanceError {
    #[error("extended relevance needs a direct relevance matrix")]
    NotDirect,
    #[error("relevance matrix has {matrix} neurons but graph has {graph}")]
    SizeMismatch { matrix: usize, graph: usize },
    #[error(
        "brute-force path enumeration is limited to {BRUTE_FORCE_MAX_NEURONS} neurons (got {0})"
    )]
    TooLarge(usize),
    #[error("relevance ({i},{j}) = {value} is outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("relevance ({i},{i}) must be 1, got {value}")]
    Diagonal { i: usize, value: f64 },
    #[error("relevance matrix needs n*n = {expected} entries, got {found}")]
    Shape { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelevanceKind {
    Direct,
    Extended,
}

/// Dense `n x n` relevance values; `get(i, j)` is the relevance of `i` toward `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMatrix {
    n: usize,
    values: Vec<f64>,
    kind: RelevanceKind,
}

impl RelevanceMatrix {
    fn identity(n: usize, kind: RelevanceKind) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Self { n, values, kind }
    }

    /// Builds a matrix from row-major values, checking range and unit diagonal.
    pub fn from_dense(
        n: usize,
        values: Vec<f64>,
        kind: RelevanceKind,
    ) -> Result<Self, RelevanceError> {
        if values.len() != n * n {
            return Err(RelevanceError::Shape {
                expected: n * n,
                found: values.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let value = values[i * n + j];
                if !(0.0..=1.0).contains(&value) {
                    return Err(RelevanceError::OutOfRange { i, j, value });
                }
            }
            if values[i * n + i] != 1.0 {
                return Err(RelevanceError::Diagonal {
                    i,
                    value: values[i * n + i],
                });
            }
        }
        Ok(Self { n, values, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> RelevanceKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// Non-zero entries in `(i, j)` order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(move |(k, &v)| (k / n, k % n, v))
    }
}

/// Normalized positive weights per destination neuron. A destination with no
/// positive incoming weight gets zero relevance from every source.
pub fn direct_relevance(g: &NetworkGraph) -> RelevanceMatrix {
    let n = g.n();
    let mut r = RelevanceMatrix::identity(n, RelevanceKind::Direct);
    for j in 0..n {
        let total: f64 = g.incoming(j).map(|(_, w)| w.max(0.0)).sum();
        if total <= 0.0 {
            continue;
        }
        for (i, w) in g.incoming(j) {
            if w > 0.0 {
                r.values[i * n + j] = w / total;
            }
        }
    }
    r
}

fn check_inputs(direct: &RelevanceMatrix, g: &NetworkGraph) -> Result<(), RelevanceError> {
    if direct.kind != RelevanceKind::Direct {
        return Err(RelevanceError::NotDirect);
    }
    if direct.n != g.n() {
        return Err(RelevanceError::SizeMismatch {
            matrix: direct.n,
            graph: g.n(),
        });
    }
    Ok(())
}

/// Max-product path relevance by dynamic programming.
///
/// Sources are visited in ascending index order, so every successor `k < i`
/// already carries its final best-path values toward `j`. Destination
/// columns are independent and computed in parallel.
pub fn extended_relevance(
    direct: &RelevanceMatrix,
    g: &NetworkGraph,
) -> Result<RelevanceMatrix, RelevanceError> {
    check_inputs(direct, g)?;
    let n = g.n();
    // Direct successors with positive relevance, per source.
    let successors: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            g.outgoing(i)
                .map(|(k, _)| (k, direct.get(i, k)))
                .filter(|&(_, r)| r > 0.0)
                .collect()
        })
        .collect();

    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![0.0; n];
            col[j] = 1.0;
            for i in j + 1..n {
                let mut best = 0.0f64;
                for &(k, r) in &successors[i] {
                    if k >= j {
                        best = best.max(r * col[k]);
                    }
                }
                col[i] = best;
            }
            col
        })
        .collect();

    let mut out = RelevanceMatrix::identity(n, RelevanceKind::Extended);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate().skip(j + 1) {
            out.values[i * n + j] = v;
        }
    }
    Ok(out)
}

/// Exhaustive path enumeration; test oracle for [`extended_relevance`].
pub fn brute_force_extended_relevance(
    direct: &RelevanceMatrix,
    g: &NetworkGraph,
) -> Result<RelevanceMatrix, RelevanceError> {
    check_inputs(direct, g)?;
    let n = g.n();
    if n > BRUTE_FORCE_MAX_NEURONS {
        return Err(RelevanceError::TooLarge(n));
    }
    let mut out = RelevanceMatrix::identity(n, RelevanceKind::Extended);

    fn walk(
        g: &NetworkGraph,
        direct: &RelevanceMatrix,
        source: usize,
        at: usize,
        product: f64,
        out: &mut RelevanceMatrix,
    ) {
        for (next, w) in g.outgoing(at) {
            if w == 0.0 {
                continue;
            }
            let p = product * direct.get(at, next);
            let slot = &mut out.values[source * out.n + next];
            if p > *slot {
                *slot = p;
            }
            walk(g, direct, source, next, p, out);
        }
    }

    for source in 0..n {
        walk(g, direct, source, source, 1.0, &mut out);
    }
    Ok(out)
}
