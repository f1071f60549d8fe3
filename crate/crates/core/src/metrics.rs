//! Diagram statistics: point counts by distance from the diagonal,
//! unused-output classification, and convex-hull area.
//!
//! Coordinates are filtration indices. A finite point `(b, d)` is
//! *near-diagonal* when `d <= b + 5`, in the *belt* when `b + 5 < d < b + 20`,
//! and *above the belt* when `d >= b + 20`. Essential classes are counted on
//! their own and never enter the bands or the hull.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::weightnet::NeuronId;
use crate::FiltIndex;

/// Maximum `death - birth` for a near-diagonal point.
pub const NEAR_DIAGONAL_SPAN: FiltIndex = 5;
/// Smallest `death - birth` above the belt.
pub const BELT_UPPER_SPAN: FiltIndex = 20;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension-1 pair born at {birth} has no representative cycle")]
    MissingRepresentative { birth: FiltIndex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    NearDiagonal,
    Belt,
    AboveBelt,
}

pub fn band(birth: FiltIndex, death: FiltIndex) -> Band {
    if death <= birth + NEAR_DIAGONAL_SPAN {
        Band::NearDiagonal
    } else if death < birth + BELT_UPPER_SPAN {
        Band::Belt
    } else {
        Band::AboveBelt
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagramMetrics {
    pub dim: usize,
    #[serde(rename = "total")]
    pub total_points: usize,
    pub near_diagonal: usize,
    pub belt: usize,
    pub above_belt: usize,
    pub essential: usize,
    pub c1: usize,
    pub c2: usize,
    pub c1_and_c2: usize,
    pub hull_area: f64,
}

impl DiagramMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize to JSON")
    }
}

/// Band counts over finite pairs of `dim`, keeping multiplicity.
pub fn diagram_stats(pd: &PersistenceDiagram, dim: usize) -> DiagramMetrics {
    let mut m = DiagramMetrics {
        dim,
        ..Default::default()
    };
    for pair in pd.pairs_of_dim(dim) {
        let Some(death) = pair.death else {
            m.essential += 1;
            continue;
        };
        m.total_points += 1;
        match band(pair.birth, death) {
            Band::NearDiagonal => m.near_diagonal += 1,
            Band::Belt => m.belt += 1,
            Band::AboveBelt => m.above_belt += 1,
        }
    }
    m.c2 = m.near_diagonal;
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFlags {
    /// Representative touches an unused output neuron.
    pub c1: bool,
    /// Point lies on or under `death = birth + 5`.
    pub c2: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Per finite dimension-1 pair, in diagram order.
    pub flags: Vec<PairFlags>,
    pub total: usize,
    pub c1: usize,
    pub c2: usize,
    pub c1_and_c2: usize,
}

fn finite_dim1(pd: &PersistenceDiagram) -> impl Iterator<Item = &PersistencePair> {
    pd.pairs_of_dim(1).filter(|p| !p.is_essential())
}

/// Flags every finite dimension-1 point by the unused-output and
/// near-diagonal conditions.
pub fn classify_pairs(
    pd: &PersistenceDiagram,
    unused: &BTreeSet<NeuronId>,
) -> Result<Classification, MetricsError> {
    let mut flags = Vec::new();
    for pair in finite_dim1(pd) {
        let rep = pair
            .representative
            .as_ref()
            .ok_or(MetricsError::MissingRepresentative { birth: pair.birth })?;
        let death = pair.death.expect("finite pair");
        flags.push(PairFlags {
            c1: unused.iter().any(|&v| rep.touches(v)),
            c2: band(pair.birth, death) == Band::NearDiagonal,
        });
    }
    Ok(Classification {
        total: flags.len(),
        c1: flags.iter().filter(|f| f.c1).count(),
        c2: flags.iter().filter(|f| f.c2).count(),
        c1_and_c2: flags.iter().filter(|f| f.c1 && f.c2).count(),
        flags,
    })
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of a point set by monotone chain, counter-clockwise, without
/// collinear points. Duplicates are collapsed first.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let twice: f64 = poly
        .iter()
        .zip(poly.iter().cycle().skip(1))
        .map(|(a, b)| a.0 * b.1 - b.0 * a.1)
        .sum();
    twice.abs() / 2.0
}

/// Area of the convex hull of finite `(birth, death)` points of `dim`.
pub fn convex_hull_area(pd: &PersistenceDiagram, dim: usize) -> f64 {
    let points: Vec<(f64, f64)> = pd
        .pairs_of_dim(dim)
        .filter_map(|p| p.death.map(|d| (p.birth as f64, d as f64)))
        .collect();
    polygon_area(&convex_hull(&points))
}

/// Counts, classification and hull area for one dimension. Dimension-0
/// classes carry no representative, so their `c1` counts are zero.
pub fn diagram_metrics(
    pd: &PersistenceDiagram,
    dim: usize,
    unused: &BTreeSet<NeuronId>,
) -> Result<DiagramMetrics, MetricsError> {
    let mut m = diagram_stats(pd, dim);
    if dim == 1 {
        let c = classify_pairs(pd, unused)?;
        m.c1 = c.c1;
        m.c1_and_c2 = c.c1_and_c2;
    }
    m.hull_area = convex_hull_area(pd, dim);
    Ok(m)
}
