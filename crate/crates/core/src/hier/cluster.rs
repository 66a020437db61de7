//! KD-style cluster trees and the admissibility test.

use std::ops::Range;

use crate::sparse::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lo: Point,
    pub hi: Point,
}

impl BoundingBox {
    pub fn of(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BoundingBox { lo: first, hi: first };
        for p in it {
            for d in 0..3 {
                b.lo[d] = b.lo[d].min(p[d]);
                b.hi[d] = b.hi[d].max(p[d]);
            }
        }
        Some(b)
    }

    /// Length of the box diagonal.
    pub fn diam(&self) -> f64 {
        (0..3).map(|d| (self.hi[d] - self.lo[d]).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean gap between two boxes; zero when they touch or overlap.
    pub fn dist(&self, other: &BoundingBox) -> f64 {
        (0..3)
            .map(|d| {
                let gap = (other.lo[d] - self.hi[d]).max(self.lo[d] - other.hi[d]).max(0.0);
                gap * gap
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn widest_axis(&self) -> usize {
        (0..3).fold(0, |best, d| {
            if self.hi[d] - self.lo[d] > self.hi[best] - self.lo[best] {
                d
            } else {
                best
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    /// Positions in clustered order.
    pub range: Range<usize>,
    /// `None` for algebraic trees.
    pub bbox: Option<BoundingBox>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub level: usize,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn diam(&self) -> f64 {
        match self.bbox {
            Some(b) => b.diam(),
            None => self.range.len().saturating_sub(1) as f64,
        }
    }

    pub fn dist(&self, other: &ClusterNode) -> f64 {
        match (self.bbox, other.bbox) {
            (Some(a), Some(b)) => a.dist(&b),
            _ => {
                let gap = other.range.start.saturating_sub(self.range.end).max(self.range.start.saturating_sub(other.range.end));
                gap as f64
            }
        }
    }
}

/// Binary cluster tree; node 0 is the root and children follow parents.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    pub nodes: Vec<ClusterNode>,
    /// `perm[position] = original index`.
    pub perm: Vec<usize>,
    pub leaf_size: usize,
}

impl ClusterTree {
    /// Splits the widest bounding-box axis at the median point; the lower
    /// half receives the extra point of an odd split.
    pub fn geometric(points: &[Point], leaf_size: usize) -> Self {
        let mut perm: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        let leaf_size = leaf_size.max(1);
        build(&mut nodes, &mut perm, Some(points), 0..points.len(), None, 0, leaf_size);
        Self { nodes, perm, leaf_size }
    }

    /// Splits index ranges at their midpoint.
    pub fn algebraic(n: usize, leaf_size: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        let leaf_size = leaf_size.max(1);
        build(&mut nodes, &mut perm, None, 0..n, None, 0, leaf_size);
        Self { nodes, perm, leaf_size }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level + 1).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }
}

fn build(
    nodes: &mut Vec<ClusterNode>,
    perm: &mut [usize],
    points: Option<&[Point]>,
    range: Range<usize>,
    parent: Option<usize>,
    level: usize,
    leaf_size: usize,
) -> usize {
    let id = nodes.len();
    let bbox = points.and_then(|p| BoundingBox::of(perm[range.clone()].iter().map(|&i| p[i])));
    nodes.push(ClusterNode {
        range: range.clone(),
        bbox,
        children: Vec::new(),
        parent,
        level,
    });
    if range.len() <= leaf_size {
        return id;
    }
    if let (Some(p), Some(b)) = (points, bbox) {
        let axis = b.widest_axis();
        perm[range.clone()].sort_by(|&x, &y| p[x][axis].total_cmp(&p[y][axis]).then(x.cmp(&y)));
    }
    let mid = range.start + range.len().div_ceil(2);
    let l = build(nodes, perm, points, range.start..mid, Some(id), level + 1, leaf_size);
    let r = build(nodes, perm, points, mid..range.end, Some(id), level + 1, leaf_size);
    nodes[id].children = vec![l, r];
    id
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityMode {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityParams {
    pub eta: f64,
    pub mode: AdmissibilityMode,
}

impl Default for AdmissibilityParams {
    fn default() -> Self {
        Self {
            eta: 0.7,
            mode: AdmissibilityMode::Weak,
        }
    }
}

/// Whether the block `(s, t)` may be stored in low-rank form.
pub fn admissible(s: &ClusterNode, t: &ClusterNode, params: &AdmissibilityParams) -> bool {
    if s.range == t.range {
        return false;
    }
    match params.mode {
        AdmissibilityMode::Weak => true,
        AdmissibilityMode::Strong => (s.diam() + t.diam()) / 2.0 <= params.eta * s.dist(t),
    }
}
