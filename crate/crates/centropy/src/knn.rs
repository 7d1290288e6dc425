//! k-nearest-neighbor radii, the distance kernel of the entropy estimator.
//!
//! Two interchangeable paths: a brute-force O(T^2) reference and a kd-tree.
//! Both must return bit-identical radii; the tree only prunes candidates,
//! every surviving distance is computed by the same code path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance norm for neighbor queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    /// Max-coordinate distance; the unit ball is the cube [-1, 1]^d.
    Chebyshev,
    /// Usual L2 distance.
    Euclidean,
}

impl Norm {
    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Norm::Chebyshev => {
                let mut m = 0.0f64;
                for (x, y) in a.iter().zip(b) {
                    let d = (x - y).abs();
                    if d > m {
                        m = d;
                    }
                }
                m
            }
            Norm::Euclidean => {
                let mut s = 0.0f64;
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    s += d * d;
                }
                s.sqrt()
            }
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Norm::Chebyshev => write!(f, "chebyshev"),
            Norm::Euclidean => write!(f, "euclidean"),
        }
    }
}

/// Row-major point matrix: T points in d dimensions.
#[derive(Debug, Clone)]
pub struct Points {
    data: Vec<f64>,
    len: usize,
    dims: usize,
}

impl Points {
    pub fn from_rows(data: Vec<f64>, len: usize, dims: usize) -> Points {
        assert_eq!(data.len(), len * dims);
        Points { data, len, dims }
    }

    /// Gathers column slices into rows.
    pub fn from_columns(cols: &[&[f64]]) -> Points {
        let dims = cols.len();
        let len = if dims == 0 { 0 } else { cols[0].len() };
        let mut data = Vec::with_capacity(len * dims);
        for t in 0..len {
            for col in cols {
                data.push(col[t]);
            }
        }
        Points { data, len, dims }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }
}

/// Per-point distances to the k-th nearest neighbor (self excluded).
#[derive(Debug, Clone)]
pub struct KnnRadii {
    pub radii: Vec<f64>,
    /// Number of zero radii, i.e. points with at least k exact duplicates.
    pub zero_count: usize,
}

/// Running set of the k smallest distances seen so far.
struct KSmallest {
    buf: Vec<f64>,
    cap: usize,
}

impl KSmallest {
    fn new(cap: usize) -> Self {
        KSmallest {
            buf: Vec::with_capacity(cap),
            cap,
        }
    }

    #[inline]
    fn worst(&self) -> f64 {
        if self.buf.len() < self.cap {
            f64::INFINITY
        } else {
            self.buf.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        }
    }

    #[inline]
    fn push(&mut self, d: f64) {
        if self.buf.len() < self.cap {
            self.buf.push(d);
        } else {
            let mut wi = 0;
            for i in 1..self.buf.len() {
                if self.buf[i] > self.buf[wi] {
                    wi = i;
                }
            }
            if d < self.buf[wi] {
                self.buf[wi] = d;
            }
        }
    }

    fn kth(&self) -> f64 {
        self.buf.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_args(points: &Points, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if points.len() < k + 1 {
        return Err(Error::Config(format!(
            "need at least k + 1 = {} points, got {}",
            k + 1,
            points.len()
        )));
    }
    Ok(())
}

/// Brute-force reference path.
pub fn knn_radii(points: &Points, k: usize, norm: Norm) -> Result<KnnRadii> {
    check_args(points, k)?;
    let t = points.len();
    let radii: Vec<f64> = (0..t)
        .into_par_iter()
        .map(|i| {
            let q = points.row(i);
            let mut best = KSmallest::new(k);
            for j in 0..t {
                if j != i {
                    best.push(norm.dist(q, points.row(j)));
                }
            }
            best.kth()
        })
        .collect();
    let zero_count = radii.iter().filter(|r| **r == 0.0).count();
    Ok(KnnRadii { radii, zero_count })
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Static kd-tree over a [`Points`] set.
pub struct KdTree<'a> {
    points: &'a Points,
    norm: Norm,
    nodes: Vec<Node>,
    order: Vec<usize>,
    root: usize,
}

const LEAF_SIZE: usize = 16;

impl<'a> KdTree<'a> {
    pub fn build(points: &'a Points, norm: Norm) -> KdTree<'a> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        let dims = points.dims();
        let root = Self::build_rec(points, dims, &mut order, &mut nodes, 0, points.len());
        KdTree {
            points,
            norm,
            nodes,
            order,
            root,
        }
    }

    fn build_rec(
        points: &Points,
        dims: usize,
        order: &mut [usize],
        nodes: &mut Vec<Node>,
        start: usize,
        end: usize,
    ) -> usize {
        let span = &mut order[start..end];
        if span.len() <= LEAF_SIZE || dims == 0 {
            nodes.push(Node::Leaf { start, end });
            return nodes.len() - 1;
        }
        // split on the axis with the widest spread; ties go to the lower axis
        let mut axis = 0;
        let mut best_spread = f64::NEG_INFINITY;
        for a in 0..dims {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in span.iter() {
                let v = points.row(i)[a];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let spread = hi - lo;
            if spread > best_spread {
                best_spread = spread;
                axis = a;
            }
        }
        if best_spread == 0.0 {
            nodes.push(Node::Leaf { start, end });
            return nodes.len() - 1;
        }
        let mid = span.len() / 2;
        span.select_nth_unstable_by(mid, |&a, &b| {
            points.row(a)[axis]
                .total_cmp(&points.row(b)[axis])
                .then(a.cmp(&b))
        });
        let value = points.row(span[mid])[axis];
        let mid_abs = start + mid;
        let left = Self::build_rec(points, dims, order, nodes, start, mid_abs);
        let right = Self::build_rec(points, dims, order, nodes, mid_abs, end);
        nodes.push(Node::Split {
            axis,
            value,
            left,
            right,
        });
        nodes.len() - 1
    }

    fn search(&self, node: usize, q: &[f64], skip: usize, best: &mut KSmallest) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i != skip {
                        best.push(self.norm.dist(q, self.points.row(i)));
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, skip, best);
                // any point beyond the plane is at least |diff| away in
                // either norm, so the far side can only matter within it
                if diff.abs() <= best.worst() {
                    self.search(far, q, skip, best);
                }
            }
        }
    }

    /// Distance from point `i` to its k-th nearest neighbor, self excluded.
    pub fn knn_radius(&self, i: usize, k: usize) -> f64 {
        let mut best = KSmallest::new(k);
        self.search(self.root, self.points.row(i), i, &mut best);
        best.kth()
    }
}

/// Accelerated path; radii are bit-identical to [`knn_radii`].
pub fn knn_radii_kdtree(points: &Points, k: usize, norm: Norm) -> Result<KnnRadii> {
    check_args(points, k)?;
    let tree = KdTree::build(points, norm);
    let radii: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| tree.knn_radius(i, k))
        .collect();
    let zero_count = radii.iter().filter(|r| **r == 0.0).count();
    Ok(KnnRadii { radii, zero_count })
}

/// Route small inputs to the brute-force scan, large ones to the kd-tree.
pub(crate) fn knn_radii_auto(points: &Points, k: usize, norm: Norm) -> Result<KnnRadii> {
    if points.len() >= 512 {
        knn_radii_kdtree(points, k, norm)
    } else {
        knn_radii(points, k, norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn radii_on_a_line() {
        let p = Points::from_columns(&[&[0.0, 1.0, 3.0]]);
        let r = knn_radii(&p, 1, Norm::Chebyshev).unwrap();
        assert_eq!(r.radii, vec![1.0, 1.0, 2.0]);
        assert_eq!(r.zero_count, 0);
    }

    #[test]
    fn chebyshev_triangle() {
        let p = Points::from_rows(vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0], 3, 2);
        let r = knn_radii(&p, 1, Norm::Chebyshev).unwrap();
        assert_eq!(r.radii, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn duplicate_point_is_flagged() {
        let p = Points::from_columns(&[&[2.0, 2.0, 5.0]]);
        let r = knn_radii(&p, 1, Norm::Euclidean).unwrap();
        assert_eq!(r.zero_count, 2);
    }

    #[test]
    fn rejects_bad_k() {
        let p = Points::from_columns(&[&[0.0, 1.0]]);
        assert!(knn_radii(&p, 0, Norm::Chebyshev).is_err());
        assert!(knn_radii(&p, 2, Norm::Chebyshev).is_err());
    }

    #[test]
    fn kdtree_matches_brute_force_exactly() {
        let mut rng = stream_rng(42, 0);
        for &(t, d) in &[(60usize, 1usize), (257, 2), (800, 3), (300, 5)] {
            let data: Vec<f64> = (0..t * d).map(|_| rng.random::<f64>()).collect();
            let p = Points::from_rows(data, t, d);
            for norm in [Norm::Chebyshev, Norm::Euclidean] {
                for k in [1usize, 3, 7] {
                    let brute = knn_radii(&p, k, norm).unwrap();
                    let tree = knn_radii_kdtree(&p, k, norm).unwrap();
                    assert_eq!(brute.radii, tree.radii, "t={t} d={d} k={k} {norm}");
                }
            }
        }
    }

    #[test]
    fn kdtree_matches_brute_force_with_ties() {
        // grid data forces many duplicate coordinates and tied distances
        let mut rng = stream_rng(7, 1);
        let t = 400;
        let data: Vec<f64> = (0..t * 2)
            .map(|_| (rng.random::<f64>() * 8.0).floor())
            .collect();
        let p = Points::from_rows(data, t, 2);
        let brute = knn_radii(&p, 3, Norm::Chebyshev).unwrap();
        let tree = knn_radii_kdtree(&p, 3, Norm::Chebyshev).unwrap();
        assert_eq!(brute.radii, tree.radii);
        assert_eq!(brute.zero_count, tree.zero_count);
    }
}
