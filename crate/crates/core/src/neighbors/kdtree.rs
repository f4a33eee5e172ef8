//! Static k-d tree over the Chebyshev (max-norm) metric.
//!
//! Built once over a projection of a cloud onto a subset of its columns. Two
//! queries are supported, both anchored at one of the indexed points and
//! excluding it: the distance to the k-th nearest neighbour, and the number of
//! points strictly closer than a radius. Both return exactly what a brute-force
//! scan returns: every pruning test is monotone under floating-point
//! subtraction, so no boundary point is misclassified.

use std::cmp::Ordering;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
struct Node {
    start: u32,
    end: u32,
    /// Children indices; `u32::MAX` marks a leaf.
    left: u32,
    right: u32,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    /// Projected coordinates in original point order.
    points: Vec<f64>,
    /// Projected coordinates in tree order.
    sorted: Vec<f64>,
    /// Original index of each tree slot.
    order: Vec<u32>,
    nodes: Vec<Node>,
    /// Per node: `dim` lower bounds then `dim` upper bounds.
    bounds: Vec<f64>,
}

impl KdTree {
    /// Builds a tree over `points` (row-major, `dim` values per point).
    pub fn new(points: Vec<f64>, dim: usize) -> Self {
        assert!(dim >= 1, "k-d tree needs at least one dimension");
        assert_eq!(points.len() % dim, 0);
        let n = points.len() / dim;
        let mut tree = Self {
            dim,
            points,
            sorted: Vec::new(),
            order: (0..n as u32).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            bounds: Vec::new(),
        };
        if n > 0 {
            tree.build(0, n);
        }
        let mut sorted = Vec::with_capacity(tree.points.len());
        for &i in &tree.order {
            let i = i as usize;
            sorted.extend_from_slice(&tree.points[i * dim..(i + 1) * dim]);
        }
        tree.sorted = sorted;
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> u32 {
        let dim = self.dim;
        let id = self.nodes.len() as u32;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &i in &self.order[start..end] {
            let p = &self.points[i as usize * dim..(i as usize + 1) * dim];
            for j in 0..dim {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left: u32::MAX,
            right: u32::MAX,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let split_dim = (0..dim)
            .max_by(|&a, &b| {
                (hi[a] - lo[a])
                    .partial_cmp(&(hi[b] - lo[b]))
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap_or(0);
        if hi[split_dim] - lo[split_dim] <= 0.0 {
            // all points coincide
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            let va = points[a as usize * dim + split_dim];
            let vb = points[b as usize * dim + split_dim];
            va.partial_cmp(&vb).unwrap_or(Ordering::Equal)
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id as usize].left = left;
        self.nodes[id as usize].right = right;
        id
    }

    #[inline]
    fn node_bounds(&self, node: usize) -> (&[f64], &[f64]) {
        let b = &self.bounds[2 * self.dim * node..2 * self.dim * (node + 1)];
        b.split_at(self.dim)
    }

    /// Chebyshev lower bound on the distance from `q` to any point in the node.
    #[inline]
    fn min_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.node_bounds(node);
        let mut m = 0.0_f64;
        for j in 0..self.dim {
            let gap = if q[j] < lo[j] {
                lo[j] - q[j]
            } else if q[j] > hi[j] {
                q[j] - hi[j]
            } else {
                0.0
            };
            m = m.max(gap);
        }
        m
    }

    /// Chebyshev upper bound on the distance from `q` to any point in the node.
    #[inline]
    fn max_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.node_bounds(node);
        let mut m = 0.0_f64;
        for j in 0..self.dim {
            m = m.max((q[j] - lo[j]).abs()).max((hi[j] - q[j]).abs());
        }
        m
    }

    #[inline]
    fn dist_to_slot(&self, slot: usize, q: &[f64]) -> f64 {
        let p = &self.sorted[slot * self.dim..(slot + 1) * self.dim];
        let mut m = 0.0_f64;
        for j in 0..self.dim {
            m = m.max((p[j] - q[j]).abs());
        }
        m
    }

    /// Distance from point `t` to its `k`-th nearest other point.
    ///
    /// Panics unless `1 <= k < len()`.
    pub fn kth_distance(&self, t: usize, k: usize) -> f64 {
        assert!(k >= 1 && k < self.len(), "need 1 <= k < n");
        let q = self.point(t).to_vec();
        // ascending list of the k best distances so far
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        self.knn_rec(0, &q, t as u32, k, &mut best);
        best[k - 1]
    }

    fn knn_rec(&self, node: usize, q: &[f64], skip: u32, k: usize, best: &mut Vec<f64>) {
        let worst = if best.len() == k {
            best[k - 1]
        } else {
            f64::INFINITY
        };
        if self.min_dist(node, q) > worst {
            return;
        }
        let nd = &self.nodes[node];
        if nd.left == u32::MAX {
            for slot in nd.start as usize..nd.end as usize {
                if self.order[slot] == skip {
                    continue;
                }
                let d = self.dist_to_slot(slot, q);
                if best.len() < k || d < best[k - 1] {
                    let pos = best.partition_point(|&b| b <= d);
                    best.insert(pos, d);
                    best.truncate(k);
                }
            }
            return;
        }
        let (l, r) = (nd.left as usize, nd.right as usize);
        let (dl, dr) = (self.min_dist(l, q), self.min_dist(r, q));
        if dl <= dr {
            self.knn_rec(l, q, skip, k, best);
            self.knn_rec(r, q, skip, k, best);
        } else {
            self.knn_rec(r, q, skip, k, best);
            self.knn_rec(l, q, skip, k, best);
        }
    }

    /// Number of points other than `t` at Chebyshev distance strictly below `eps`.
    pub fn count_within(&self, t: usize, eps: f64) -> usize {
        if self.is_empty() {
            return 0;
        }
        let q = self.point(t).to_vec();
        // t itself is at distance 0 < eps whenever eps > 0
        let total = self.count_rec(0, &q, eps);
        if eps > 0.0 {
            total - 1
        } else {
            total
        }
    }

    fn count_rec(&self, node: usize, q: &[f64], eps: f64) -> usize {
        if self.min_dist(node, q) >= eps {
            return 0;
        }
        let nd = &self.nodes[node];
        if self.max_dist(node, q) < eps {
            return (nd.end - nd.start) as usize;
        }
        if nd.left == u32::MAX {
            return (nd.start as usize..nd.end as usize)
                .filter(|&slot| self.dist_to_slot(slot, q) < eps)
                .count();
        }
        self.count_rec(nd.left as usize, q, eps) + self.count_rec(nd.right as usize, q, eps)
    }
}

/// Exact strict-radius counting on one coordinate via binary search.
#[derive(Debug, Clone)]
pub struct SortedAxis {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl SortedAxis {
    pub fn new(values: Vec<f64>) -> Self {
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        Self { values, sorted }
    }

    /// Number of values other than entry `t` with `|v - v_t| < eps`.
    pub fn count_within(&self, t: usize, eps: f64) -> usize {
        if !(eps > 0.0) {
            return 0;
        }
        let x = self.values[t];
        // Float subtraction is monotone, so both predicates flip exactly once
        // along the sorted order.
        let lower = self.sorted.partition_point(|&v| v < x && !(x - v < eps));
        let upper = self.sorted.partition_point(|&v| v <= x || v - x < eps);
        upper - lower - 1
    }
}
