//! Persistent cohomology of a Vietoris-Rips filtration over the two-element
//! field.
//!
//! Simplices are never stored as vertex lists. A simplex with vertices
//! `v_0 > v_1 > ... > v_d` is identified by its rank in the combinatorial
//! number system, `sum_i C(v_i, d + 1 - i)`, and coboundaries are enumerated
//! on the fly. The filtration order is diameter ascending with ties broken by
//! decreasing index. Columns of the coboundary matrix are reduced from the
//! latest simplex to the earliest, which makes two shortcuts available:
//!
//! - clearing: a simplex that was a pivot in the previous dimension cannot
//!   create a class and its column is skipped;
//! - emergent pairs: when the earliest cofacet of a simplex has the same
//!   diameter and is not yet a pivot, the column is already reduced.
//!
//! Pairs of zero persistence are computed but not reported.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// A simplex in the filtration: its diameter and combinatorial index.
#[derive(Debug, Clone, Copy)]
struct Entry {
    diam: f64,
    index: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}

impl Eq for Entry {}

impl Ord for Entry {
    /// Greater means earlier in the filtration, so a max-heap pops the
    /// earliest entry first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .diam
            .total_cmp(&self.diam)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One interval: dimension, birth, death (infinite for essential classes).
pub(crate) type Interval = (usize, f64, f64);

struct Binomials {
    n: usize,
    table: Vec<u64>,
}

impl Binomials {
    fn new(n: usize, max_k: usize) -> Result<Self> {
        let mut table = vec![0u64; (max_k + 1) * (n + 1)];
        for v in 0..=n {
            table[v] = 1;
            for k in 1..=max_k.min(v) {
                let a = table[(k - 1) * (n + 1) + v - 1];
                let b = if k <= v - 1 { table[k * (n + 1) + v - 1] } else { 0 };
                table[k * (n + 1) + v] = a.checked_add(b).ok_or_else(|| {
                    Error::invalid(format!("{n} points is too many to index {max_k}-vertex simplices"))
                })?;
            }
        }
        Ok(Self { n, table })
    }

    #[inline]
    fn get(&self, v: usize, k: usize) -> u64 {
        self.table[k * (self.n + 1) + v]
    }
}

struct Rips<'a> {
    n: usize,
    dist: &'a [f64],
    threshold: f64,
    binom: Binomials,
}

impl<'a> Rips<'a> {
    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Vertices of the `dim`-simplex `index`, largest first.
    fn vertices(&self, mut index: u64, dim: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut hi = self.n;
        for k in (1..=dim + 1).rev() {
            // largest v < hi with C(v, k) <= index
            let (mut lo, mut top) = (k - 1, hi);
            while top - lo > 1 {
                let mid = (lo + top) / 2;
                if self.binom.get(mid, k) <= index {
                    lo = mid;
                } else {
                    top = mid;
                }
            }
            out.push(lo);
            index -= self.binom.get(lo, k);
            hi = lo;
        }
    }

    /// Calls `f` for each cofacet within the threshold, in decreasing index
    /// order. `f` returns `false` to stop early.
    fn for_each_cofacet(&self, simplex: Entry, dim: usize, verts: &mut Vec<usize>, mut f: impl FnMut(Entry) -> bool) {
        self.vertices(simplex.index, dim, verts);
        let k = dim + 1;
        // vertices above the new one move up a position in the cofacet and
        // change coefficient; those below keep theirs
        let mut idx_above = 0u64;
        let mut idx_below = simplex.index;
        let mut p = 0;
        for j in (0..self.n).rev() {
            while p < k && verts[p] > j {
                idx_below -= self.binom.get(verts[p], k - p);
                idx_above += self.binom.get(verts[p], k + 1 - p);
                p += 1;
            }
            if p < k && verts[p] == j {
                continue;
            }
            let mut diam = simplex.diam;
            for &v in verts.iter() {
                diam = diam.max(self.d(j, v));
            }
            if diam > self.threshold {
                continue;
            }
            let index = idx_above + self.binom.get(j, k + 1 - p) + idx_below;
            if !f(Entry { diam, index }) {
                return;
            }
        }
    }

    fn push_coboundary(&self, simplex: Entry, dim: usize, verts: &mut Vec<usize>, heap: &mut BinaryHeap<Entry>) {
        self.for_each_cofacet(simplex, dim, verts, |c| {
            heap.push(c);
            true
        });
    }

    /// Edges within the threshold, earliest first.
    fn edges(&self) -> Vec<Entry> {
        let mut edges = Vec::new();
        for a in 1..self.n {
            for b in 0..a {
                let diam = self.d(a, b);
                if diam <= self.threshold {
                    edges.push(Entry {
                        diam,
                        index: self.binom.get(a, 2) + b as u64,
                    });
                }
            }
        }
        edges.sort_unstable_by(|x, y| y.cmp(x));
        edges
    }

    /// Triangles within the threshold that were not pivots, latest first.
    fn triangle_columns(&self, cleared: &FxHashMap<u64, u32>) -> Vec<Entry> {
        let mut cols = Vec::new();
        for a in 2..self.n {
            let ca = self.binom.get(a, 3);
            for b in 1..a {
                let dab = self.d(a, b);
                if dab > self.threshold {
                    continue;
                }
                let cb = ca + self.binom.get(b, 2);
                for c in 0..b {
                    let diam = dab.max(self.d(a, c)).max(self.d(b, c));
                    if diam > self.threshold {
                        continue;
                    }
                    let index = cb + c as u64;
                    if !cleared.contains_key(&index) {
                        cols.push(Entry { diam, index });
                    }
                }
            }
        }
        cols.sort_unstable();
        cols
    }

    /// Union-find over edges. Returns dimension-0 intervals and the edges
    /// that close cycles, latest first.
    fn dim0(&self, out: &mut Vec<Interval>) -> Vec<Entry> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut cycles = Vec::new();
        let mut verts = Vec::with_capacity(2);
        for e in self.edges() {
            self.vertices(e.index, 1, &mut verts);
            let (ra, rb) = (find(&mut parent, verts[0]), find(&mut parent, verts[1]));
            if ra == rb {
                cycles.push(e);
            } else {
                parent[ra.max(rb)] = ra.min(rb);
                if e.diam > 0.0 {
                    out.push((0, 0.0, e.diam));
                }
            }
        }
        for v in 0..self.n {
            if find(&mut parent, v) == v {
                out.push((0, 0.0, f64::INFINITY));
            }
        }
        cycles.reverse();
        cycles
    }

    /// Reduces the coboundary columns of `dim`-simplices. Returns the map
    /// from pivot cofacets to columns, which clears the next dimension.
    fn reduce(&self, dim: usize, columns: &[Entry], out: &mut Vec<Interval>) -> FxHashMap<u64, u32> {
        let mut pivot_of: FxHashMap<u64, u32> = FxHashMap::default();
        let mut addends: FxHashMap<u32, Vec<Entry>> = FxHashMap::default();
        let mut heap = BinaryHeap::new();
        let mut verts = Vec::with_capacity(dim + 2);
        let mut pending: Vec<Entry> = Vec::new();

        for (ci, &sigma) in columns.iter().enumerate() {
            let ci = ci as u32;
            heap.clear();
            let mut emergent = None;
            let mut check = true;
            self.for_each_cofacet(sigma, dim, &mut verts, |c| {
                if check && c.diam == sigma.diam {
                    if !pivot_of.contains_key(&c.index) {
                        emergent = Some(c);
                        return false;
                    }
                    check = false;
                }
                heap.push(c);
                true
            });
            if let Some(c) = emergent {
                pivot_of.insert(c.index, ci);
                continue;
            }
            pending.clear();
            loop {
                match pop_pivot(&mut heap) {
                    None => {
                        out.push((dim, sigma.diam, f64::INFINITY));
                        break;
                    }
                    Some(p) => match pivot_of.get(&p.index) {
                        Some(&other) => {
                            let o = columns[other as usize];
                            self.push_coboundary(o, dim, &mut verts, &mut heap);
                            pending.push(o);
                            if let Some(extra) = addends.get(&other) {
                                for &s in extra {
                                    self.push_coboundary(s, dim, &mut verts, &mut heap);
                                    pending.push(s);
                                }
                            }
                        }
                        None => {
                            pivot_of.insert(p.index, ci);
                            if !pending.is_empty() {
                                addends.insert(ci, cancel_pairs(&mut pending));
                            }
                            if p.diam > sigma.diam {
                                out.push((dim, sigma.diam, p.diam));
                            }
                            break;
                        }
                    },
                }
            }
        }
        pivot_of
    }
}

/// The earliest entry with odd multiplicity. Cancelled pairs above it are
/// discarded; the pivot itself stays in the heap exactly once.
fn pop_pivot(heap: &mut BinaryHeap<Entry>) -> Option<Entry> {
    loop {
        let top = heap.pop()?;
        let mut odd = true;
        while heap.peek() == Some(&top) {
            heap.pop();
            odd = !odd;
        }
        if odd {
            heap.push(top);
            return Some(top);
        }
    }
}

/// Sum over the two-element field: entries occurring an even number of
/// times vanish.
fn cancel_pairs(entries: &mut Vec<Entry>) -> Vec<Entry> {
    entries.sort_unstable_by_key(|e| e.index);
    let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
    for &e in entries.iter() {
        if out.last() == Some(&e) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    out
}

/// All intervals of positive length up to `max_dim`, for an `n x n`
/// distance matrix (row-major) truncated at `threshold`.
pub(crate) fn intervals(dist: &[f64], n: usize, threshold: f64, max_dim: usize) -> Result<Vec<Interval>> {
    let rips = Rips {
        n,
        dist,
        threshold,
        binom: Binomials::new(n, max_dim + 2)?,
    };
    let mut out = Vec::new();
    let edge_columns = rips.dim0(&mut out);
    if max_dim >= 1 {
        let pivots = rips.reduce(1, &edge_columns, &mut out);
        drop(edge_columns);
        if max_dim >= 2 {
            let triangles = rips.triangle_columns(&pivots);
            drop(pivots);
            rips.reduce(2, &triangles, &mut out);
        }
    }
    Ok(out)
}
