//! Distances, nearest-neighbour queries and marginal range counts.
//!
//! The free functions here ([`kth_neighbor_distance`], [`marginal_range_count`])
//! are brute-force reference implementations. [`NeighborIndex`] answers the
//! same queries through k-d trees and is what the estimators use; property
//! tests hold the two to identical answers.

mod digamma;
mod kdtree;

pub use digamma::digamma;
pub(crate) use digamma::DigammaTable;
pub use kdtree::{KdTree, SortedAxis};

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{format_f64, PointCloud};
use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// Default neighbour order for the estimators.
pub const DEFAULT_K: usize = 4;
/// Default half-width of the tie-breaking jitter.
pub const DEFAULT_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Chebyshev,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Metric::Chebyshev => chebyshev(a, b),
            Metric::Euclidean => euclidean(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Chebyshev => "chebyshev",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chebyshev" | "max" => Ok(Metric::Chebyshev),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "vectors have different lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Max-norm distance.
pub fn chebyshev(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(chebyshev_unchecked(a, b))
}

#[inline]
pub(crate) fn chebyshev_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    /// Wraps row-major entries after checking symmetry, zero diagonal,
    /// non-negativity and finiteness.
    pub fn from_entries(entries: Vec<f64>, n: usize, metric: Metric) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for an {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) = {v} is not a finite non-negative distance"
                    )));
                }
                if v != entries[j * n + i] {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, entries, metric })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Entry-wise scaling by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("scale factor must be positive"));
        }
        Ok(Self {
            n: self.n,
            entries: self.entries.iter().map(|v| v * c).collect(),
            metric: self.metric,
        })
    }

    /// Minimum over points of the maximum distance to all other points.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }

    /// Row-major CSV, 17 significant digits, no header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|v| format_f64(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R, metric: Metric) -> Result<Self> {
        let cloud = PointCloud::read_csv(r)?;
        if cloud.n() != cloud.d() {
            return Err(Error::invalid(format!(
                "distance matrix must be square, got {}x{}",
                cloud.n(),
                cloud.d()
            )));
        }
        Self::from_entries(cloud.as_slice().to_vec(), cloud.n(), metric)
    }
}

/// All pairwise distances of a cloud.
pub fn distance_matrix(cloud: &PointCloud, metric: Metric) -> Result<DistanceMatrix> {
    let n = cloud.n();
    if n < 2 {
        return Err(Error::invalid("distance matrix needs at least two points"));
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = metric.distance(cloud.row(i), cloud.row(j))?;
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix { n, entries, metric })
}

/// The neighbour distance of one point: `epsilon` is the Chebyshev distance
/// from point `t` to its `k`-th nearest neighbour in the joint space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborQuery {
    pub t: usize,
    pub k: usize,
    pub epsilon: f64,
}

fn check_k(cloud: &PointCloud, t: usize, k: usize) -> Result<()> {
    if t >= cloud.n() {
        return Err(Error::invalid(format!("point index {t} out of range")));
    }
    if k == 0 || k >= cloud.n() {
        return Err(Error::invalid(format!(
            "neighbour order k = {k} must satisfy 1 <= k < n = {}",
            cloud.n()
        )));
    }
    Ok(())
}

/// Brute-force k-th smallest Chebyshev distance from point `t` to the others.
pub fn kth_neighbor_distance(cloud: &PointCloud, t: usize, k: usize) -> Result<f64> {
    check_k(cloud, t, k)?;
    let p = cloud.row(t);
    let mut d: Vec<f64> = (0..cloud.n())
        .filter(|&s| s != t)
        .map(|s| chebyshev_unchecked(p, cloud.row(s)))
        .collect();
    let (_, kth, _) = d.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(*kth)
}

fn check_dims(cloud: &PointCloud, dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::invalid("marginal needs at least one column"));
    }
    if let Some(&j) = dims.iter().find(|&&j| j >= cloud.d()) {
        return Err(Error::invalid(format!("column {j} out of range")));
    }
    Ok(())
}

/// Brute-force count of points `s != t` whose Chebyshev distance to `t`,
/// restricted to `dims`, is strictly below `eps`.
pub fn marginal_range_count(
    cloud: &PointCloud,
    dims: &[usize],
    t: usize,
    eps: f64,
) -> Result<usize> {
    check_dims(cloud, dims)?;
    if t >= cloud.n() {
        return Err(Error::invalid(format!("point index {t} out of range")));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {eps}")));
    }
    let p = cloud.row(t);
    Ok((0..cloud.n())
        .filter(|&s| s != t)
        .filter(|&s| {
            let q = cloud.row(s);
            dims.iter()
                .fold(0.0_f64, |m, &j| m.max((p[j] - q[j]).abs()))
                < eps
        })
        .count())
}

/// Adds independent uniform noise on `[-amplitude, amplitude]` to every
/// coordinate. Breaks distance ties in degenerate clouds.
pub fn jitter(cloud: &PointCloud, amplitude: f64, seed: u64) -> Result<PointCloud> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::invalid("jitter amplitude must be finite and >= 0"));
    }
    if amplitude == 0.0 {
        return Ok(cloud.clone());
    }
    let mut rng = rng::stream(seed, streams::JITTER);
    let data = cloud
        .as_slice()
        .iter()
        .map(|v| v + amplitude * rng.gen_range(-1.0..=1.0))
        .collect();
    PointCloud::new(data, cloud.n(), cloud.d())
}

/// Range counter over one marginal subspace.
#[derive(Debug, Clone)]
enum Marginal {
    Axis(SortedAxis),
    Tree(KdTree),
}

impl Marginal {
    fn new(cloud: &PointCloud, dims: &[usize]) -> Self {
        if dims.len() == 1 {
            Marginal::Axis(SortedAxis::new(cloud.column(dims[0])))
        } else {
            Marginal::Tree(KdTree::new(project(cloud, dims), dims.len()))
        }
    }

    fn count_within(&self, t: usize, eps: f64) -> usize {
        match self {
            Marginal::Axis(a) => a.count_within(t, eps),
            Marginal::Tree(tree) => tree.count_within(t, eps),
        }
    }
}

fn project(cloud: &PointCloud, dims: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(cloud.n() * dims.len());
    for r in cloud.rows() {
        out.extend(dims.iter().map(|&j| r[j]));
    }
    out
}

/// Tree-backed neighbour structure over a fixed set of columns of a cloud.
///
/// `joint` columns define the neighbour search; range counts may be asked for
/// any subset of columns and build their own index on first use.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    cloud: &'a PointCloud,
    joint_dims: Vec<usize>,
    joint: KdTree,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(cloud: &'a PointCloud, joint_dims: &[usize]) -> Result<Self> {
        check_dims(cloud, joint_dims)?;
        Ok(Self {
            cloud,
            joint_dims: joint_dims.to_vec(),
            joint: KdTree::new(project(cloud, joint_dims), joint_dims.len()),
        })
    }

    pub fn joint_dims(&self) -> &[usize] {
        &self.joint_dims
    }

    /// `epsilon` for every point at neighbour order `k`.
    pub fn neighbor_distances(&self, k: usize) -> Result<Vec<NeighborQuery>> {
        check_k(self.cloud, 0, k)?;
        Ok((0..self.cloud.n())
            .map(|t| NeighborQuery {
                t,
                k,
                epsilon: self.joint.kth_distance(t, k),
            })
            .collect())
    }

    pub fn kth_distance(&self, t: usize, k: usize) -> Result<f64> {
        check_k(self.cloud, t, k)?;
        Ok(self.joint.kth_distance(t, k))
    }

    /// Strict range counts in the `dims` marginal at each query's radius.
    pub fn marginal_counts(&self, dims: &[usize], queries: &[NeighborQuery]) -> Result<Vec<usize>> {
        check_dims(self.cloud, dims)?;
        let m = Marginal::new(self.cloud, dims);
        Ok(queries
            .iter()
            .map(|q| m.count_within(q.t, q.epsilon))
            .collect())
    }
}
