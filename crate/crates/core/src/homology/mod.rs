//! Vietoris-Rips persistent homology in dimensions 0 to 2.
//!
//! The diagram is computed by [`rips_persistence`] from a distance matrix;
//! [`cloud_persistence`] wraps subsampling and the distance computation for
//! point clouds. Only intervals of positive length are reported. Classes that
//! survive the threshold are essential and carry an infinite death.

mod rips;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::neighbors::{distance_matrix, DistanceMatrix, Metric};
use crate::rng::{self, streams};

pub const DEFAULT_MAX_DIM: usize = 2;
pub const DEFAULT_SUBSAMPLE_CAP: usize = 512;

/// Parameters of a Rips filtration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiltrationSpec {
    /// Highest homology dimension computed, at most 2.
    pub max_homology_dim: usize,
    /// Largest simplex diameter included; `None` means the enclosing radius
    /// of the input.
    pub threshold: Option<f64>,
    /// Largest number of points kept by [`cloud_persistence`].
    pub subsample_cap: usize,
}

impl Default for FiltrationSpec {
    fn default() -> Self {
        Self {
            max_homology_dim: DEFAULT_MAX_DIM,
            threshold: None,
            subsample_cap: DEFAULT_SUBSAMPLE_CAP,
        }
    }
}

impl FiltrationSpec {
    fn validate(&self) -> Result<()> {
        if self.max_homology_dim > 2 {
            return Err(Error::invalid(format!(
                "max homology dimension must be 0, 1 or 2, got {}",
                self.max_homology_dim
            )));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return Err(Error::invalid(format!("threshold must be positive, got {t}")));
            }
        }
        if self.subsample_cap < 2 {
            return Err(Error::invalid("subsample cap must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    /// `f64::INFINITY` for essential classes.
    pub death: f64,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    /// Sorted by dimension, then birth, then death.
    pub pairs: Vec<PersistencePair>,
    pub metric: Metric,
    pub spec: FiltrationSpec,
    /// The threshold actually used.
    pub threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    dims: Vec<usize>,
    pairs: Vec<(usize, f64, Option<f64>)>,
    threshold: f64,
    metric: Metric,
}

impl PersistenceDiagram {
    /// Pairs in dimension `dim`.
    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Finite persistences in dimension `dim`, longest first.
    pub fn bars(&self, dim: usize) -> Vec<f64> {
        let mut bars: Vec<f64> = self
            .in_dim(dim)
            .filter(|p| !p.is_essential())
            .map(PersistencePair::persistence)
            .collect();
        bars.sort_by(|a, b| b.total_cmp(a));
        bars
    }

    /// `{dims, pairs: [[dim, birth, death|null]], threshold, metric}`.
    pub fn to_json(&self) -> String {
        let doc = DiagramJson {
            dims: (0..=self.spec.max_homology_dim).collect(),
            pairs: self
                .pairs
                .iter()
                .map(|p| (p.dim, p.birth, (!p.is_essential()).then_some(p.death)))
                .collect(),
            threshold: self.threshold,
            metric: self.metric,
        };
        serde_json::to_string(&doc).expect("diagram serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: DiagramJson = serde_json::from_str(s)?;
        let max_homology_dim = doc.dims.iter().copied().max().unwrap_or(0);
        Ok(Self {
            pairs: doc
                .pairs
                .into_iter()
                .map(|(dim, birth, death)| PersistencePair {
                    dim,
                    birth,
                    death: death.unwrap_or(f64::INFINITY),
                })
                .collect(),
            metric: doc.metric,
            spec: FiltrationSpec {
                max_homology_dim,
                threshold: Some(doc.threshold),
                ..FiltrationSpec::default()
            },
            threshold: doc.threshold,
        })
    }
}

/// Statistics of the finite intervals in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSummary {
    pub dim: usize,
    /// Number of finite intervals.
    pub count: usize,
    pub avg_persistence: f64,
    pub max_persistence: f64,
    /// Number of essential classes, kept out of the statistics above.
    pub essential: usize,
}

/// Persistence diagram of the Rips filtration of `dmat` over the field with
/// two elements.
pub fn rips_persistence(dmat: &DistanceMatrix, spec: &FiltrationSpec) -> Result<PersistenceDiagram> {
    spec.validate()?;
    let n = dmat.n();
    if n < 2 {
        return Err(Error::invalid("persistence needs at least two points"));
    }
    let threshold = spec.threshold.unwrap_or_else(|| dmat.enclosing_radius());
    let mut dist = Vec::with_capacity(n * n);
    for i in 0..n {
        dist.extend_from_slice(dmat.row(i));
    }
    let mut pairs: Vec<PersistencePair> = rips::intervals(&dist, n, threshold, spec.max_homology_dim)?
        .into_iter()
        .map(|(dim, birth, death)| PersistencePair { dim, birth, death })
        .collect();
    pairs.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
    });
    Ok(PersistenceDiagram {
        pairs,
        metric: dmat.metric(),
        spec: *spec,
        threshold,
    })
}

/// Count, mean and maximum persistence of the finite intervals in `dim`.
pub fn persistence_summary(diagram: &PersistenceDiagram, dim: usize) -> Result<PersistenceSummary> {
    if dim > diagram.spec.max_homology_dim {
        return Err(Error::invalid(format!(
            "dimension {dim} exceeds the diagram's maximum {}",
            diagram.spec.max_homology_dim
        )));
    }
    let bars = diagram.bars(dim);
    let count = bars.len();
    let (avg, max) = if count == 0 {
        (0.0, 0.0)
    } else {
        (bars.iter().sum::<f64>() / count as f64, bars[0])
    };
    Ok(PersistenceSummary {
        dim,
        count,
        avg_persistence: avg,
        max_persistence: max,
        essential: diagram.in_dim(dim).filter(|p| p.is_essential()).count(),
    })
}

/// Uniform random subset of `min(cap, n)` rows without replacement, in
/// their original order.
pub fn subsample(cloud: &PointCloud, cap: usize, seed: u64) -> Result<PointCloud> {
    if cap < 2 {
        return Err(Error::invalid(format!("subsample cap must be at least 2, got {cap}")));
    }
    if cap >= cloud.n() {
        return Ok(cloud.clone());
    }
    let mut rng = rng::stream(seed, streams::SUBSAMPLE);
    let mut rows = index::sample(&mut rng, cloud.n(), cap).into_vec();
    rows.sort_unstable();
    cloud.select_rows(&rows)
}

/// Subsamples to `spec.subsample_cap` points, builds the distance matrix
/// under `metric` and computes the diagram.
pub fn cloud_persistence(
    cloud: &PointCloud,
    metric: Metric,
    spec: &FiltrationSpec,
    seed: u64,
) -> Result<PersistenceDiagram> {
    spec.validate()?;
    let sub = subsample(cloud, spec.subsample_cap, seed)?;
    rips_persistence(&distance_matrix(&sub, metric)?, spec)
}
