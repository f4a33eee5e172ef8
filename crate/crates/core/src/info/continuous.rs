//! Nearest-neighbour estimators of entropy and multivariate information.
//!
//! Every multivariate quantity here is an entropy combination evaluated with a
//! single neighbour search in the joint space. For each sample `t`, `eps(t)` is
//! the Chebyshev distance to its k-th nearest neighbour; each marginal entropy
//! then enters through the number of samples strictly within `eps(t)` in that
//! marginal. With `F(m) = psi(m) - psi(n)` and marginal counts `k_V(t)`,
//!
//! ```text
//! TC  = F(k) - sum_i <F(k_i)>
//! DTC = (N - 1) F(k) - sum_i <F(k_-i)>
//! O   = (2 - N) F(k) - sum_i <F(k_i) - F(k_-i)>
//! ```
//!
//! where `k_i` counts in the single column `i` and `k_-i` in all columns but
//! `i`. The distance terms of the individual entropies cancel exactly in these
//! combinations. Results are in nats.

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::neighbors::{self, DigammaTable, NeighborIndex, NeighborQuery};

/// How a raw marginal count enters the digamma terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CountConvention {
    /// `psi(count + 1)`: the sample itself is counted, as in KSG algorithm 1.
    #[default]
    PlusOne,
    /// `psi(count)`.
    Raw,
}

/// Estimator settings shared by every continuous estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnnSettings {
    pub k: usize,
    /// Half-width of the uniform tie-breaking noise; zero disables it.
    pub jitter: f64,
    pub jitter_seed: u64,
    pub convention: CountConvention,
}

impl Default for KnnSettings {
    fn default() -> Self {
        Self {
            k: neighbors::DEFAULT_K,
            jitter: neighbors::DEFAULT_JITTER,
            jitter_seed: 0,
            convention: CountConvention::PlusOne,
        }
    }
}

impl KnnSettings {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn without_jitter(self) -> Self {
        Self { jitter: 0.0, ..self }
    }
}

/// Continuous information summary of one cloud, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSummary {
    pub tc: f64,
    pub dtc: f64,
    pub o: f64,
    pub s: f64,
    /// `o / s`; `None` when `s <= 0`.
    pub o_norm: Option<f64>,
    pub k: usize,
    pub n: usize,
    pub units: Units,
    pub jitter_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

impl InfoSummary {
    pub(crate) fn from_parts(tc: f64, dtc: f64, k: usize, n: usize, units: Units, jitter_seed: u64) -> Self {
        let o = tc - dtc;
        let s = tc + dtc;
        Self {
            tc,
            dtc,
            o,
            s,
            o_norm: (s > 0.0).then(|| o / s),
            k,
            n,
            units,
            jitter_seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

/// Per-sample neighbour radii and marginal counts for one cloud.
///
/// `singles[i][t]` counts samples within `eps(t)` in column `i` alone and
/// `leave_one_out[i][t]` in every column except `i`.
#[derive(Debug, Clone)]
pub struct SharedCounts {
    pub n: usize,
    pub k: usize,
    pub queries: Vec<NeighborQuery>,
    pub singles: Vec<Vec<usize>>,
    pub leave_one_out: Vec<Vec<usize>>,
    convention: CountConvention,
    jitter_seed: u64,
    psi: DigammaTable,
}

fn check_sizes(cloud: &PointCloud, k: usize, min_d: usize) -> Result<()> {
    if cloud.d() < min_d {
        return Err(Error::invalid(format!(
            "estimator needs at least {min_d} columns, cloud has {}",
            cloud.d()
        )));
    }
    if k == 0 {
        return Err(Error::invalid("neighbour order k must be at least 1"));
    }
    if cloud.n() <= k {
        return Err(Error::invalid(format!(
            "need more samples than neighbours: n = {}, k = {k}",
            cloud.n()
        )));
    }
    Ok(())
}

fn prepare(cloud: &PointCloud, settings: &KnnSettings) -> Result<PointCloud> {
    if settings.jitter == 0.0 {
        if let Some(j) = (0..cloud.d()).find(|&j| {
            let first = cloud.get(0, j);
            (1..cloud.n()).all(|t| cloud.get(t, j) == first)
        }) {
            return Err(Error::degenerate(format!(
                "column {j} is constant; enable jitter to break ties"
            )));
        }
    }
    neighbors::jitter(cloud, settings.jitter, settings.jitter_seed)
}

fn joint_queries(index: &NeighborIndex<'_>, k: usize) -> Result<Vec<NeighborQuery>> {
    let queries = index.neighbor_distances(k)?;
    if let Some(q) = queries.iter().find(|q| !(q.epsilon > 0.0)) {
        return Err(Error::degenerate(format!(
            "sample {} has {} or more exact duplicates; enable jitter to break ties",
            q.t, q.k
        )));
    }
    Ok(queries)
}

impl SharedCounts {
    /// One joint neighbour search plus `2 d` marginal range searches.
    pub fn compute(cloud: &PointCloud, settings: &KnnSettings) -> Result<Self> {
        check_sizes(cloud, settings.k, 2)?;
        let data = prepare(cloud, settings)?;
        let d = data.d();
        let all: Vec<usize> = (0..d).collect();
        let index = NeighborIndex::new(&data, &all)?;
        let queries = joint_queries(&index, settings.k)?;
        let mut singles = Vec::with_capacity(d);
        let mut leave_one_out = Vec::with_capacity(d);
        for i in 0..d {
            singles.push(index.marginal_counts(&[i], &queries)?);
            let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
            leave_one_out.push(index.marginal_counts(&rest, &queries)?);
        }
        let counts = Self {
            n: data.n(),
            k: settings.k,
            queries,
            singles,
            leave_one_out,
            convention: settings.convention,
            jitter_seed: settings.jitter_seed,
            psi: DigammaTable::new(data.n()),
        };
        counts.check_counts()?;
        Ok(counts)
    }

    fn check_counts(&self) -> Result<()> {
        if self.convention == CountConvention::Raw {
            let zero = self
                .singles
                .iter()
                .chain(&self.leave_one_out)
                .any(|c| c.iter().any(|&m| m == 0));
            if zero {
                return Err(Error::degenerate(
                    "a marginal count is zero; psi(0) is undefined under the raw count convention",
                ));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.singles.len()
    }

    #[inline]
    fn f(&self, m: usize) -> f64 {
        self.psi.get(m) - self.psi.get(self.n)
    }

    #[inline]
    fn f_count(&self, count: usize) -> f64 {
        match self.convention {
            CountConvention::PlusOne => self.f(count + 1),
            CountConvention::Raw => self.f(count),
        }
    }

    fn mean_f(&self, counts: &[usize]) -> f64 {
        counts.iter().map(|&c| self.f_count(c)).sum::<f64>() / self.n as f64
    }

    pub fn total_correlation(&self) -> f64 {
        let marg: f64 = self.singles.iter().map(|c| self.mean_f(c)).sum();
        self.f(self.k) - marg
    }

    pub fn dual_total_correlation(&self) -> f64 {
        let d = self.dims() as f64;
        let marg: f64 = self.leave_one_out.iter().map(|c| self.mean_f(c)).sum();
        (d - 1.0) * self.f(self.k) - marg
    }

    /// O-information via the single-sum form
    /// `(2 - N) [F(k) + 1/(N - 2) sum_i <F(k_i) - F(k_-i)>]`.
    pub fn o_information(&self) -> Result<f64> {
        let d = self.dims();
        if d < 3 {
            return Err(Error::invalid(format!(
                "O-information needs at least 3 variables, got {d}"
            )));
        }
        let mut acc = 0.0;
        for i in 0..d {
            let diff: f64 = self.singles[i]
                .iter()
                .zip(&self.leave_one_out[i])
                .map(|(&a, &b)| self.f_count(a) - self.f_count(b))
                .sum();
            acc += diff / self.n as f64;
        }
        let nv = d as f64;
        Ok((2.0 - nv) * (self.f(self.k) + acc / (nv - 2.0)))
    }

    pub fn summary(&self) -> InfoSummary {
        InfoSummary::from_parts(
            self.total_correlation(),
            self.dual_total_correlation(),
            self.k,
            self.n,
            Units::Nats,
            self.jitter_seed,
        )
    }
}

/// Kozachenko-Leonenko entropy with max-norm balls:
/// `psi(n) - psi(k) + d <ln(2 eps(t))>`.
pub fn kl_entropy_with(cloud: &PointCloud, settings: &KnnSettings) -> Result<f64> {
    check_sizes(cloud, settings.k, 1)?;
    let data = prepare(cloud, settings)?;
    let all: Vec<usize> = (0..data.d()).collect();
    let index = NeighborIndex::new(&data, &all)?;
    let queries = joint_queries(&index, settings.k)?;
    let n = data.n() as f64;
    let mean_log: f64 = queries.iter().map(|q| (2.0 * q.epsilon).ln()).sum::<f64>() / n;
    Ok(neighbors::digamma(n)? - neighbors::digamma(settings.k as f64)? + data.d() as f64 * mean_log)
}

pub fn kl_entropy(cloud: &PointCloud, k: usize) -> Result<f64> {
    kl_entropy_with(cloud, &KnnSettings::with_k(k))
}

/// KSG (algorithm 1) mutual information between two column blocks:
/// `psi(k) + psi(n) - <psi(n_x + 1) + psi(n_y + 1)>`.
pub fn ksg_mutual_information_with(
    cloud: &PointCloud,
    block_x: &[usize],
    block_y: &[usize],
    settings: &KnnSettings,
) -> Result<f64> {
    if block_x.is_empty() || block_y.is_empty() {
        return Err(Error::invalid("both blocks of the split must be nonempty"));
    }
    if block_x.iter().any(|j| block_y.contains(j)) {
        return Err(Error::invalid("blocks of the split must be disjoint"));
    }
    check_sizes(cloud, settings.k, 1)?;
    let data = prepare(cloud, settings)?;
    let joint: Vec<usize> = block_x.iter().chain(block_y).copied().collect();
    let index = NeighborIndex::new(&data, &joint)?;
    let queries = joint_queries(&index, settings.k)?;
    let nx = index.marginal_counts(block_x, &queries)?;
    let ny = index.marginal_counts(block_y, &queries)?;
    let psi = DigammaTable::new(data.n() + 1);
    let shift = match settings.convention {
        CountConvention::PlusOne => 1,
        CountConvention::Raw => 0,
    };
    let n = data.n();
    let mut mean = 0.0;
    for (&a, &b) in nx.iter().zip(&ny) {
        if a + shift == 0 || b + shift == 0 {
            return Err(Error::degenerate("zero marginal count under the raw convention"));
        }
        mean += psi.get(a + shift) + psi.get(b + shift);
    }
    mean /= n as f64;
    Ok(psi.get(settings.k) + psi.get(n) - mean)
}

pub fn ksg_mutual_information(
    cloud: &PointCloud,
    block_x: &[usize],
    block_y: &[usize],
    k: usize,
) -> Result<f64> {
    ksg_mutual_information_with(cloud, block_x, block_y, &KnnSettings::with_k(k))
}

pub fn knn_oinformation_with(cloud: &PointCloud, settings: &KnnSettings) -> Result<f64> {
    check_sizes(cloud, settings.k, 3)?;
    SharedCounts::compute(cloud, settings)?.o_information()
}

pub fn knn_oinformation(cloud: &PointCloud, k: usize) -> Result<f64> {
    knn_oinformation_with(cloud, &KnnSettings::with_k(k))
}

pub fn knn_total_correlation_with(cloud: &PointCloud, settings: &KnnSettings) -> Result<f64> {
    Ok(SharedCounts::compute(cloud, settings)?.total_correlation())
}

pub fn knn_total_correlation(cloud: &PointCloud, k: usize) -> Result<f64> {
    knn_total_correlation_with(cloud, &KnnSettings::with_k(k))
}

pub fn knn_dual_total_correlation_with(cloud: &PointCloud, settings: &KnnSettings) -> Result<f64> {
    Ok(SharedCounts::compute(cloud, settings)?.dual_total_correlation())
}

pub fn knn_dual_total_correlation(cloud: &PointCloud, k: usize) -> Result<f64> {
    knn_dual_total_correlation_with(cloud, &KnnSettings::with_k(k))
}

/// TC, DTC, O, S and normalised O from one shared set of searches.
pub fn info_summary_with(cloud: &PointCloud, settings: &KnnSettings) -> Result<InfoSummary> {
    check_sizes(cloud, settings.k, 3)?;
    Ok(SharedCounts::compute(cloud, settings)?.summary())
}

pub fn info_summary(cloud: &PointCloud, k: usize) -> Result<InfoSummary> {
    info_summary_with(cloud, &KnnSettings::with_k(k))
}
