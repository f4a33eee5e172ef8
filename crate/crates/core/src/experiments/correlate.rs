use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{cloud_persistence, persistence_summary, FiltrationSpec, PersistenceSummary};
use crate::info::{info_summary_with, knn_oinformation_with, InfoSummary, KnnSettings};
use crate::manifolds::pca_rotate;
use crate::neighbors::{Metric, DEFAULT_JITTER, DEFAULT_K};
use crate::rng::{self, streams};
use crate::stats::{classify_triad, null_ensemble, spearman, CorrelationResult, Label, MultiSeries, NullSettings, ShiftScheme, SignificanceResult};

/// Settings of the triad correlation pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelateConfig {
    pub k: usize,
    pub jitter: f64,
    pub seed: u64,
    pub metric: Metric,
    pub subsample_cap: usize,
    /// Null draws per triad; 0 skips significance testing.
    pub draws: usize,
    pub scheme: ShiftScheme,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            jitter: DEFAULT_JITTER,
            seed: 0,
            metric: Metric::Chebyshev,
            subsample_cap: 128,
            draws: 100,
            scheme: ShiftScheme::Auto,
            workers: 0,
        }
    }
}

impl CorrelateConfig {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::invalid(format!("jitter must be finite and non-negative, got {}", self.jitter)));
        }
        if self.subsample_cap < 2 {
            return Err(Error::invalid("subsample cap must be at least 2"));
        }
        Ok(())
    }
}

fn choose3(c: u64) -> u64 {
    c * c.saturating_sub(1) * c.saturating_sub(2) / 6
}

/// The `rank`-th triad of `0..channels` in lexicographic order.
fn unrank_triad(channels: usize, mut rank: u64) -> [usize; 3] {
    let mut out = [0; 3];
    let mut start = 0;
    for (slot, o) in out.iter_mut().enumerate() {
        let left = 2 - slot as u64;
        let mut c = start;
        loop {
            // triads whose `slot` entry is `c`
            let block = match left {
                0 => 1,
                1 => (channels - c - 1) as u64,
                _ => {
                    let m = (channels - c - 1) as u64;
                    m * m.saturating_sub(1) / 2
                }
            };
            if rank < block {
                break;
            }
            rank -= block;
            c += 1;
        }
        *o = c;
        start = c + 1;
    }
    out
}

/// Triads of `0..channels` in lexicographic order. With a cap, the first
/// `cap` are kept, or with `sample_seed` a uniform random `cap`-subset
/// (still returned in lexicographic order).
pub fn enumerate_triads(channels: usize, cap: Option<usize>, sample_seed: Option<u64>) -> Result<Vec<[usize; 3]>> {
    if channels < 3 {
        return Err(Error::invalid(format!("need at least 3 channels, got {channels}")));
    }
    let total = choose3(channels as u64);
    let take = cap.map_or(total, |c| (c as u64).min(total));
    if cap == Some(0) {
        return Err(Error::invalid("triad cap must be at least 1"));
    }
    match sample_seed {
        Some(seed) if take < total => {
            let total = usize::try_from(total).map_err(|_| Error::invalid("too many channels to sample triads"))?;
            let mut ranks = index::sample(&mut rng::stream(seed, streams::TRIAD_SAMPLING), total, take as usize).into_vec();
            ranks.sort_unstable();
            Ok(ranks.into_iter().map(|r| unrank_triad(channels, r as u64)).collect())
        }
        _ => Ok((0..take).map(|r| unrank_triad(channels, r)).collect()),
    }
}

/// Information, topology and significance of one triad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadRecord {
    pub triad: [usize; 3],
    pub info: InfoSummary,
    pub info_pca: InfoSummary,
    pub h2: PersistenceSummary,
    pub h2_pca: PersistenceSummary,
    /// Fraction of variance on the first principal component.
    pub pc1_variance: f64,
    pub null_mean: Option<f64>,
    pub null_sd: Option<f64>,
    pub significance: Option<SignificanceResult>,
}

impl TriadRecord {
    fn info_stat(&self, name: &str) -> Option<f64> {
        match name {
            "o_norm" => self.info.o_norm,
            "tc" => Some(self.info.tc),
            "dtc" => Some(self.info.dtc),
            _ => None,
        }
    }

    fn topo_stat(&self, name: &str) -> Option<f64> {
        match name {
            "h2_count" => Some(self.h2.count as f64),
            "h2_avg_persistence" => Some(self.h2.avg_persistence),
            "pc1_variance" => Some(self.pc1_variance),
            _ => None,
        }
    }
}

pub const INFO_STATS: [&str; 3] = ["o_norm", "tc", "dtc"];
pub const TOPOLOGY_STATS: [&str; 3] = ["h2_count", "h2_avg_persistence", "pc1_variance"];

/// Spearman correlation of one information statistic with one topology
/// statistic; `result` is absent when it is undefined (fewer than three
/// triads, or a constant column), with the reason in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrelation {
    pub x: String,
    pub y: String,
    pub result: Option<CorrelationResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCorrelations {
    /// `all` or a significance label.
    pub class: String,
    pub n_triads: usize,
    pub pairs: Vec<PairCorrelation>,
}

impl ClassCorrelations {
    pub fn get(&self, x: &str, y: &str) -> Option<&CorrelationResult> {
        self.pairs.iter().find(|p| p.x == x && p.y == y).and_then(|p| p.result.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelateReport {
    pub config: CorrelateConfig,
    pub n_channels: usize,
    pub n_samples: usize,
    pub records: Vec<TriadRecord>,
    pub correlations: Vec<ClassCorrelations>,
}

impl CorrelateReport {
    pub fn class(&self, class: &str) -> Option<&ClassCorrelations> {
        self.correlations.iter().find(|c| c.class == class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn analyse_triad(ms: &MultiSeries, triad: [usize; 3], index: u64, config: &CorrelateConfig) -> Result<TriadRecord> {
    let seed: u64 = rng::substream(config.seed, streams::TRIAD_SEEDS, index).gen();
    let cloud = ms.triad_cloud(triad)?;
    let knn = KnnSettings {
        k: config.k,
        jitter: config.jitter,
        jitter_seed: seed,
        ..KnnSettings::default()
    };
    let pca = pca_rotate(&cloud)?;
    let spec = FiltrationSpec {
        subsample_cap: config.subsample_cap,
        ..FiltrationSpec::default()
    };
    let h2 = persistence_summary(&cloud_persistence(&cloud, config.metric, &spec, seed)?, 2)?;
    let h2_pca = persistence_summary(&cloud_persistence(&pca.rotated, config.metric, &spec, seed)?, 2)?;
    let info = info_summary_with(&cloud, &knn)?;
    let (null_mean, null_sd, significance) = if config.draws > 0 {
        let settings = NullSettings {
            draws: config.draws,
            scheme: config.scheme,
            knn,
            seed,
        };
        let null = null_ensemble(ms, triad, &settings)?;
        // the empirical value comes from the same estimator as the nulls
        let empirical = knn_oinformation_with(&cloud, &knn)?;
        let sig = classify_triad(empirical, &null)?;
        (Some(null.mean), Some(null.sd), Some(sig))
    } else {
        (None, None, None)
    };
    Ok(TriadRecord {
        triad,
        info_pca: info_summary_with(&pca.rotated, &knn)?,
        info,
        h2,
        h2_pca,
        pc1_variance: pca.explained_variance_ratio[0],
        null_mean,
        null_sd,
        significance,
    })
}

fn class_correlations(class: &str, records: &[&TriadRecord]) -> ClassCorrelations {
    let mut pairs = Vec::new();
    for x in INFO_STATS {
        for y in TOPOLOGY_STATS {
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter_map(|r| Some((r.info_stat(x)?, r.topo_stat(y)?)))
                .unzip();
            let (result, note) = match spearman(&xs, &ys) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            pairs.push(PairCorrelation {
                x: x.into(),
                y: y.into(),
                result,
                note,
            });
        }
    }
    ClassCorrelations {
        class: class.into(),
        n_triads: records.len(),
        pairs,
    }
}

/// Per-triad information, persistence (before and after PCA) and
/// significance, plus Spearman correlations between information and topology
/// statistics over all triads and within each significance class.
///
/// Records come back in the order of `triads` whatever the worker count.
pub fn correlate(ms: &MultiSeries, triads: &[[usize; 3]], config: &CorrelateConfig) -> Result<CorrelateReport> {
    config.validate()?;
    if ms.channels() < 3 {
        return Err(Error::invalid(format!("need at least 3 channels, got {}", ms.channels())));
    }
    if triads.is_empty() {
        return Err(Error::invalid("no triads to analyse"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let records = pool.install(|| {
        triads
            .par_iter()
            .enumerate()
            .map(|(i, &t)| analyse_triad(ms, t, i as u64, config))
            .collect::<Result<Vec<_>>>()
    })?;
    let all: Vec<&TriadRecord> = records.iter().collect();
    let mut correlations = vec![class_correlations("all", &all)];
    if config.draws > 0 {
        for label in [Label::Redundant, Label::Synergistic, Label::Nonsignificant] {
            let members: Vec<&TriadRecord> = records
                .iter()
                .filter(|r| r.significance.map(|s| s.label) == Some(label))
                .collect();
            correlations.push(class_correlations(label.name(), &members));
        }
    }
    Ok(CorrelateReport {
        config: *config,
        n_channels: ms.channels(),
        n_samples: ms.len(),
        records,
        correlations,
    })
}
