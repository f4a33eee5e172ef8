//! Circular-shift null models for O-information, three-sigma classification
//! of triads, and Spearman rank correlation.

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::info::{knn_oinformation_with, KnnSettings};
use crate::rng::{self, streams};

/// Default number of null draws per triad.
pub const DEFAULT_DRAWS: usize = 1000;
/// Default minimum shift, as a fraction of the series length, when the series
/// has a single segment.
pub const DEFAULT_MIN_OFFSET_FRACTION: f64 = 0.1;
/// |z| beyond which a triad is called significant.
pub const SIGMA_THRESHOLD: f64 = 3.0;

/// Multichannel time series (rows are time points, columns channels) made of
/// one or more concatenated segments.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    series: PointCloud,
    /// Start index of every segment after the first.
    boundaries: Vec<usize>,
}

impl MultiSeries {
    pub fn new(series: PointCloud, boundaries: Vec<usize>) -> Result<Self> {
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= series.n() {
                return Err(Error::invalid(format!(
                    "segment boundaries must be strictly increasing within 1..{}, got {boundaries:?}",
                    series.n()
                )));
            }
            prev = b;
        }
        Ok(Self { series, boundaries })
    }

    /// A single unsegmented series.
    pub fn single(series: PointCloud) -> Self {
        Self {
            series,
            boundaries: Vec::new(),
        }
    }

    /// Concatenates equally shaped runs, recording where each one starts.
    pub fn concat(runs: &[PointCloud]) -> Result<Self> {
        let first = runs.first().ok_or_else(|| Error::invalid("no runs to concatenate"))?;
        let d = first.d();
        let mut data = Vec::new();
        let mut boundaries = Vec::new();
        for r in runs {
            if r.d() != d {
                return Err(Error::invalid("runs have different channel counts"));
            }
            if !data.is_empty() {
                boundaries.push(data.len() / d);
            }
            data.extend_from_slice(r.as_slice());
        }
        let n = data.len() / d;
        Self::new(PointCloud::new(data, n, d)?, boundaries)
    }

    pub fn len(&self) -> usize {
        self.series.n()
    }

    pub fn is_empty(&self) -> bool {
        self.series.n() == 0
    }

    pub fn channels(&self) -> usize {
        self.series.d()
    }

    pub fn series(&self) -> &PointCloud {
        &self.series
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut starts = vec![0];
        starts.extend(&self.boundaries);
        let mut ends = self.boundaries.clone();
        ends.push(self.len());
        starts.into_iter().zip(ends).map(|(s, e)| s..e).collect()
    }

    pub fn channel(&self, j: usize) -> Vec<f64> {
        self.series.column(j)
    }

    fn check_triad(&self, triad: [usize; 3]) -> Result<()> {
        if let Some(&bad) = triad.iter().find(|&&c| c >= self.channels()) {
            return Err(Error::invalid(format!(
                "channel {bad} out of range for {} channels",
                self.channels()
            )));
        }
        if triad[0] == triad[1] || triad[0] == triad[2] || triad[1] == triad[2] {
            return Err(Error::invalid(format!("triad channels must be distinct, got {triad:?}")));
        }
        Ok(())
    }

    /// The three channels of `triad` as an `n x 3` cloud.
    pub fn triad_cloud(&self, triad: [usize; 3]) -> Result<PointCloud> {
        self.check_triad(triad)?;
        self.series.select_columns(&triad)
    }
}

/// Rotates `channel` forward by `offset` places: entry `i` moves to
/// `(i + offset) mod len`.
pub fn circular_shift(channel: &[f64], offset: usize) -> Vec<f64> {
    let mut out = channel.to_vec();
    if !out.is_empty() {
        out.rotate_right(offset % channel.len());
    }
    out
}

/// How null offsets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftScheme {
    /// Cross-segment for segmented series, otherwise a minimum offset of
    /// [`DEFAULT_MIN_OFFSET_FRACTION`] of the length.
    #[default]
    Auto,
    /// The origin of each channel lands in a segment other than the first.
    CrossSegment,
    /// Circular distance between the shifted and original origin is at least
    /// this fraction of the length.
    MinOffset(f64),
}

impl ShiftScheme {
    /// Inclusive range of admissible offsets for a series.
    fn offset_range(self, ms: &MultiSeries) -> Result<(usize, usize)> {
        let n = ms.len();
        match self {
            ShiftScheme::Auto if ms.boundaries.is_empty() => {
                ShiftScheme::MinOffset(DEFAULT_MIN_OFFSET_FRACTION).offset_range(ms)
            }
            ShiftScheme::Auto | ShiftScheme::CrossSegment => {
                let first = *ms.boundaries.first().ok_or_else(|| {
                    Error::invalid("cross-segment shifts need at least two segments")
                })?;
                Ok((first, n - 1))
            }
            ShiftScheme::MinOffset(f) => {
                if !(f > 0.0 && f < 0.5) {
                    return Err(Error::invalid(format!(
                        "minimum offset fraction must be in (0, 0.5), got {f}"
                    )));
                }
                let lo = ((f * n as f64).ceil() as usize).max(1);
                if lo > n - lo {
                    return Err(Error::invalid(format!("series of length {n} is too short to shift")));
                }
                Ok((lo, n - lo))
            }
        }
    }
}

/// Settings of a circular-shift null ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSettings {
    pub draws: usize,
    pub scheme: ShiftScheme,
    pub knn: KnnSettings,
    pub seed: u64,
}

impl Default for NullSettings {
    fn default() -> Self {
        Self {
            draws: DEFAULT_DRAWS,
            scheme: ShiftScheme::Auto,
            knn: KnnSettings::default(),
            seed: 0,
        }
    }
}

/// Null O-information values with their mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullEnsemble {
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

impl NullEnsemble {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("null ensemble needs at least one value"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(Self { values, mean, sd })
    }
}

/// The three shifted channels of `triad` for null draw `draw`.
fn shifted_triad(ms: &MultiSeries, triad: [usize; 3], range: (usize, usize), seed: u64, draw: usize) -> Result<PointCloud> {
    let mut rng = rng::substream(seed, streams::NULL_SHIFTS, draw as u64);
    let cols: Vec<Vec<f64>> = triad
        .iter()
        .map(|&c| circular_shift(&ms.channel(c), rng.gen_range(range.0..=range.1)))
        .collect();
    PointCloud::from_columns(&cols)
}

fn null_values(ms: &MultiSeries, triad: [usize; 3], settings: &NullSettings) -> Result<Vec<f64>> {
    ms.check_triad(triad)?;
    if settings.draws == 0 {
        return Err(Error::invalid("need at least one null draw"));
    }
    let range = settings.scheme.offset_range(ms)?;
    (0..settings.draws)
        .into_par_iter()
        .map(|draw| {
            let cloud = shifted_triad(ms, triad, range, settings.seed, draw)?;
            knn_oinformation_with(&cloud, &settings.knn)
        })
        .collect()
}

/// O-information of `settings.draws` circularly shifted copies of `triad`.
///
/// Offsets depend only on `(seed, draw)`, so results are reproducible and
/// independent of scheduling.
pub fn null_ensemble(ms: &MultiSeries, triad: [usize; 3], settings: &NullSettings) -> Result<NullEnsemble> {
    NullEnsemble::from_values(null_values(ms, triad, settings)?)
}

/// One ensemble pooled over the nulls of several triads.
pub fn pooled_null_ensemble(ms: &MultiSeries, triads: &[[usize; 3]], settings: &NullSettings) -> Result<NullEnsemble> {
    let mut values = Vec::with_capacity(triads.len() * settings.draws);
    for &t in triads {
        values.extend(null_values(ms, t, settings)?);
    }
    NullEnsemble::from_values(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Redundant,
    Synergistic,
    Nonsignificant,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Redundant => "redundant",
            Label::Synergistic => "synergistic",
            Label::Nonsignificant => "nonsignificant",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub empirical_o: f64,
    pub z: f64,
    pub label: Label,
}

/// z-score of `empirical` against the null; above +3 is redundant, below -3
/// synergistic.
pub fn classify_triad(empirical: f64, ensemble: &NullEnsemble) -> Result<SignificanceResult> {
    if !(ensemble.sd > 0.0 && ensemble.sd.is_finite()) {
        return Err(Error::degenerate(format!(
            "null ensemble has standard deviation {}",
            ensemble.sd
        )));
    }
    let z = (empirical - ensemble.mean) / ensemble.sd;
    let label = if z > SIGMA_THRESHOLD {
        Label::Redundant
    } else if z < -SIGMA_THRESHOLD {
        Label::Synergistic
    } else {
        Label::Nonsignificant
    };
    Ok(SignificanceResult {
        empirical_o: empirical,
        z,
        label,
    })
}

/// One line of streamed significance output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub triad: [usize; 3],
    pub o: f64,
    pub z: f64,
    pub label: Label,
    pub n_draws: usize,
    pub seed: u64,
}

impl SignificanceRow {
    pub fn new(triad: [usize; 3], result: &SignificanceResult, n_draws: usize, seed: u64) -> Self {
        Self {
            triad,
            o: result.empirical_o,
            z: result.z,
            label: result.label,
            n_draws,
            seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("row serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    /// Set when the p-value is below the smallest representable double and
    /// reported as 0.
    pub p_underflow: bool,
}

/// 1-based ranks with ties sharing the mean of their positions.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of mid-ranks, with a two-sided
/// p-value from Student's t with `n - 2` degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "inputs have different lengths: {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 pairs, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("inputs must be finite"));
    }
    let (rx, ry) = (mid_ranks(x), mid_ranks(y));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::degenerate("correlation is undefined for a constant input"));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        2.0 * StudentsT::new(0.0, 1.0, df).expect("df > 0").sf(t.abs())
    };
    let p_value = p_value.clamp(0.0, 1.0);
    Ok(CorrelationResult {
        rho,
        p_value,
        n,
        p_underflow: p_value == 0.0,
    })
}
