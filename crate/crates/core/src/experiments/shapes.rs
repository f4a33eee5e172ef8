use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ShapeSpec;
use crate::error::{Error, Result};
use crate::homology::{cloud_persistence, persistence_summary, FiltrationSpec};
use crate::info::{knn_oinformation_with, KnnSettings};
use crate::manifolds::{pca_rotate, rotate_euler, RotationSpec};
use crate::neighbors::Metric;

/// Config schema version understood by [`ShapeTableConfig::from_toml`].
pub const SHAPE_CONFIG_VERSION: u32 = 1;

/// The shipped shape-table config.
pub const DEFAULT_SHAPE_CONFIG: &str = include_str!("../../config/shape_table.toml");

/// Acceptance band for one value; every present bound must hold.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub target: Option<f64>,
    pub tol: Option<f64>,
    /// Strict lower bound.
    pub min: Option<f64>,
    /// Strict upper bound.
    pub max: Option<f64>,
}

impl Expectation {
    fn checks(&self, label: &str, value: f64) -> Vec<Check> {
        let mut out = Vec::new();
        if let (Some(t), Some(tol)) = (self.target, self.tol) {
            out.push(Check::new(format!("{label} = {t} +/- {tol}"), value, (value - t).abs() <= tol));
        }
        if let Some(m) = self.min {
            out.push(Check::new(format!("{label} > {m}"), value, value > m));
        }
        if let Some(m) = self.max {
            out.push(Check::new(format!("{label} < {m}"), value, value < m));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeRowConfig {
    pub name: String,
    pub shape: ShapeSpec,
    /// Euler angles in degrees, see [`RotationSpec`].
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    #[serde(default)]
    pub o_raw: Expectation,
    #[serde(default)]
    pub o_pca: Expectation,
    /// Largest allowed `|o_raw - o_pca|`.
    pub pca_shift_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeTableConfig {
    pub version: u32,
    pub n_points: usize,
    pub k: usize,
    pub jitter: f64,
    pub seed: u64,
    pub metric: Metric,
    pub subsample_cap: usize,
    /// Compute the dimension-2 persistence columns.
    pub persistence: bool,
    #[serde(default)]
    pub ordering: Vec<Vec<String>>,
    pub rows: Vec<ShapeRowConfig>,
}

fn line_of(src: &str, offset: usize) -> u64 {
    src[..offset.min(src.len())].matches('\n').count() as u64 + 1
}

impl ShapeTableConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let config: Self = toml::from_str(src).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(src, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SHAPE_CONFIG_VERSION {
            return Err(Error::invalid(format!(
                "shape config version {} is not supported (expected {SHAPE_CONFIG_VERSION})",
                self.version
            )));
        }
        if self.n_points == 0 || self.k == 0 || self.subsample_cap == 0 {
            return Err(Error::invalid("n_points, k and subsample_cap must be at least 1"));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::invalid(format!("jitter must be finite and non-negative, got {}", self.jitter)));
        }
        for chain in &self.ordering {
            for item in chain {
                if item.parse::<f64>().is_err() && !self.rows.iter().any(|r| &r.name == item) {
                    return Err(Error::invalid(format!("ordering refers to unknown row {item:?}")));
                }
            }
        }
        Ok(())
    }
}

impl Default for ShapeTableConfig {
    fn default() -> Self {
        Self::from_toml(DEFAULT_SHAPE_CONFIG).expect("shipped shape config is valid")
    }
}

/// One pass/fail comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: String,
    pub value: f64,
    pub pass: bool,
}

impl Check {
    fn new(criterion: String, value: f64, pass: bool) -> Self {
        Self { criterion, value, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeRow {
    pub name: String,
    pub o_raw: f64,
    pub o_pca: f64,
    pub h2_count: Option<usize>,
    pub h2_avg_persistence: Option<f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeTable {
    pub config_version: u32,
    pub n_points: usize,
    pub k: usize,
    pub seed: u64,
    pub rows: Vec<ShapeRow>,
    pub ordering: Vec<Check>,
}

impl ShapeTable {
    pub fn row(&self, name: &str) -> Option<&ShapeRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().flat_map(|r| &r.checks).chain(&self.ordering).all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        let mut s = format!(
            "{:<14} {:>9} {:>9} {:>9} {:>12}\n",
            "shape", "o_raw", "o_pca", "h2_count", "h2_avg_pers"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<14} {:>9.3} {:>9.3} {:>9} {:>12}",
                r.name,
                r.o_raw,
                r.o_pca,
                opt(r.h2_count.map(|c| c.to_string())),
                opt(r.h2_avg_persistence.map(|p| format!("{p:.4}"))),
            );
        }
        s.push('\n');
        for r in &self.rows {
            for c in &r.checks {
                let _ = writeln!(s, "{} {}: {} (got {:.3})", verdict(c.pass), r.name, c.criterion, c.value);
            }
        }
        for c in &self.ordering {
            let _ = writeln!(s, "{} ordering: {}", verdict(c.pass), c.criterion);
        }
        s
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_row(row: &ShapeRowConfig, config: &ShapeTableConfig) -> Result<ShapeRow> {
    let [ax, ay, az] = row.rotation_deg.map(f64::to_radians);
    let cloud = rotate_euler(&row.shape.sample(config.n_points, config.seed)?, RotationSpec::new(ax, ay, az))?;
    let knn = KnnSettings {
        k: config.k,
        jitter: config.jitter,
        jitter_seed: config.seed,
        ..KnnSettings::default()
    };
    let o_raw = knn_oinformation_with(&cloud, &knn)?;
    let o_pca = knn_oinformation_with(&pca_rotate(&cloud)?.rotated, &knn)?;
    let (h2_count, h2_avg_persistence) = if config.persistence {
        let spec = FiltrationSpec {
            subsample_cap: config.subsample_cap,
            ..FiltrationSpec::default()
        };
        let s = persistence_summary(&cloud_persistence(&cloud, config.metric, &spec, config.seed)?, 2)?;
        (Some(s.count), Some(s.avg_persistence))
    } else {
        (None, None)
    };
    let mut checks = row.o_raw.checks("o_raw", o_raw);
    checks.extend(row.o_pca.checks("o_pca", o_pca));
    if let Some(m) = row.pca_shift_max {
        let shift = (o_raw - o_pca).abs();
        checks.push(Check::new(format!("|o_raw - o_pca| < {m}"), shift, shift < m));
    }
    Ok(ShapeRow {
        name: row.name.clone(),
        o_raw,
        o_pca,
        h2_count,
        h2_avg_persistence,
        checks,
    })
}

fn ordering_checks(chains: &[Vec<String>], rows: &[ShapeRow]) -> Vec<Check> {
    let value = |item: &str| {
        rows.iter()
            .find(|r| r.name == item)
            .map(|r| r.o_raw)
            .or_else(|| item.parse().ok())
            .expect("ordering items are validated")
    };
    let label = |item: &str| {
        if rows.iter().any(|r| r.name == item) {
            format!("O({item})")
        } else {
            item.to_string()
        }
    };
    let mut out = Vec::new();
    for chain in chains {
        for w in chain.windows(2) {
            let (a, b) = (value(&w[0]), value(&w[1]));
            out.push(Check::new(format!("{} < {}", label(&w[0]), label(&w[1])), b - a, a < b));
        }
    }
    out
}

/// O-information of every configured shape before and after PCA, with
/// optional dimension-2 persistence, compared against the configured bands.
pub fn shape_table(config: &ShapeTableConfig) -> Result<ShapeTable> {
    config.validate()?;
    let rows = config
        .rows
        .par_iter()
        .map(|r| run_row(r, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeTable {
        config_version: config.version,
        n_points: config.n_points,
        k: config.k,
        seed: config.seed,
        ordering: ordering_checks(&config.ordering, &rows),
        rows,
    })
}
