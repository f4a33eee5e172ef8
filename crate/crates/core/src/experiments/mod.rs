//! End-to-end pipelines: the synthetic shape table, the triad correlation
//! analysis, and the synthetic triad battery that feeds it.

mod correlate;
mod shapes;

pub use correlate::*;
pub use shapes::*;

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::manifolds::{self, RotationSpec, SurfaceMeasure};
use crate::rng::{self, streams};
use crate::stats::MultiSeries;

/// A named generator of 3-D clouds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    Line,
    Plane,
    Sphere {
        radius: f64,
    },
    Ball {
        radius: f64,
    },
    Torus {
        major_radius: f64,
        minor_radius: f64,
        hollow: bool,
        #[serde(default)]
        measure: SurfaceMeasure,
    },
    TorusKnot {
        p: u32,
        q: u32,
    },
    /// Independent standard normal coordinates.
    Gaussian,
}

impl ShapeSpec {
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        match *self {
            ShapeSpec::Line => manifolds::sample_line(n, seed),
            ShapeSpec::Plane => manifolds::sample_plane(n, seed),
            ShapeSpec::Sphere { radius } => manifolds::sample_sphere(n, radius, seed),
            ShapeSpec::Ball { radius } => manifolds::sample_ball(n, radius, seed),
            ShapeSpec::Torus {
                major_radius,
                minor_radius,
                hollow,
                measure,
            } => manifolds::sample_torus_with(n, major_radius, minor_radius, hollow, measure, seed),
            ShapeSpec::TorusKnot { p, q } => manifolds::sample_torus_knot(n, p, q, seed),
            ShapeSpec::Gaussian => {
                if n == 0 {
                    return Err(Error::invalid("need at least one point"));
                }
                let mut rng = rng::stream(seed, streams::GAUSSIAN);
                let data = (0..3 * n).map(|_| rng.sample(StandardNormal)).collect();
                PointCloud::new(data, n, 3)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            ShapeSpec::Line => "line".into(),
            ShapeSpec::Plane => "plane".into(),
            ShapeSpec::Sphere { .. } => "sphere".into(),
            ShapeSpec::Ball { .. } => "ball".into(),
            ShapeSpec::Torus { hollow: true, .. } => "hollow-torus".into(),
            ShapeSpec::Torus { hollow: false, .. } => "solid-torus".into(),
            ShapeSpec::TorusKnot { p, q } => format!("torus-knot-{p}-{q}"),
            ShapeSpec::Gaussian => "gaussian".into(),
        }
    }
}

/// Settings of the synthetic triad battery: every shape at every noise level,
/// `replicates` times, each copy randomly rotated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub n_points: usize,
    pub replicates: usize,
    /// Noise standard deviation relative to the cloud's RMS coordinate spread.
    pub noise_levels: Vec<f64>,
    pub shapes: Vec<ShapeSpec>,
    pub seed: u64,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            n_points: 1000,
            replicates: 5,
            noise_levels: vec![0.0, 0.05, 0.1, 0.2, 0.4],
            shapes: vec![
                ShapeSpec::Sphere { radius: 1.0 },
                ShapeSpec::Ball { radius: 1.0 },
                ShapeSpec::Torus {
                    major_radius: 1.0,
                    minor_radius: 0.5,
                    hollow: true,
                    measure: SurfaceMeasure::AngleUniform,
                },
                ShapeSpec::Torus {
                    major_radius: 1.0,
                    minor_radius: 0.5,
                    hollow: false,
                    measure: SurfaceMeasure::AreaUniform,
                },
                ShapeSpec::Line,
                ShapeSpec::Plane,
                ShapeSpec::TorusKnot { p: 2, q: 3 },
                ShapeSpec::TorusKnot { p: 3, q: 5 },
                ShapeSpec::Gaussian,
            ],
            seed: 0,
        }
    }
}

/// One triad of the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryBlock {
    pub shape: String,
    pub noise: f64,
    pub replicate: usize,
    pub channels: [usize; 3],
}

/// The battery as a multichannel series: block `b` occupies channels
/// `3b..3b+3`, and the triads to analyse are exactly these blocks.
#[derive(Debug, Clone)]
pub struct Battery {
    pub series: MultiSeries,
    pub blocks: Vec<BatteryBlock>,
}

impl Battery {
    pub fn triads(&self) -> Vec<[usize; 3]> {
        self.blocks.iter().map(|b| b.channels).collect()
    }
}

pub fn synthetic_battery(config: &BatteryConfig) -> Result<Battery> {
    if config.n_points < 2 || config.replicates == 0 || config.shapes.is_empty() || config.noise_levels.is_empty() {
        return Err(Error::invalid(
            "battery needs at least two points, one replicate, one shape and one noise level",
        ));
    }
    if let Some(s) = config.noise_levels.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(Error::invalid(format!("noise level must be finite and non-negative, got {s}")));
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut blocks = Vec::new();
    for shape in &config.shapes {
        for &noise in &config.noise_levels {
            for replicate in 0..config.replicates {
                let b = blocks.len() as u64;
                let mut rng = rng::substream(config.seed, streams::BATTERY, b);
                let rotation = RotationSpec::new(rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU);
                let cloud = manifolds::rotate_euler(&shape.sample(config.n_points, rng.gen())?, rotation)?;
                let spread = (cloud.column_variances().iter().sum::<f64>() / 3.0).sqrt();
                let cloud = cloud.map_rows(3, |src, dst| {
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = s + noise * spread * rng.sample::<f64, _>(StandardNormal);
                    }
                })?;
                let first = columns.len();
                columns.extend((0..3).map(|j| cloud.column(j)));
                blocks.push(BatteryBlock {
                    shape: shape.name(),
                    noise,
                    replicate,
                    channels: [first, first + 1, first + 2],
                });
            }
        }
    }
    Ok(Battery {
        series: MultiSeries::single(PointCloud::from_columns(&columns)?),
        blocks,
    })
}
