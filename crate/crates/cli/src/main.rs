//! `hoi`: shape generation, information estimates, persistence, null tests
//! and the experiment pipelines from the command line.
//!
//! Exit codes: 0 success, 1 I/O, 2 invalid arguments, 3 unparseable input,
//! 4 numerically degenerate input.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hoi::experiments::{
    correlate, enumerate_triads, shape_table, synthetic_battery, BatteryConfig, CorrelateConfig, ShapeTableConfig,
};
use hoi::homology::{cloud_persistence, persistence_summary, FiltrationSpec};
use hoi::info::{info_summary_with, knn_oinformation_with, KnnSettings};
use hoi::manifolds::{self, pca_rotate, rotate_euler, RotationSpec, SurfaceMeasure};
use hoi::neighbors::Metric;
use hoi::stats::{classify_triad, null_ensemble, MultiSeries, NullSettings, ShiftScheme, SignificanceRow};
use hoi::{Error, PointCloud, Result};

#[derive(Parser)]
#[command(name = "hoi", version, about = "Higher-order information and persistent homology of point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic shape and write it as CSV.
    Generate(GenerateArgs),
    /// TC, DTC, O- and S-information of a CSV cloud.
    Oinfo(OinfoArgs),
    /// Rips persistence diagram and per-dimension summaries of a CSV cloud.
    Persist(PersistArgs),
    /// Circular-shift significance test for one triad of channels.
    Nulltest(NulltestArgs),
    /// Reproduction pipelines over synthetic or user data.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand)]
enum Experiment {
    /// O-information before and after PCA for the eight reference shapes.
    Shapes(ShapesArgs),
    /// Information, topology and significance over many triads.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct Seed {
    #[arg(long, env = "HOI_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Knn {
    /// Neighbour rank used by the estimators.
    #[arg(long, env = "HOI_K", default_value_t = hoi::neighbors::DEFAULT_K)]
    k: usize,
    /// Half-width of the tie-breaking noise; 0 disables it.
    #[arg(long, env = "HOI_JITTER", default_value_t = hoi::neighbors::DEFAULT_JITTER)]
    jitter: f64,
}

#[derive(Args)]
struct Topology {
    #[arg(long, env = "HOI_METRIC", default_value = "chebyshev")]
    metric: Metric,
    /// Largest number of points passed to the Rips computation.
    #[arg(long, env = "HOI_SUBSAMPLE_CAP", default_value_t = hoi::homology::DEFAULT_SUBSAMPLE_CAP)]
    subsample_cap: usize,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long, env = "HOI_OUT")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Line,
    Plane,
    Sphere,
    Ball,
    Torus,
    TorusKnot,
}

#[derive(Args)]
struct GenerateArgs {
    shape: Shape,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    major_radius: f64,
    #[arg(long, default_value_t = 0.5)]
    minor_radius: f64,
    /// Fill the torus instead of sampling its surface.
    #[arg(long)]
    solid: bool,
    /// Sample both torus angles uniformly instead of uniformly in area.
    #[arg(long)]
    angle_uniform: bool,
    /// Torus-knot winding numbers.
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Euler angles in degrees applied after sampling.
    #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"], allow_negative_numbers = true)]
    rotate: Option<Vec<f64>>,
    /// Write a header line.
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OinfoArgs {
    input: PathBuf,
    /// Rotate onto principal axes first.
    #[arg(long)]
    pca: bool,
    #[command(flatten)]
    knn: Knn,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct PersistArgs {
    input: PathBuf,
    #[arg(long, default_value_t = hoi::homology::DEFAULT_MAX_DIM)]
    max_dim: usize,
    /// Largest simplex diameter; defaults to the enclosing radius.
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    topology: Topology,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Auto,
    CrossSegment,
    MinOffset,
}

#[derive(Args)]
struct Nulls {
    /// Null draws per triad.
    #[arg(long, env = "HOI_DRAWS", default_value_t = hoi::stats::DEFAULT_DRAWS)]
    draws: usize,
    /// Start rows of every segment after the first.
    #[arg(long, value_delimiter = ',')]
    segments: Vec<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    scheme: Scheme,
    /// Minimum shift as a fraction of the length, for `min-offset`.
    #[arg(long, default_value_t = hoi::stats::DEFAULT_MIN_OFFSET_FRACTION)]
    min_offset: f64,
}

impl Nulls {
    fn scheme(&self) -> ShiftScheme {
        match self.scheme {
            Scheme::Auto => ShiftScheme::Auto,
            Scheme::CrossSegment => ShiftScheme::CrossSegment,
            Scheme::MinOffset => ShiftScheme::MinOffset(self.min_offset),
        }
    }
}

#[derive(Args)]
struct NulltestArgs {
    input: PathBuf,
    /// Three distinct zero-based column indices.
    #[arg(long, num_args = 3, required = true)]
    triad: Vec<usize>,
    #[command(flatten)]
    nulls: Nulls,
    #[command(flatten)]
    knn: Knn,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ShapesArgs {
    /// Shape-table config; defaults to the shipped one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Skip the dimension-2 persistence columns.
    #[arg(long)]
    no_persistence: bool,
    /// Print JSON instead of the text table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Multichannel CSV (rows are time points); omit with --battery.
    #[arg(required_unless_present = "battery", conflicts_with = "battery")]
    input: Option<PathBuf>,
    /// Analyse the built-in synthetic triad battery instead of a file.
    #[arg(long)]
    battery: bool,
    /// Analyse at most this many triads.
    #[arg(long, env = "HOI_TRIAD_CAP")]
    triad_cap: Option<usize>,
    /// With a cap, sample triads at random instead of taking a prefix.
    #[arg(long, conflicts_with = "battery")]
    sample_triads: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "HOI_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Rips subsample size per triad.
    #[arg(long, env = "HOI_SUBSAMPLE_CAP", default_value_t = 128)]
    subsample_cap: usize,
    #[arg(long, env = "HOI_METRIC", default_value = "chebyshev")]
    metric: Metric,
    #[command(flatten)]
    nulls: Nulls,
    #[command(flatten)]
    knn: Knn,
    #[command(flatten)]
    seed: Seed,
    #[command(flatten)]
    output: Output,
}

fn knn_settings(knn: &Knn, seed: u64) -> KnnSettings {
    KnnSettings {
        k: knn.k,
        jitter: knn.jitter,
        jitter_seed: seed,
        ..KnnSettings::default()
    }
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    s.push('\n');
    s
}

fn load(path: &Path) -> Result<PointCloud> {
    PointCloud::load_csv(path)
}

fn generate(a: &GenerateArgs) -> Result<()> {
    if !matches!(a.shape, Shape::TorusKnot) && (a.p.is_some() || a.q.is_some()) {
        return Err(Error::InvalidArgument("--p and --q only apply to torus-knot".into()));
    }
    let seed = a.seed.seed;
    let cloud = match a.shape {
        Shape::Line => manifolds::sample_line(a.n, seed)?,
        Shape::Plane => manifolds::sample_plane(a.n, seed)?,
        Shape::Sphere => manifolds::sample_sphere(a.n, a.radius, seed)?,
        Shape::Ball => manifolds::sample_ball(a.n, a.radius, seed)?,
        Shape::Torus => {
            let measure = if a.angle_uniform {
                SurfaceMeasure::AngleUniform
            } else {
                SurfaceMeasure::AreaUniform
            };
            manifolds::sample_torus_with(a.n, a.major_radius, a.minor_radius, !a.solid, measure, seed)?
        }
        Shape::TorusKnot => manifolds::sample_torus_knot(a.n, a.p.unwrap_or(2), a.q.unwrap_or(3), seed)?,
    };
    let cloud = match &a.rotate {
        Some(deg) => rotate_euler(
            &cloud,
            RotationSpec::new(deg[0].to_radians(), deg[1].to_radians(), deg[2].to_radians()),
        )?,
        None => cloud,
    };
    emit(&a.output, &cloud.to_csv_string(a.header))
}

fn oinfo(a: &OinfoArgs) -> Result<()> {
    let cloud = load(&a.input)?;
    if cloud.d() < 3 {
        return Err(Error::InvalidArgument(format!(
            "O-information needs at least 3 columns, input has {}",
            cloud.d()
        )));
    }
    let settings = knn_settings(&a.knn, a.seed.seed);
    let mut value = if a.pca {
        let pca = pca_rotate(&cloud)?;
        let mut v = serde_json::to_value(info_summary_with(&pca.rotated, &settings)?)?;
        v["explained_variance_ratio"] = json!(pca.explained_variance_ratio);
        v
    } else {
        serde_json::to_value(info_summary_with(&cloud, &settings)?)?
    };
    value["pca"] = json!(a.pca);
    emit(&a.output, &with_newline(serde_json::to_string(&value)?))
}

fn persist(a: &PersistArgs) -> Result<()> {
    let cloud = load(&a.input)?;
    let spec = FiltrationSpec {
        max_homology_dim: a.max_dim,
        threshold: a.threshold,
        subsample_cap: a.topology.subsample_cap,
    };
    let diagram = cloud_persistence(&cloud, a.topology.metric, &spec, a.seed.seed)?;
    let summaries = (0..=a.max_dim)
        .map(|d| persistence_summary(&diagram, d))
        .collect::<Result<Vec<_>>>()?;
    let diagram_json: Value = serde_json::from_str(&diagram.to_json())?;
    let out = json!({ "diagram": diagram_json, "summaries": summaries });
    emit(&a.output, &with_newline(serde_json::to_string(&out)?))
}

fn series(cloud: PointCloud, segments: &[usize]) -> Result<MultiSeries> {
    MultiSeries::new(cloud, segments.to_vec())
}

fn nulltest(a: &NulltestArgs) -> Result<()> {
    let cloud = load(&a.input)?;
    let triad = [a.triad[0], a.triad[1], a.triad[2]];
    let ms = series(cloud, &a.nulls.segments)?;
    let settings = NullSettings {
        draws: a.nulls.draws,
        scheme: a.nulls.scheme(),
        knn: knn_settings(&a.knn, a.seed.seed),
        seed: a.seed.seed,
    };
    let ensemble = null_ensemble(&ms, triad, &settings)?;
    let empirical = knn_oinformation_with(&ms.triad_cloud(triad)?, &settings.knn)?;
    let result = classify_triad(empirical, &ensemble)?;
    let row = SignificanceRow::new(triad, &result, settings.draws, settings.seed);
    emit(&a.output, &with_newline(row.to_json()))
}

fn shapes(a: &ShapesArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => ShapeTableConfig::load(path)?,
        None => ShapeTableConfig::default(),
    };
    if a.no_persistence {
        config.persistence = false;
    }
    let table = shape_table(&config)?;
    let text = if a.json {
        with_newline(table.to_json())
    } else {
        table.to_text()
    };
    emit(&a.output, &text)
}

fn correlate_cmd(a: &CorrelateArgs) -> Result<()> {
    let config = CorrelateConfig {
        k: a.knn.k,
        jitter: a.knn.jitter,
        seed: a.seed.seed,
        metric: a.metric,
        subsample_cap: a.subsample_cap,
        draws: a.nulls.draws,
        scheme: a.nulls.scheme(),
        workers: a.workers,
    };
    let (ms, triads) = match &a.input {
        Some(path) => {
            let ms = series(load(path)?, &a.nulls.segments)?;
            let triads = enumerate_triads(ms.channels(), a.triad_cap, a.sample_triads.then_some(a.seed.seed))?;
            (ms, triads)
        }
        None => {
            if a.triad_cap == Some(0) {
                return Err(Error::InvalidArgument("triad cap must be at least 1".into()));
            }
            let battery = synthetic_battery(&BatteryConfig {
                seed: a.seed.seed,
                ..BatteryConfig::default()
            })?;
            let mut triads = battery.triads();
            triads.truncate(a.triad_cap.unwrap_or(usize::MAX));
            (battery.series, triads)
        }
    };
    let report = correlate(&ms, &triads, &config)?;
    emit(&a.output, &with_newline(report.to_json()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Oinfo(a) => oinfo(&a),
        Command::Persist(a) => persist(&a),
        Command::Nulltest(a) => nulltest(&a),
        Command::Experiment(Experiment::Shapes(a)) => shapes(&a),
        Command::Experiment(Experiment::Correlate(a)) => correlate_cmd(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
