//! Staged command-line pipeline: `ingest` → `scene` → `basis` → `analyze` /
//! `reconstruct`, each stage reading the previous stage's files.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O, 4 malformed input, 5 empty
//! scene, 6 numerical failure, 7 basis/scene site mismatch.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compress::{self, CompressError};
use crate::geo::{self, GraphError, DEFAULT_THRESHOLD_MI};
use crate::ingest::{self, BoundingBox, ColumnMapping, IngestError, IngestReport, StationTable, TimeWindow};
use crate::persistence::{self, PersistError};
use crate::report::{self, ErrorSummary, ReportError, RunSummary, DEFAULT_DISPLAY_FRACTION};
use crate::scene::{self, SceneError, SiteIndex, WeatherQuantity};
use crate::spectral::{self, GraphSpectralBasis, SpectralError};

pub const EXIT_ARGUMENT: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_EMPTY_SCENE: i32 = 5;
pub const EXIT_NUMERICAL: i32 = 6;
pub const EXIT_FINGERPRINT: i32 = 7;

/// Default sparsity levels for reconstruction and the temperature error
/// thresholds (degrees) reported alongside it.
pub const DEFAULT_RECONSTRUCT_K: usize = 50;
pub const DEFAULT_ERROR_THRESHOLDS: [f64; 2] = [2.0, 5.0];
const DEFAULT_DOMINANT: usize = 6;
const DEFAULT_K_LIST: [usize; 10] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000];

#[derive(Debug, Parser)]
#[command(name = "wxspectral", version, about = "Graph-spectral compression of METAR weather scenes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse reports, attach locations, filter to the box and window; writes observations.csv.
    Ingest(RunConfig),
    /// Build one quantity's scene vector from observations; writes scene.csv.
    Scene(RunConfig),
    /// Build the proximity graph and its spectral basis; writes basis.gsb.
    Basis(RunConfig),
    /// Compressibility curve, dominant vectors and summary for a scene.
    Analyze(RunConfig),
    /// Reconstruct a scene from its K-sparse approximation and score it.
    Reconstruct(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    MetarText,
    AwcCsv,
}

/// Options shared by every subcommand; each uses the subset it needs.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Input file(s). Repeat for several report files.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "awc-csv")]
    pub format: InputFormat,
    /// Station table CSV (station_id,latitude,longitude); required for metar-text.
    #[arg(long)]
    pub stations: Option<PathBuf>,
    /// Bounding box SOUTH,NORTH,WEST,EAST in degrees (west/east negative for W).
    /// `ingest` defaults to 25.1,45.4,-124.8,-66.9.
    #[arg(long, value_parser = parse_bbox, allow_hyphen_values = true)]
    pub bbox: Option<BoundingBox>,
    /// Half-open UTC window START,END (RFC 3339).
    #[arg(long, value_parser = parse_window)]
    pub window: Option<TimeWindow>,
    #[arg(long, value_parser = parse_quantity)]
    pub quantity: Option<WeatherQuantity>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_MI, allow_hyphen_values = true)]
    pub threshold_mi: f64,
    /// Sparsity levels for the compressibility curve, e.g. 10,50,100.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    /// Sparsity for reconstruction (default 50, capped at the scene size).
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of dominant basis vectors to report (default 6).
    #[arg(long)]
    pub dominant: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DISPLAY_FRACTION)]
    pub display_fraction: f64,
    /// Absolute-error thresholds for continuous reconstructions.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    /// Basis file for analyze/reconstruct (default: OUT_DIR/basis.gsb).
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Also write the proximity graph as edges.csv (basis only).
    #[arg(long)]
    pub dump_edges: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_bbox(s: &str) -> Result<BoundingBox, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    let [south, north, west, east] = parts[..] else {
        return Err("expected SOUTH,NORTH,WEST,EAST".into());
    };
    BoundingBox::new(south, north, west, east).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<TimeWindow, String> {
    let (a, b) = s.split_once(',').ok_or("expected START,END")?;
    let t = |x: &str| {
        DateTime::parse_from_rfc3339(x.trim()).map(|t| t.with_timezone(&Utc)).map_err(|e| format!("`{x}`: {e}"))
    };
    TimeWindow::new(t(a)?, t(b)?).map_err(|e| e.to_string())
}

fn parse_quantity(s: &str) -> Result<WeatherQuantity, String> {
    s.parse()
}

/// A failed command: message for standard error and its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    fn argument(message: impl Into<String>) -> Self {
        CliError::new(EXIT_ARGUMENT, message)
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::Io(_) => EXIT_IO,
            IngestError::Argument(_) => EXIT_ARGUMENT,
            _ => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        let code = match e {
            SceneError::Empty(_) => EXIT_EMPTY_SCENE,
            SceneError::Io(_) => EXIT_IO,
            SceneError::Invalid(_) | SceneError::Format(_) => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::Threshold(_) => EXIT_ARGUMENT,
            GraphError::Io(_) => EXIT_IO,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        let code = match e {
            SpectralError::NoConvergence { .. } => EXIT_NUMERICAL,
            SpectralError::Dimension(_) => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<CompressError> for CliError {
    fn from(e: CompressError) -> Self {
        let code = match e {
            CompressError::Compatibility { .. } => EXIT_FINGERPRINT,
            CompressError::Argument(_) => EXIT_ARGUMENT,
            CompressError::ZeroEnergy | CompressError::DegenerateReconstruction => EXIT_NUMERICAL,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<PersistError> for CliError {
    fn from(e: PersistError) -> Self {
        let code = match e {
            PersistError::Io(_) => EXIT_IO,
            PersistError::FingerprintMismatch { .. } => EXIT_FINGERPRINT,
            _ => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        let code = match e {
            ReportError::Io(_) => EXIT_IO,
            ReportError::Argument(_) => EXIT_ARGUMENT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_IO, e.to_string())
    }
}

/// Parse arguments, run the subcommand and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Ingest(cfg) => cmd_ingest(cfg).map(|_| ()),
        Command::Scene(cfg) => cmd_scene(cfg).map(|_| ()),
        Command::Basis(cfg) => cmd_basis(cfg).map(|_| ()),
        Command::Analyze(cfg) => cmd_analyze(cfg).map(|_| ()),
        Command::Reconstruct(cfg) => cmd_reconstruct(cfg).map(|_| ()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.join(name))
}

fn single_input(cfg: &RunConfig) -> Result<&Path, CliError> {
    match cfg.inputs.as_slice() {
        [one] => Ok(one),
        _ => Err(CliError::argument("this command takes exactly one --input")),
    }
}

fn require_quantity(cfg: &RunConfig) -> Result<WeatherQuantity, CliError> {
    cfg.quantity.ok_or_else(|| {
        CliError::argument("--quantity is required (temperature, flight-category, visibility-reduction)")
    })
}

fn print_report(what: &str, report: &IngestReport) {
    eprintln!("{what}: accepted {}, skipped {}", report.accepted_count, report.skipped_count);
    for (record, reason) in &report.skip_reasons {
        eprintln!("  record {record}: {reason}");
    }
}

/// Parse, locate and filter reports; returns the observations file.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let bbox = cfg.bbox.unwrap_or_default();
    let mut observations = Vec::new();

    match cfg.format {
        InputFormat::AwcCsv => {
            let mapping = ColumnMapping::default();
            for input in &cfg.inputs {
                let (obs, report) = ingest::parse_awc_csv(open(input)?, &mapping)?;
                print_report(&input.display().to_string(), &report);
                observations.extend(obs);
            }
        }
        InputFormat::MetarText => {
            let stations = cfg
                .stations
                .as_ref()
                .ok_or_else(|| CliError::argument("--stations is required with --format metar-text"))?;
            let window = cfg.window.ok_or_else(|| {
                CliError::argument("--window is required with --format metar-text (it dates the DDHHMMZ groups)")
            })?;
            let table = StationTable::from_csv(open(stations)?)?;
            for input in &cfg.inputs {
                let text = fs::read(input).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", input.display())))?;
                let (partials, parsed) = ingest::parse_metar_lines(&String::from_utf8_lossy(&text));
                print_report(&input.display().to_string(), &parsed);
                let (obs, joined) = ingest::join_locations(&partials, &table, window.start());
                print_report("station lookup", &joined);
                observations.extend(obs);
            }
        }
    }

    let before = observations.len();
    let kept = ingest::filter_observations(&observations, &bbox, cfg.window.as_ref());
    eprintln!("filter: kept {} of {before} observations", kept.len());

    let path = out_path(cfg, "observations.csv")?;
    ingest::write_observations_csv(&kept, File::create(&path)?)?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

/// Build a scene file from an observations file.
pub fn cmd_scene(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let quantity = require_quantity(cfg)?;
    let (obs, report) = ingest::parse_awc_csv(open(single_input(cfg)?)?, &ColumnMapping::default())?;
    print_report("observations", &report);
    let obs = match (&cfg.bbox, &cfg.window) {
        (None, None) => obs,
        (bbox, window) => ingest::filter_observations(&obs, &bbox.unwrap_or_default(), window.as_ref()),
    };
    let (sites, scene) = scene::build_scene(&obs, quantity)?;
    let path = out_path(cfg, "scene.csv")?;
    scene::write_scene_csv(&sites, scene.values(), File::create(&path)?)?;
    eprintln!("{quantity} scene over {} sites, fingerprint {}", sites.len(), sites.fingerprint());
    eprintln!("wrote {}", path.display());
    Ok(path)
}

/// Graph, Laplacian and eigendecomposition for a scene's sites.
pub fn cmd_basis(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    if !(cfg.threshold_mi > 0.0) {
        return Err(GraphError::Threshold(cfg.threshold_mi).into());
    }
    let quantity = cfg.quantity.unwrap_or(WeatherQuantity::Temperature);
    let (sites, _) = scene::read_scene_csv(open(single_input(cfg)?)?, quantity)?;

    let started = Instant::now();
    let graph = geo::build_graph(&sites, cfg.threshold_mi)?;
    let lap = geo::laplacian(&graph);
    let (components, _) = geo::connected_components(&graph);
    let basis = spectral::eigendecompose(&lap, &sites, cfg.threshold_mi)?;
    let elapsed = started.elapsed();

    if cfg.dump_edges {
        let path = out_path(cfg, "edges.csv")?;
        geo::write_edge_csv(&graph, &sites.points(), std::io::BufWriter::new(File::create(&path)?))?;
    }
    let path = out_path(cfg, "basis.gsb")?;
    let bytes = persistence::save_basis(&basis, &sites, &path)?;

    let show = |x: f64| format!("{:.9}", x + 0.0);
    let ev = basis.eigenvalues();
    println!("sites: {}", sites.len());
    println!("edges: {}", graph.edges().len());
    println!("components: {components}");
    println!("lambda_2: {}", ev.get(1).map_or("n/a".to_string(), |l| show(*l)));
    println!("smallest eigenvalues: {}", ev.iter().take(10).map(|l| show(*l)).collect::<Vec<_>>().join(" "));
    println!("fingerprint: {}", sites.fingerprint());
    eprintln!("eigendecomposition took {:.2?}; wrote {} ({bytes} bytes)", elapsed, path.display());
    Ok(path)
}

fn load_pair(
    cfg: &RunConfig,
    quantity: WeatherQuantity,
) -> Result<(SiteIndex, scene::SceneVector, GraphSpectralBasis), CliError> {
    let (sites, scene) = scene::read_scene_csv(open(single_input(cfg)?)?, quantity)?;
    let basis_path = cfg.basis.clone().unwrap_or_else(|| cfg.out_dir.join("basis.gsb"));
    let (basis, _) = persistence::load_basis(&basis_path)
        .map_err(|e| CliError { message: format!("{}: {e}", basis_path.display()), ..CliError::from(e) })?;
    if basis.site_fingerprint() != scene.site_fingerprint() {
        return Err(CliError::new(
            EXIT_FINGERPRINT,
            format!(
                "basis {} was built for sites {}, but the scene is over sites {}",
                basis_path.display(),
                basis.site_fingerprint(),
                scene.site_fingerprint()
            ),
        ));
    }
    Ok((sites, scene, basis))
}

fn checked_count(explicit: Option<usize>, default: usize, n: usize, flag: &str) -> Result<usize, CliError> {
    match explicit {
        Some(k) if k > n => Err(CliError::argument(format!("{flag} {k} exceeds the scene size {n}"))),
        Some(k) => Ok(k),
        None => Ok(default.min(n)),
    }
}

/// Output paths written by [`cmd_analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzeOutputs {
    pub curve: PathBuf,
    pub summary: PathBuf,
    pub scene: PathBuf,
    pub dominant: Option<PathBuf>,
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<AnalyzeOutputs, CliError> {
    let quantity = require_quantity(cfg)?;
    let (sites, scene, basis) = load_pair(cfg, quantity)?;
    let n = basis.n();

    let ks: Vec<usize> = match &cfg.k_list {
        Some(list) => {
            if let Some(k) = list.iter().find(|k| **k > n) {
                return Err(CliError::argument(format!("--k-list entry {k} exceeds the scene size {n}")));
            }
            let mut list = list.clone();
            list.sort_unstable();
            list.dedup();
            list
        }
        None => DEFAULT_K_LIST.iter().copied().filter(|k| *k < n).chain([n]).collect(),
    };
    let dominant_count = checked_count(cfg.dominant, DEFAULT_DOMINANT, n, "--dominant")?;

    let coeffs = compress::analyze(&basis, &scene)?;
    let curve = compress::compressibility_curve(&coeffs, &ks)?;
    let dominant = compress::dominant_vectors(&coeffs, dominant_count)?;

    let curve_path = out_path(cfg, "curve.csv")?;
    report::export_curve_csv(&curve, &curve_path)?;
    let scene_path = out_path(cfg, "scene.geojson")?;
    report::export_scene_geojson(&sites, scene.values(), &scene_path)?;
    let dominant_path = if dominant.is_empty() {
        None
    } else {
        let p = out_path(cfg, "dominant.geojson")?;
        report::export_dominant_geojson(&basis, &sites, &dominant, cfg.display_fraction, &p)?;
        Some(p)
    };
    let summary = RunSummary::new(quantity, &basis, &curve, &coeffs, &dominant, None);
    let summary_path = out_path(cfg, "summary.json")?;
    report::export_summary_json(&summary, &summary_path)?;

    for (k, level) in curve.points() {
        eprintln!("L({k}) = {level:.4}");
    }
    eprintln!("dominant basis vectors: {dominant:?}");
    Ok(AnalyzeOutputs { curve: curve_path, summary: summary_path, scene: scene_path, dominant: dominant_path })
}

/// Output paths written by [`cmd_reconstruct`].
#[derive(Debug, Clone)]
pub struct ReconstructOutputs {
    pub reconstruction: PathBuf,
    pub error_stats: PathBuf,
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<ReconstructOutputs, CliError> {
    let quantity = require_quantity(cfg)?;
    let (sites, scene, basis) = load_pair(cfg, quantity)?;
    let k = checked_count(cfg.k, DEFAULT_RECONSTRUCT_K, basis.n(), "--k")?;

    let coeffs = compress::analyze(&basis, &scene)?;
    let sparse = compress::top_k(&coeffs, k)?;
    let x = scene.values();

    let (estimate, summary) = if quantity == WeatherQuantity::FlightCategory {
        let est = compress::reconstruct_categorical(&basis, &sparse, scene.norm())?;
        let stats = compress::classification_stats(x, &est)?;
        eprintln!(
            "k = {k}: accuracy {:.4}, non-VFR recall {}",
            stats.accuracy,
            stats.recall.map_or("n/a".into(), |r| format!("{r:.4}"))
        );
        (est, ErrorSummary::categorical(k, &stats))
    } else {
        let est = compress::synthesize(&basis, &sparse)?;
        let thresholds = cfg.thresholds.clone().unwrap_or_else(|| DEFAULT_ERROR_THRESHOLDS.to_vec());
        let stats = compress::reconstruction_error_stats(x, &est, &thresholds)?;
        for (t, f) in &stats.fractions {
            eprintln!("k = {k}: {:.1}% of sites within {t}", 100.0 * f);
        }
        eprintln!("k = {k}: max abs error {:.4}", stats.max_abs_error);
        (est, ErrorSummary::continuous(k, &stats))
    };

    let recon_path = out_path(cfg, "reconstruction.csv")?;
    write_reconstruction_csv(&sites, x, &estimate, &recon_path)?;
    let stats_path = out_path(cfg, "error_stats.json")?;
    report::write_json(&summary, std::io::BufWriter::new(File::create(&stats_path)?))?;
    Ok(ReconstructOutputs { reconstruction: recon_path, error_stats: stats_path })
}

fn write_reconstruction_csv(
    sites: &SiteIndex,
    original: &[f64],
    estimate: &[f64],
    path: &Path,
) -> Result<(), CliError> {
    use crate::fmt::g17;
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
    let io = |e: csv::Error| CliError::new(EXIT_IO, e.to_string());
    w.write_record(["station_id", "latitude", "longitude", "original", "reconstructed", "abs_error"]).map_err(io)?;
    for ((s, a), b) in sites.sites().iter().zip(original).zip(estimate) {
        w.write_record([s.station_id.clone(), g17(s.latitude), g17(s.longitude), g17(*a), g17(*b), g17((a - b).abs())])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_flag() {
        let b = parse_bbox("25.1,45.4,-124.8,-66.9").unwrap();
        assert_eq!(b, BoundingBox::CONTIGUOUS_US);
        assert!(parse_bbox("45,25,-120,-70").is_err());
        assert!(parse_bbox("1,2,3").is_err());
    }

    #[test]
    fn window_flag() {
        let w = parse_window("2021-01-18T17:00:00Z,2021-01-18T18:00:00Z").unwrap();
        assert_eq!((w.end() - w.start()).num_minutes(), 60);
        assert!(parse_window("2021-01-18T18:00:00Z,2021-01-18T17:00:00Z").is_err());
    }

    #[test]
    fn count_defaults_cap_but_explicit_values_do_not() {
        assert_eq!(checked_count(None, 50, 12, "--k").unwrap(), 12);
        assert_eq!(checked_count(Some(3), 50, 12, "--k").unwrap(), 3);
        assert_eq!(checked_count(Some(13), 50, 12, "--k").unwrap_err().code, EXIT_ARGUMENT);
    }
}
