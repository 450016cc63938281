//! End-to-end run on a real AWC METAR snapshot, printing compressibility
//! levels next to the published reference points.
//!
//!     cargo run --release --example reproduce_snapshot -- METARS.csv [START,END]
//!
//! The window defaults to every row in the file; pass the hour explicitly
//! for multi-hour downloads.

use std::fs::File;
use std::time::Instant;

use chrono::{DateTime, Utc};
use wxspectral::compress::compressibility_curve;
use wxspectral::geo::{build_graph, connected_components, laplacian};
use wxspectral::{
    analyze, build_scene, eigendecompose, filter_observations, parse_awc_csv, BoundingBox, ColumnMapping,
    GraphSpectralBasis, TimeWindow, WeatherQuantity, DEFAULT_THRESHOLD_MI,
};

const REFERENCE: [(WeatherQuantity, &str); 3] = [
    (WeatherQuantity::Temperature, "~0.90 at K=10"),
    (WeatherQuantity::FlightCategory, "~0.60 at K=50, ~0.75 at K=100"),
    (WeatherQuantity::VisibilityReduction, "0.75-0.95 at 0.5-4% of N"),
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: reproduce_snapshot METARS.csv [START,END]");
        std::process::exit(2);
    };
    let window = match args.next() {
        Some(w) => {
            let (a, b) = w.split_once(',').ok_or("window must be START,END")?;
            Some(TimeWindow::new(a.parse::<DateTime<Utc>>()?, b.parse::<DateTime<Utc>>()?)?)
        }
        None => None,
    };

    let (all, report) = parse_awc_csv(File::open(&path)?, &ColumnMapping::default())?;
    let observations = filter_observations(&all, &BoundingBox::CONTIGUOUS_US, window.as_ref());
    println!(
        "{path}: {} rows parsed, {} skipped, {} inside the box/window",
        report.accepted_count,
        report.skipped_count,
        observations.len()
    );

    println!("{:<22} {:>5} {:>9} {:>7} {:>7} {:>7}  reference", "quantity", "N", "basis", "L(10)", "L(50)", "L(100)");
    // Quantities over the same stations share one basis.
    let mut cached: Option<(GraphSpectralBasis, usize)> = None;
    for (quantity, reference) in REFERENCE {
        let (sites, scene) = build_scene(&observations, quantity)?;
        let started = Instant::now();
        if cached.as_ref().is_none_or(|(b, _)| b.site_fingerprint() != sites.fingerprint()) {
            let graph = build_graph(&sites, DEFAULT_THRESHOLD_MI)?;
            let basis = eigendecompose(&laplacian(&graph), &sites, DEFAULT_THRESHOLD_MI)?;
            cached = Some((basis, connected_components(&graph).0));
        }
        let (basis, components) = cached.as_ref().expect("basis built above");
        let took = started.elapsed();

        let n = basis.n();
        let ks: Vec<usize> = [10, 50, 100].into_iter().filter(|&k| k <= n).collect();
        let curve = compressibility_curve(&analyze(basis, &scene)?, &ks)?;
        let level = |k| curve.level_at(k).map_or("-".into(), |l| format!("{l:.3}"));
        println!(
            "{:<22} {n:>5} {:>8.1}s {:>7} {:>7} {:>7}  {reference}  ({} components)",
            quantity.as_str(),
            took.as_secs_f64(),
            level(10),
            level(50),
            level(100),
            components
        );
    }
    Ok(())
}
