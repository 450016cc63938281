//! The 70-mile proximity graph over the sample stations: which stations are
//! neighbours, how the graph splits into components, and the Laplacian rows.
//!
//!     cargo run --example proximity_graph [-- THRESHOLD_MI]

use std::fs::File;

use wxspectral::geo::{build_graph, connected_components, haversine_mi, laplacian};
use wxspectral::{build_scene, parse_awc_csv, ColumnMapping, WeatherQuantity, DEFAULT_THRESHOLD_MI};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/awc_metars.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold = match std::env::args().nth(1) {
        Some(t) => t.parse()?,
        None => DEFAULT_THRESHOLD_MI,
    };
    let (observations, _) = parse_awc_csv(File::open(SAMPLE)?, &ColumnMapping::default())?;
    let (sites, _) = build_scene(&observations, WeatherQuantity::Temperature)?;
    let points = sites.points();
    let ids: Vec<&str> = sites.sites().iter().map(|s| s.station_id.as_str()).collect();

    let graph = build_graph(&sites, threshold)?;
    println!("{} sites, {} edges below {threshold} mi", graph.n(), graph.edges().len());
    for &(i, j) in graph.edges() {
        println!("  {} - {}  {:.1} mi", ids[i], ids[j], haversine_mi(points[i], points[j]));
    }

    let (count, labels) = connected_components(&graph);
    println!("\n{count} components:");
    for c in 0..count {
        let members: Vec<&str> = (0..graph.n()).filter(|&i| labels[i] == c).map(|i| ids[i]).collect();
        println!("  {}", members.join(" "));
    }

    let lap = laplacian(&graph);
    println!("\nLaplacian (trace {} = 2 x edges):", lap.trace());
    for (i, id) in ids.iter().enumerate() {
        let row: String = lap.row(i).iter().map(|v| format!("{v:>3}")).collect();
        println!("  {id:<5}{row}");
    }
    Ok(())
}
