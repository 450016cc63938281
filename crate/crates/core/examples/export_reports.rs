//! Write every report product for the sample hour: compressibility curve CSV,
//! scene GeoJSON, dominant-vector overlays and the JSON run summary.
//!
//!     cargo run --example export_reports [-- OUT_DIR]

use std::fs::File;
use std::path::PathBuf;

use wxspectral::compress::compressibility_curve;
use wxspectral::geo::{build_graph, laplacian};
use wxspectral::report::{
    export_curve_csv, export_dominant_geojson, export_scene_geojson, export_summary_json, DisplayClass,
    DominantVectorOverlay, RunSummary, DEFAULT_DISPLAY_FRACTION,
};
use wxspectral::{
    analyze, build_scene, dominant_vectors, eigendecompose, parse_awc_csv, ColumnMapping, WeatherQuantity,
};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/awc_metars.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("wxspectral-reports"));
    std::fs::create_dir_all(&out)?;

    let (observations, _) = parse_awc_csv(File::open(SAMPLE)?, &ColumnMapping::default())?;
    let (sites, scene) = build_scene(&observations, WeatherQuantity::Temperature)?;
    // The sample is sparse; a wider threshold links the Northeast stations.
    let threshold = 120.0;
    let basis = eigendecompose(&laplacian(&build_graph(&sites, threshold)?), &sites, threshold)?;
    let coeffs = analyze(&basis, &scene)?;
    let curve = compressibility_curve(&coeffs, &(1..=sites.len()).collect::<Vec<_>>())?;
    let dominant = dominant_vectors(&coeffs, 6)?;

    export_curve_csv(&curve, &out.join("curve.csv"))?;
    export_scene_geojson(&sites, scene.values(), &out.join("scene.geojson"))?;
    export_dominant_geojson(&basis, &sites, &dominant, DEFAULT_DISPLAY_FRACTION, &out.join("dominant.geojson"))?;
    export_summary_json(
        &RunSummary::new(WeatherQuantity::Temperature, &basis, &curve, &coeffs, &dominant, None),
        &out.join("summary.json"),
    )?;

    let top = DominantVectorOverlay::build(&basis, &sites, dominant[0], DEFAULT_DISPLAY_FRACTION)?;
    let shown = |class| top.entries.iter().filter(|e| e.class == class).count();
    println!(
        "strongest basis vector #{} (eigenvalue {:.3}): {} positive, {} negative, {} suppressed stations",
        top.basis_index,
        top.eigenvalue.max(0.0),
        shown(DisplayClass::Positive),
        shown(DisplayClass::Negative),
        shown(DisplayClass::Suppressed)
    );
    println!("reports written to {}", out.display());
    Ok(())
}
