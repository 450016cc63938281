//! Turn one hour of observations into scene vectors for each weather
//! quantity. Each quantity gets its own site index, because stations lacking
//! that field drop out.
//!
//!     cargo run --example build_scene

use std::fs::File;

use wxspectral::scene::write_scene_csv;
use wxspectral::{
    build_scene, filter_observations, parse_awc_csv, BoundingBox, ColumnMapping, TimeWindow, WeatherQuantity,
};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/awc_metars.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (all, _) = parse_awc_csv(File::open(SAMPLE)?, &ColumnMapping::default())?;
    let hour = TimeWindow::hour("2021-01-18T17:00:00Z".parse()?);
    let observations = filter_observations(&all, &BoundingBox::CONTIGUOUS_US, Some(&hour));

    for quantity in
        [WeatherQuantity::Temperature, WeatherQuantity::FlightCategory, WeatherQuantity::VisibilityReduction]
    {
        let (sites, scene) = build_scene(&observations, quantity)?;
        println!("{quantity}: {} sites, fingerprint {}", sites.len(), sites.fingerprint());
        let line: Vec<String> =
            sites.sites().iter().zip(scene.values()).map(|(s, v)| format!("{}={v}", s.station_id)).collect();
        println!("  {}", line.join(" "));
    }

    println!("\nscene file for temperature:");
    let (sites, scene) = build_scene(&observations, WeatherQuantity::Temperature)?;
    write_scene_csv(&sites, scene.values(), std::io::stdout().lock())?;
    Ok(())
}
