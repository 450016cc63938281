//! Decode raw METAR lines, attach station coordinates and derive flight
//! categories.
//!
//!     cargo run --example decode_metar [-- REPORTS.txt STATIONS.csv]

use std::fs::{self, File};

use chrono::{DateTime, Utc};
use wxspectral::ingest::parse_metar_lines;
use wxspectral::{join_locations, StationTable};

const REPORTS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/metar.txt");
const STATIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/stations.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reports = args.next().unwrap_or_else(|| REPORTS.into());
    let stations = args.next().unwrap_or_else(|| STATIONS.into());

    let (partials, parsed) = parse_metar_lines(&fs::read_to_string(reports)?);
    let table = StationTable::from_csv(File::open(stations)?)?;
    // Time groups only carry the day of month; anchor them to the sample hour.
    let anchor: DateTime<Utc> = "2021-01-18T17:00:00Z".parse()?;
    let (observations, joined) = join_locations(&partials, &table, anchor);

    println!("{:<6} {:<21} {:>7} {:>7} {:>8}  category", "id", "time", "temp C", "vis mi", "ceil ft");
    for o in &observations {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v}"));
        println!(
            "{:<6} {:<21} {:>7} {:>7} {:>8}  {}",
            o.station_id,
            o.observation_time.to_rfc3339(),
            show(o.temperature_c),
            show(o.visibility_mi),
            show(o.ceiling_ft),
            o.flight_category.map_or("-", |c| c.as_str())
        );
    }
    for (line, why) in &parsed.skip_reasons {
        println!("line {line} not decoded: {why}");
    }
    for (record, why) in &joined.skip_reasons {
        println!("report {record} ({}) dropped: {why}", partials[record - 1].station_id);
    }
    Ok(())
}
