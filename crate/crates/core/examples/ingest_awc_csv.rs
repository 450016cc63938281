//! Read an Aviation Weather Center METAR CSV, keep one hour inside the
//! contiguous-US box and write the canonical observation table to stdout.
//!
//!     cargo run --example ingest_awc_csv [-- METARS.csv]

use std::fs::File;

use wxspectral::ingest::write_observations_csv;
use wxspectral::{filter_observations, parse_awc_csv, BoundingBox, ColumnMapping, TimeWindow};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/awc_metars.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| SAMPLE.into());
    let (all, report) = parse_awc_csv(File::open(&path)?, &ColumnMapping::default())?;
    eprintln!("{path}: {} rows accepted, {} skipped", report.accepted_count, report.skipped_count);
    for (line, why) in &report.skip_reasons {
        eprintln!("  line {line}: {why}");
    }

    let window = TimeWindow::hour("2021-01-18T17:00:00Z".parse()?);
    let kept = filter_observations(&all, &BoundingBox::CONTIGUOUS_US, Some(&window));
    let dropped: Vec<&str> = all.iter().filter(|o| !kept.contains(o)).map(|o| o.station_id.as_str()).collect();
    eprintln!("kept {} of {}; outside box or hour: {dropped:?}", kept.len(), all.len());

    write_observations_csv(&kept, std::io::stdout().lock())?;
    Ok(())
}
