//! Library-level pipeline over the bundled sample hour: reports → scene →
//! graph → basis → coefficients → reports, checking the hand-offs.

use std::fs::File;

use chrono::{DateTime, Utc};
use wxspectral::compress::{compressibility_curve, synthesize};
use wxspectral::geo::{build_graph, haversine_mi, laplacian};
use wxspectral::ingest::parse_metar_lines;
use wxspectral::persistence::{decode_basis, encode_basis};
use wxspectral::scene::{read_scene_csv, write_scene_csv};
use wxspectral::{
    analyze, build_scene, eigendecompose, filter_observations, join_locations, parse_awc_csv, top_k, verify_basis,
    BoundingBox, ColumnMapping, GeoPoint, StationObservation, StationTable, TimeWindow, WeatherQuantity,
};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

fn hour() -> TimeWindow {
    TimeWindow::hour("2021-01-18T17:00:00Z".parse().unwrap())
}

fn sample_observations() -> Vec<StationObservation> {
    let (all, report) =
        parse_awc_csv(File::open(format!("{DATA}/awc_metars.csv")).unwrap(), &ColumnMapping::default()).unwrap();
    assert_eq!(report.skipped_count, 0);
    filter_observations(&all, &BoundingBox::CONTIGUOUS_US, Some(&hour()))
}

#[test]
fn metar_text_and_awc_csv_agree() {
    let text = std::fs::read_to_string(format!("{DATA}/metar.txt")).unwrap();
    let (partials, parsed) = parse_metar_lines(&text);
    assert_eq!(parsed.skipped_count, 1);
    let table = StationTable::from_csv(File::open(format!("{DATA}/stations.csv")).unwrap()).unwrap();
    let anchor: DateTime<Utc> = "2021-01-18T17:00:00Z".parse().unwrap();
    let (located, joined) = join_locations(&partials, &table, anchor);
    assert_eq!(joined.skip_reasons.len(), 1);
    assert_eq!(joined.skip_reasons[0].1, "unknown station");

    let from_metar = filter_observations(&located, &BoundingBox::CONTIGUOUS_US, Some(&hour()));
    assert_eq!(from_metar, sample_observations());
}

#[test]
fn latest_report_per_station_wins() {
    let obs = sample_observations();
    assert_eq!(obs.iter().filter(|o| o.station_id == "KBOS").count(), 2);
    let (sites, scene) = build_scene(&obs, WeatherQuantity::Temperature).unwrap();
    let i = sites.sites().iter().position(|s| s.station_id == "KBOS").unwrap();
    assert_eq!(scene.values()[i], -3.0);

    let (sites, scene) = build_scene(&obs, WeatherQuantity::VisibilityReduction).unwrap();
    let value = |id: &str| scene.values()[sites.sites().iter().position(|s| s.station_id == id).unwrap()];
    assert_eq!(value("KBOS"), 9.5);
    assert_eq!(value("KALB"), 7.0);
    assert_eq!(value("KJFK"), 0.0);
}

#[test]
fn sample_hour_end_to_end() {
    let obs = sample_observations();
    let (sites, scene) = build_scene(&obs, WeatherQuantity::FlightCategory).unwrap();
    assert_eq!(sites.len(), 24);
    assert!(sites.sites().windows(2).all(|w| w[0].station_id < w[1].station_id));

    let graph = build_graph(&sites, 70.0).unwrap();
    let lap = laplacian(&graph);
    let basis = eigendecompose(&lap, &sites, 70.0).unwrap();
    let diag = verify_basis(&basis, &lap).unwrap();
    assert!(diag.passed(), "{diag:?}");
    assert_eq!(diag.zero_eigenvalue_count, diag.component_count);

    // The cached basis behaves exactly like the fresh one.
    let (cached, cached_sites) = decode_basis(&encode_basis(&basis, &sites).unwrap()).unwrap();
    assert_eq!(cached_sites, sites);
    let fresh = analyze(&basis, &scene).unwrap();
    let reloaded = analyze(&cached, &scene).unwrap();
    assert_eq!(fresh.coeffs(), reloaded.coeffs());

    let ks: Vec<usize> = (1..=sites.len()).collect();
    let curve = compressibility_curve(&fresh, &ks).unwrap();
    assert!(curve.points().windows(2).all(|w| w[0].1 <= w[1].1));
    assert!((curve.level_at(sites.len()).unwrap() - 1.0).abs() < 1e-12);

    let x = synthesize(&basis, &top_k(&fresh, sites.len()).unwrap()).unwrap();
    for (a, b) in x.iter().zip(scene.values()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn scene_file_round_trip_keeps_fingerprint() {
    let (sites, scene) = build_scene(&sample_observations(), WeatherQuantity::Temperature).unwrap();
    let mut buf = Vec::new();
    write_scene_csv(&sites, scene.values(), &mut buf).unwrap();
    let (sites2, scene2) = read_scene_csv(buf.as_slice(), WeatherQuantity::Temperature).unwrap();
    assert_eq!(sites2.fingerprint(), sites.fingerprint());
    assert_eq!(scene2.values(), scene.values());
}

#[test]
fn distance_reference_values() {
    let d = haversine_mi(GeoPoint::new(40.0, -100.0), GeoPoint::new(41.0, -100.0));
    assert!((d - 69.09).abs() <= 0.01, "{d}");
    let d = haversine_mi(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
    assert!((d - 12436.8).abs() <= 0.5, "{d}");
    // JFK-LGA is the closest pair in the sample.
    let (sites, _) = build_scene(&sample_observations(), WeatherQuantity::Temperature).unwrap();
    let p = |id: &str| sites.sites().iter().find(|s| s.station_id == id).unwrap().point();
    assert!((haversine_mi(p("KJFK"), p("KLGA")) - 10.6).abs() < 0.1);
}
