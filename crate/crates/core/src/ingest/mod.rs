//! METAR ingestion: raw report text, AWC-style CSV, station tables, and the
//! bounding-box/time-window filter that defines one scene's worth of reports.

mod awc;
mod metar;
mod stations;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use thiserror::Error;

pub use awc::{parse_awc_csv, write_observations_csv, ColumnMapping};
pub use metar::{parse_metar_lines, parse_metar_text, IssueTime, PartialObservation};
pub use stations::StationTable;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("header is missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Operational weather category, ordered worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlightCategory {
    Lifr,
    Ifr,
    Mvfr,
    Vfr,
}

impl FlightCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FlightCategory::Lifr => "LIFR",
            FlightCategory::Ifr => "IFR",
            FlightCategory::Mvfr => "MVFR",
            FlightCategory::Vfr => "VFR",
        }
    }
}

impl fmt::Display for FlightCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FlightCategory {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LIFR" => Ok(FlightCategory::Lifr),
            "IFR" => Ok(FlightCategory::Ifr),
            "MVFR" => Ok(FlightCategory::Mvfr),
            "VFR" => Ok(FlightCategory::Vfr),
            other => Err(IngestError::Parse(format!("unknown flight category `{other}`"))),
        }
    }
}

/// One station's decoded report.
#[derive(Debug, Clone, PartialEq)]
pub struct StationObservation {
    pub station_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub observation_time: DateTime<Utc>,
    pub temperature_c: Option<f64>,
    pub visibility_mi: Option<f64>,
    pub ceiling_ft: Option<f64>,
    pub flight_category: Option<FlightCategory>,
}

impl StationObservation {
    /// Check the record-level invariants, returning the first violation.
    pub fn validate(&self) -> Result<(), String> {
        if self.station_id.trim().is_empty() {
            return Err("empty station id".into());
        }
        if !valid_latitude(self.latitude) {
            return Err(format!("latitude {} out of range", self.latitude));
        }
        if !valid_longitude(self.longitude) {
            return Err(format!("longitude {} out of range", self.longitude));
        }
        if let Some(t) = self.temperature_c {
            if !t.is_finite() {
                return Err("non-finite temperature".into());
            }
        }
        if let Some(v) = self.visibility_mi {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("visibility {v} is negative or non-finite"));
            }
        }
        if let Some(c) = self.ceiling_ft {
            if !(c.is_finite() && c >= 0.0) {
                return Err(format!("ceiling {c} is negative or non-finite"));
            }
        }
        Ok(())
    }
}

pub(crate) fn valid_latitude(lat: f64) -> bool {
    (-90.0..=90.0).contains(&lat)
}

pub(crate) fn valid_longitude(lon: f64) -> bool {
    (-180.0..=180.0).contains(&lon)
}

/// Accepted/skipped bookkeeping for one ingest pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub accepted_count: usize,
    pub skipped_count: usize,
    /// `(record number, reason)`; record numbers are input line numbers for
    /// text and CSV sources, 1-based list positions for joins.
    pub skip_reasons: Vec<(usize, String)>,
}

impl IngestReport {
    pub(crate) fn accept(&mut self) {
        self.accepted_count += 1;
    }

    pub(crate) fn skip(&mut self, record: usize, reason: impl Into<String>) {
        self.skipped_count += 1;
        self.skip_reasons.push((record, reason.into()));
    }

    pub fn total(&self) -> usize {
        self.accepted_count + self.skipped_count
    }
}

/// Worst of the ceiling-implied and visibility-implied categories.
///
/// Ceiling below 500 ft or visibility below 1 mi is LIFR, below 1000 ft / 3 mi
/// IFR, at most 3000 ft / 5 mi MVFR, anything better VFR. A missing input does
/// not constrain the result; with both missing there is no category.
pub fn derive_flight_category(
    ceiling_ft: Option<f64>,
    visibility_mi: Option<f64>,
) -> Result<Option<FlightCategory>, IngestError> {
    for (name, v) in [("ceiling", ceiling_ft), ("visibility", visibility_mi)] {
        if let Some(v) = v {
            if v.is_nan() || v < 0.0 {
                return Err(IngestError::Argument(format!("{name} must be non-negative, got {v}")));
            }
        }
    }

    let from_ceiling = ceiling_ft.map(|c| {
        if c < 500.0 {
            FlightCategory::Lifr
        } else if c < 1000.0 {
            FlightCategory::Ifr
        } else if c <= 3000.0 {
            FlightCategory::Mvfr
        } else {
            FlightCategory::Vfr
        }
    });
    let from_visibility = visibility_mi.map(|v| {
        if v < 1.0 {
            FlightCategory::Lifr
        } else if v < 3.0 {
            FlightCategory::Ifr
        } else if v <= 5.0 {
            FlightCategory::Mvfr
        } else {
            FlightCategory::Vfr
        }
    });

    Ok(match (from_ceiling, from_visibility) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

/// Latitude/longitude rectangle; `west` is the more negative longitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    south: f64,
    north: f64,
    west: f64,
    east: f64,
}

impl BoundingBox {
    /// Contiguous-US box, 25.1°–45.4° N and 124.8°–66.9° W.
    pub const CONTIGUOUS_US: BoundingBox = BoundingBox { south: 25.1, north: 45.4, west: -124.8, east: -66.9 };

    pub fn new(south: f64, north: f64, west: f64, east: f64) -> Result<Self, IngestError> {
        if !(valid_latitude(south) && valid_latitude(north)) {
            return Err(IngestError::Argument("bounding-box latitude out of range".into()));
        }
        if !(valid_longitude(west) && valid_longitude(east)) {
            return Err(IngestError::Argument("bounding-box longitude out of range".into()));
        }
        if south > north {
            return Err(IngestError::Argument(format!("bounding box south {south} > north {north}")));
        }
        if west > east {
            return Err(IngestError::Argument(format!("bounding box west {west} > east {east}")));
        }
        Ok(BoundingBox { south, north, west, east })
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.south && lat <= self.north && lon >= self.west && lon <= self.east
    }

    pub fn south(&self) -> f64 {
        self.south
    }
    pub fn north(&self) -> f64 {
        self.north
    }
    pub fn west(&self) -> f64 {
        self.west
    }
    pub fn east(&self) -> f64 {
        self.east
    }
}

impl Default for BoundingBox {
    fn default() -> Self {
        BoundingBox::CONTIGUOUS_US
    }
}

/// Half-open UTC interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeWindow {
    start: DateTime<Utc>,
    end: DateTime<Utc>,
}

impl TimeWindow {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, IngestError> {
        if start >= end {
            return Err(IngestError::Argument(format!("time window start {start} is not before end {end}")));
        }
        Ok(TimeWindow { start, end })
    }

    /// The hour beginning at `start`.
    pub fn hour(start: DateTime<Utc>) -> Self {
        TimeWindow { start, end: start + Duration::hours(1) }
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        t >= self.start && t < self.end
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }
    pub fn end(&self) -> DateTime<Utc> {
        self.end
    }
}

/// Keep observations inside the box and, when given, inside the window.
/// Input order is preserved.
pub fn filter_observations(
    observations: &[StationObservation],
    bbox: &BoundingBox,
    window: Option<&TimeWindow>,
) -> Vec<StationObservation> {
    observations
        .iter()
        .filter(|o| bbox.contains(o.latitude, o.longitude))
        .filter(|o| window.is_none_or(|w| w.contains(o.observation_time)))
        .cloned()
        .collect()
}

/// Attach coordinates (and a full timestamp) to decoded reports.
///
/// METAR time groups carry only day-of-month, hour and minute. Each is placed
/// in the month of `anchor` or the month before, whichever lands closer to the
/// anchor. Reports whose station is not in `table`, or that have no time group,
/// are skipped. A flight category is derived from ceiling and visibility.
pub fn join_locations(
    partials: &[PartialObservation],
    table: &StationTable,
    anchor: DateTime<Utc>,
) -> (Vec<StationObservation>, IngestReport) {
    let mut out = Vec::with_capacity(partials.len());
    let mut report = IngestReport::default();

    for (i, p) in partials.iter().enumerate() {
        let record = i + 1;
        let Some((lat, lon)) = table.get(&p.station_id) else {
            report.skip(record, "unknown station");
            continue;
        };
        let Some(issued) = p.issued else {
            report.skip(record, "missing observation time");
            continue;
        };
        let Some(observation_time) = resolve_issue_time(issued, anchor) else {
            report.skip(record, format!("day {} does not exist near {anchor}", issued.day));
            continue;
        };
        let flight_category = match p.flight_category {
            Some(c) => Some(c),
            None => derive_flight_category(p.ceiling_ft, p.visibility_mi).ok().flatten(),
        };
        out.push(StationObservation {
            station_id: p.station_id.clone(),
            latitude: lat,
            longitude: lon,
            observation_time,
            temperature_c: p.temperature_c,
            visibility_mi: p.visibility_mi,
            ceiling_ft: p.ceiling_ft,
            flight_category,
        });
        report.accept();
    }
    (out, report)
}

fn resolve_issue_time(issued: IssueTime, anchor: DateTime<Utc>) -> Option<DateTime<Utc>> {
    let (y, m) = (anchor.year(), anchor.month());
    let (py, pm) = if m == 1 { (y - 1, 12) } else { (y, m - 1) };

    [(y, m), (py, pm)]
        .into_iter()
        .filter_map(|(yy, mm)| {
            let date = NaiveDate::from_ymd_opt(yy, mm, issued.day)?;
            let naive = date.and_hms_opt(issued.hour, issued.minute, 0)?;
            Some(Utc.from_utc_datetime(&naive))
        })
        .min_by_key(|t| (*t - anchor).num_seconds().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(id: &str, lat: f64, lon: f64, t: DateTime<Utc>) -> StationObservation {
        StationObservation {
            station_id: id.into(),
            latitude: lat,
            longitude: lon,
            observation_time: t,
            temperature_c: None,
            visibility_mi: None,
            ceiling_ft: None,
            flight_category: None,
        }
    }

    fn t(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    #[test]
    fn flight_category_table() {
        assert_eq!(derive_flight_category(Some(25000.0), Some(10.0)).unwrap(), Some(FlightCategory::Vfr));
        assert_eq!(derive_flight_category(Some(400.0), Some(10.0)).unwrap(), Some(FlightCategory::Lifr));
        assert_eq!(derive_flight_category(None, None).unwrap(), None);
        assert_eq!(derive_flight_category(None, Some(0.5)).unwrap(), Some(FlightCategory::Lifr));
        assert_eq!(derive_flight_category(Some(800.0), None).unwrap(), Some(FlightCategory::Ifr));
    }

    #[test]
    fn flight_category_boundaries() {
        use FlightCategory::*;
        let c = |ceil: f64| derive_flight_category(Some(ceil), None).unwrap().unwrap();
        let v = |vis: f64| derive_flight_category(None, Some(vis)).unwrap().unwrap();
        assert_eq!((c(499.0), c(500.0), c(999.0), c(1000.0)), (Lifr, Ifr, Ifr, Mvfr));
        assert_eq!((c(3000.0), c(3001.0)), (Mvfr, Vfr));
        assert_eq!((v(0.99), v(1.0), v(2.99), v(3.0)), (Lifr, Ifr, Ifr, Mvfr));
        assert_eq!((v(5.0), v(5.01)), (Mvfr, Vfr));
    }

    #[test]
    fn negative_inputs_rejected() {
        assert!(matches!(derive_flight_category(Some(-1.0), None), Err(IngestError::Argument(_))));
        assert!(matches!(derive_flight_category(None, Some(-0.5)), Err(IngestError::Argument(_))));
    }

    #[test]
    fn box_and_window_filter() {
        let w = TimeWindow::new(t("2021-01-18T17:00:00Z"), t("2021-01-18T18:00:00Z")).unwrap();
        let list = vec![
            obs("KSEA", 47.6, -122.3, t("2021-01-18T17:53:00Z")),
            obs("KAAA", 40.0, -100.0, t("2021-01-18T17:30:00Z")),
            obs("KBBB", 40.0, -100.0, t("2021-01-18T18:00:00Z")),
            obs("KCCC", 40.0, -100.0, t("2021-01-18T17:00:00Z")),
        ];
        let kept = filter_observations(&list, &BoundingBox::default(), Some(&w));
        let ids: Vec<_> = kept.iter().map(|o| o.station_id.as_str()).collect();
        assert_eq!(ids, ["KAAA", "KCCC"]);
    }

    #[test]
    fn inverted_box_and_window_rejected() {
        assert!(BoundingBox::new(45.0, 25.0, -120.0, -70.0).is_err());
        assert!(BoundingBox::new(25.0, 45.0, -70.0, -120.0).is_err());
        let a = t("2021-01-18T17:00:00Z");
        assert!(TimeWindow::new(a, a).is_err());
    }

    #[test]
    fn join_resolves_and_skips() {
        let mut table = StationTable::default();
        table.insert("KSEA", 47.45, -122.31).unwrap();
        let partials = vec![
            parse_metar_text("KSEA 181753Z 18004KT 10SM FEW025 BKN250 12/08 A3022").unwrap(),
            parse_metar_text("XXXX 181753Z 10SM CLR 12/08").unwrap(),
            parse_metar_text("KSEA 10SM CLR 12/08").unwrap(),
        ];
        let (full, report) = join_locations(&partials, &table, t("2021-01-18T18:00:00Z"));
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].observation_time, t("2021-01-18T17:53:00Z"));
        assert_eq!((full[0].latitude, full[0].longitude), (47.45, -122.31));
        assert_eq!(full[0].flight_category, Some(FlightCategory::Vfr));
        assert_eq!(report.accepted_count, 1);
        assert_eq!(report.skip_reasons[0], (2, "unknown station".to_string()));
        assert_eq!(report.skip_reasons[1].1, "missing observation time");

        let (none, empty) = join_locations(&[], &table, t("2021-01-18T18:00:00Z"));
        assert!(none.is_empty());
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn issue_day_rolls_back_a_month() {
        let p = parse_metar_text("KSEA 312355Z 10SM CLR 01/M01").unwrap();
        let got = resolve_issue_time(p.issued.unwrap(), t("2021-02-01T00:30:00Z")).unwrap();
        assert_eq!(got, t("2021-01-31T23:55:00Z"));
    }

    proptest! {
        #[test]
        fn category_is_monotone(
            c in 0.0f64..40000.0, dc in 0.0f64..5000.0,
            v in 0.0f64..15.0, dv in 0.0f64..5.0,
        ) {
            let better = derive_flight_category(Some(c + dc), Some(v + dv)).unwrap();
            let worse = derive_flight_category(Some(c), Some(v)).unwrap();
            prop_assert!(worse <= better);
        }

        #[test]
        fn filter_is_ordered_subset(lats in proptest::collection::vec(20.0f64..50.0, 0..40)) {
            let base = t("2021-01-18T17:10:00Z");
            let list: Vec<_> = lats.iter().enumerate()
                .map(|(i, lat)| obs(&format!("S{i:03}"), *lat, -100.0, base))
                .collect();
            let kept = filter_observations(&list, &BoundingBox::default(), None);
            let mut it = list.iter();
            for k in &kept {
                prop_assert!(it.any(|o| o == k));
            }
        }
    }
}
