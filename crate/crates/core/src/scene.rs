//! Scene construction: one weather quantity sampled at an ordered set of sites.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fmt::g17;
use crate::geo::GeoPoint;
use crate::ingest::{FlightCategory, StationObservation};

/// Visibility at or above this many statute miles counts as unrestricted.
pub const MAX_VISIBILITY_MI: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene is empty: no station reports {0}")]
    Empty(WeatherQuantity),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("scene file format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeatherQuantity {
    Temperature,
    FlightCategory,
    VisibilityReduction,
}

impl WeatherQuantity {
    pub fn as_str(self) -> &'static str {
        match self {
            WeatherQuantity::Temperature => "temperature",
            WeatherQuantity::FlightCategory => "flight-category",
            WeatherQuantity::VisibilityReduction => "visibility-reduction",
        }
    }

    /// Scene value for one observation, or `None` when the report lacks the
    /// field this quantity needs.
    pub fn value_of(self, obs: &StationObservation) -> Option<f64> {
        match self {
            WeatherQuantity::Temperature => obs.temperature_c,
            WeatherQuantity::FlightCategory => {
                obs.flight_category.map(|c| if c == FlightCategory::Vfr { 0.0 } else { 1.0 })
            }
            WeatherQuantity::VisibilityReduction => {
                obs.visibility_mi.map(|v| MAX_VISIBILITY_MI - v.min(MAX_VISIBILITY_MI))
            }
        }
    }

    fn check_value(self, v: f64) -> Result<(), String> {
        if !v.is_finite() {
            return Err(format!("non-finite {self} value"));
        }
        match self {
            WeatherQuantity::FlightCategory if v != 0.0 && v != 1.0 => {
                Err(format!("flight-category value {v} is not 0 or 1"))
            }
            WeatherQuantity::VisibilityReduction if !(0.0..=MAX_VISIBILITY_MI).contains(&v) => {
                Err(format!("visibility reduction {v} outside [0, 10]"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WeatherQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeatherQuantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "temperature" | "temp" => Ok(WeatherQuantity::Temperature),
            "flight-category" | "flight-categories" => Ok(WeatherQuantity::FlightCategory),
            "visibility-reduction" | "visibility" => Ok(WeatherQuantity::VisibilityReduction),
            other => Err(format!(
                "unknown quantity `{other}` (expected temperature, flight-category or visibility-reduction)"
            )),
        }
    }
}

/// SHA-256 digest binding a basis or scene to an exact ordered site list.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({})", &self.to_hex()[..16])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub station_id: String,
    pub latitude: f64,
    pub longitude: f64,
}

impl Site {
    pub fn new(station_id: impl Into<String>, latitude: f64, longitude: f64) -> Self {
        Site { station_id: station_id.into(), latitude, longitude }
    }

    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.latitude, self.longitude)
    }

    /// `u16` id length, id bytes, `f64` latitude, `f64` longitude, all
    /// little-endian. Shared by the fingerprint and the basis file.
    pub(crate) fn encode_into(&self, buf: &mut Vec<u8>) {
        let id = self.station_id.as_bytes();
        buf.extend_from_slice(&(id.len() as u16).to_le_bytes());
        buf.extend_from_slice(id);
        buf.extend_from_slice(&self.latitude.to_le_bytes());
        buf.extend_from_slice(&self.longitude.to_le_bytes());
    }
}

/// Ordered, duplicate-free list of sites. Position `i` is vertex `i` in every
/// graph, Laplacian and basis derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteIndex {
    sites: Vec<Site>,
    fingerprint: Fingerprint,
}

impl SiteIndex {
    pub fn new(sites: Vec<Site>) -> Result<Self, SceneError> {
        let mut seen = HashSet::with_capacity(sites.len());
        for s in &sites {
            if s.station_id.is_empty() {
                return Err(SceneError::Invalid("empty station id".into()));
            }
            if s.station_id.len() > u16::MAX as usize {
                return Err(SceneError::Invalid("station id longer than 65535 bytes".into()));
            }
            if !(crate::ingest::valid_latitude(s.latitude) && crate::ingest::valid_longitude(s.longitude)) {
                return Err(SceneError::Invalid(format!("{} has out-of-range coordinates", s.station_id)));
            }
            if !seen.insert(s.station_id.as_str()) {
                return Err(SceneError::Invalid(format!("duplicate station {}", s.station_id)));
            }
        }
        let fingerprint = Self::fingerprint_of(&sites);
        Ok(SiteIndex { sites, fingerprint })
    }

    fn fingerprint_of(sites: &[Site]) -> Fingerprint {
        let mut buf = Vec::with_capacity(4 + sites.len() * 24);
        buf.extend_from_slice(&(sites.len() as u32).to_le_bytes());
        for s in sites {
            s.encode_into(&mut buf);
        }
        Fingerprint(Sha256::digest(&buf).into())
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn points(&self) -> Vec<GeoPoint> {
        self.sites.iter().map(Site::point).collect()
    }
}

/// Values of one quantity, aligned with a [`SiteIndex`].
#[derive(Debug, Clone, PartialEq)]
pub struct SceneVector {
    quantity: WeatherQuantity,
    site_fingerprint: Fingerprint,
    values: Vec<f64>,
}

impl SceneVector {
    pub fn new(quantity: WeatherQuantity, sites: &SiteIndex, values: Vec<f64>) -> Result<Self, SceneError> {
        if values.len() != sites.len() {
            return Err(SceneError::Invalid(format!("{} values for {} sites", values.len(), sites.len())));
        }
        for v in &values {
            quantity.check_value(*v).map_err(SceneError::Invalid)?;
        }
        Ok(SceneVector { quantity, site_fingerprint: sites.fingerprint(), values })
    }

    pub fn quantity(&self) -> WeatherQuantity {
        self.quantity
    }

    pub fn site_fingerprint(&self) -> Fingerprint {
        self.site_fingerprint
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Build the scene for `quantity` from one window's observations.
///
/// Each station contributes its latest report (equal timestamps: the later one
/// in input order). Stations whose latest report lacks the quantity are
/// dropped. Sites are ordered by station id.
pub fn build_scene(
    observations: &[StationObservation],
    quantity: WeatherQuantity,
) -> Result<(SiteIndex, SceneVector), SceneError> {
    let mut latest: BTreeMap<&str, &StationObservation> = BTreeMap::new();
    for obs in observations {
        latest
            .entry(obs.station_id.as_str())
            .and_modify(|cur| {
                if obs.observation_time >= cur.observation_time {
                    *cur = obs;
                }
            })
            .or_insert(obs);
    }

    let mut sites = Vec::with_capacity(latest.len());
    let mut values = Vec::with_capacity(latest.len());
    for (id, obs) in latest {
        if let Some(v) = quantity.value_of(obs) {
            sites.push(Site::new(id, obs.latitude, obs.longitude));
            values.push(v);
        }
    }
    if sites.is_empty() {
        return Err(SceneError::Empty(quantity));
    }
    let index = SiteIndex::new(sites)?;
    let scene = SceneVector::new(quantity, &index, values)?;
    Ok((index, scene))
}

/// Write `station_id,latitude,longitude,value` rows in site order.
pub fn write_scene_csv<W: Write>(sites: &SiteIndex, values: &[f64], writer: W) -> Result<(), SceneError> {
    if values.len() != sites.len() {
        return Err(SceneError::Invalid(format!("{} values for {} sites", values.len(), sites.len())));
    }
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| SceneError::Io(e.into());
    w.write_record(["station_id", "latitude", "longitude", "value"]).map_err(io)?;
    for (s, v) in sites.sites().iter().zip(values) {
        w.write_record([s.station_id.clone(), g17(s.latitude), g17(s.longitude), g17(*v)]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a scene file written by [`write_scene_csv`]; the quantity is supplied
/// by the caller and its value-range rules are enforced.
pub fn read_scene_csv<R: Read>(reader: R, quantity: WeatherQuantity) -> Result<(SiteIndex, SceneVector), SceneError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers().map_err(|e| SceneError::Format(e.to_string()))?.clone();
    let expected = ["station_id", "latitude", "longitude", "value"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(SceneError::Format(format!(
            "expected header {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut sites = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SceneError::Format(format!("row {}: {e}", i + 2)))?;
        if rec.len() != 4 {
            return Err(SceneError::Format(format!("row {}: expected 4 fields", i + 2)));
        }
        let num = |j: usize| -> Result<f64, SceneError> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| SceneError::Format(format!("row {}: `{}` is not a number", i + 2, &rec[j])))
        };
        sites.push(Site::new(&rec[0], num(1)?, num(2)?));
        values.push(num(3)?);
    }
    if sites.is_empty() {
        return Err(SceneError::Empty(quantity));
    }
    let index = SiteIndex::new(sites)?;
    let scene = SceneVector::new(quantity, &index, values)?;
    Ok((index, scene))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{DateTime, Utc};
    use proptest::prelude::*;

    fn t(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn obs(id: &str, time: &str) -> StationObservation {
        StationObservation {
            station_id: id.into(),
            latitude: 40.0,
            longitude: -100.0,
            observation_time: t(time),
            temperature_c: None,
            visibility_mi: None,
            ceiling_ft: None,
            flight_category: None,
        }
    }

    #[test]
    fn quantity_mappings() {
        let mut o = obs("KAAA", "2021-01-18T17:00:00Z");
        o.flight_category = Some(FlightCategory::Vfr);
        assert_eq!(WeatherQuantity::FlightCategory.value_of(&o), Some(0.0));
        for c in [FlightCategory::Mvfr, FlightCategory::Ifr, FlightCategory::Lifr] {
            o.flight_category = Some(c);
            assert_eq!(WeatherQuantity::FlightCategory.value_of(&o), Some(1.0));
        }
        for (vis, reduction) in [(10.0, 0.0), (12.0, 0.0), (3.0, 7.0), (0.0, 10.0)] {
            o.visibility_mi = Some(vis);
            assert_eq!(WeatherQuantity::VisibilityReduction.value_of(&o), Some(reduction));
        }
    }

    #[test]
    fn latest_report_wins_and_ids_sorted() {
        let mut a = obs("KSEA", "2021-01-18T17:10:00Z");
        a.temperature_c = Some(10.0);
        let mut b = obs("KSEA", "2021-01-18T17:53:00Z");
        b.temperature_c = Some(12.0);
        let mut c = obs("KBOS", "2021-01-18T17:20:00Z");
        c.temperature_c = Some(-3.0);
        let (sites, scene) = build_scene(&[b.clone(), c, a], WeatherQuantity::Temperature).unwrap();
        assert_eq!(sites.sites()[0].station_id, "KBOS");
        assert_eq!(scene.values(), &[-3.0, 12.0]);
        assert_eq!(scene.site_fingerprint(), sites.fingerprint());
    }

    #[test]
    fn equal_timestamps_prefer_later_input() {
        let mut a = obs("KSEA", "2021-01-18T17:53:00Z");
        a.temperature_c = Some(1.0);
        let mut b = a.clone();
        b.temperature_c = Some(2.0);
        let (_, scene) = build_scene(&[a, b], WeatherQuantity::Temperature).unwrap();
        assert_eq!(scene.values(), &[2.0]);
    }

    #[test]
    fn stations_without_field_dropped_and_empty_errors() {
        let mut a = obs("KAAA", "2021-01-18T17:00:00Z");
        a.temperature_c = Some(5.0);
        let b = obs("KBBB", "2021-01-18T17:00:00Z");
        let (sites, _) = build_scene(&[a, b.clone()], WeatherQuantity::Temperature).unwrap();
        assert_eq!(sites.len(), 1);
        assert!(matches!(build_scene(&[b], WeatherQuantity::Temperature), Err(SceneError::Empty(_))));
    }

    #[test]
    fn scene_vector_rejects_out_of_range() {
        let sites = SiteIndex::new(vec![Site::new("KAAA", 40.0, -100.0)]).unwrap();
        assert!(SceneVector::new(WeatherQuantity::FlightCategory, &sites, vec![0.5]).is_err());
        assert!(SceneVector::new(WeatherQuantity::VisibilityReduction, &sites, vec![11.0]).is_err());
        assert!(SceneVector::new(WeatherQuantity::Temperature, &sites, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn duplicate_sites_rejected() {
        let r = SiteIndex::new(vec![Site::new("KAAA", 40.0, -100.0), Site::new("KAAA", 41.0, -100.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn fingerprint_depends_on_order() {
        let a = Site::new("KAAA", 40.0, -100.0);
        let b = Site::new("KBBB", 41.0, -100.0);
        let ab = SiteIndex::new(vec![a.clone(), b.clone()]).unwrap();
        let ba = SiteIndex::new(vec![b, a]).unwrap();
        assert_ne!(ab.fingerprint(), ba.fingerprint());
    }

    proptest! {
        #[test]
        fn scene_csv_round_trips_bitwise(values in proptest::collection::vec(-60.0f64..60.0, 1..20)) {
            let sites = SiteIndex::new(
                (0..values.len()).map(|i| Site::new(format!("S{i:03}"), 30.0 + i as f64 * 0.37, -100.0 - i as f64 * 0.1)).collect()
            ).unwrap();
            let mut buf = Vec::new();
            write_scene_csv(&sites, &values, &mut buf).unwrap();
            let (back_sites, back) = read_scene_csv(buf.as_slice(), WeatherQuantity::Temperature).unwrap();
            prop_assert_eq!(back_sites.fingerprint(), sites.fingerprint());
            for (a, b) in back.values().iter().zip(&values) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let mut again = Vec::new();
            write_scene_csv(&back_sites, back.values(), &mut again).unwrap();
            prop_assert_eq!(again, buf);
        }

        #[test]
        fn categorical_and_visibility_scenes_stay_in_range(
            cats in proptest::collection::vec(0u8..4, 1..30),
            vis in proptest::collection::vec(0.0f64..20.0, 1..30),
        ) {
            let category = [FlightCategory::Vfr, FlightCategory::Mvfr, FlightCategory::Ifr, FlightCategory::Lifr];
            let list: Vec<_> = cats.iter().zip(vis.iter().chain(std::iter::repeat(&5.0))).enumerate().map(|(i, (c, v))| {
                let mut o = obs(&format!("S{i:03}"), "2021-01-18T17:00:00Z");
                o.flight_category = Some(category[*c as usize]);
                o.visibility_mi = Some(*v);
                o
            }).collect();
            let (_, fc) = build_scene(&list, WeatherQuantity::FlightCategory).unwrap();
            prop_assert!(fc.values().iter().all(|v| *v == 0.0 || *v == 1.0));
            let (_, vr) = build_scene(&list, WeatherQuantity::VisibilityReduction).unwrap();
            prop_assert!(vr.values().iter().all(|v| (0.0..=10.0).contains(v)));
            let (_, again) = build_scene(&list, WeatherQuantity::VisibilityReduction).unwrap();
            prop_assert_eq!(again, vr);
        }
    }
}
