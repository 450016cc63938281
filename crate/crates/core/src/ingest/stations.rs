use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use super::{valid_latitude, valid_longitude, IngestError};

/// Station coordinates keyed by (upper-case) station id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StationTable {
    entries: BTreeMap<String, (f64, f64)>,
}

#[derive(Deserialize)]
struct Row {
    station_id: String,
    latitude: f64,
    longitude: f64,
}

impl StationTable {
    /// Read a `station_id,latitude,longitude` CSV. Duplicate ids and
    /// out-of-range coordinates are format errors.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut table = StationTable::default();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => IngestError::Io(io),
                other => IngestError::Format(format!("station table row {}: {other:?}", i + 2)),
            })?;
            table
                .insert(&row.station_id, row.latitude, row.longitude)
                .map_err(|e| IngestError::Format(format!("station table row {}: {e}", i + 2)))?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, station_id: &str, latitude: f64, longitude: f64) -> Result<(), IngestError> {
        let id = station_id.trim().to_ascii_uppercase();
        if id.is_empty() {
            return Err(IngestError::Argument("empty station id".into()));
        }
        if !valid_latitude(latitude) || !valid_longitude(longitude) {
            return Err(IngestError::Argument(format!("coordinates ({latitude}, {longitude}) out of range for {id}")));
        }
        if self.entries.contains_key(&id) {
            return Err(IngestError::Argument(format!("duplicate station {id}")));
        }
        self.entries.insert(id, (latitude, longitude));
        Ok(())
    }

    pub fn get(&self, station_id: &str) -> Option<(f64, f64)> {
        self.entries.get(&station_id.to_ascii_uppercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_table() {
        let t = StationTable::from_csv(
            "station_id,latitude,longitude\nKSEA,47.45,-122.31\nkbos, 42.36 ,-71.01\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("KBOS"), Some((42.36, -71.01)));
        assert_eq!(t.get("ksea"), Some((47.45, -122.31)));
    }

    #[test]
    fn rejects_duplicates_and_bad_coordinates() {
        let dup = "station_id,latitude,longitude\nKSEA,47.45,-122.31\nKSEA,47.0,-122.0\n";
        assert!(matches!(StationTable::from_csv(dup.as_bytes()), Err(IngestError::Format(_))));
        let bad = "station_id,latitude,longitude\nKSEA,97.45,-122.31\n";
        assert!(matches!(StationTable::from_csv(bad.as_bytes()), Err(IngestError::Format(_))));
    }
}
