use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};

use super::{
    derive_flight_category, valid_latitude, valid_longitude, FlightCategory, IngestError, IngestReport,
    StationObservation,
};
use crate::fmt::g17;

/// Column names used to locate fields in an AWC-style CSV header.
///
/// The four mandatory columns must be present. Every other column is used when
/// the header has it. Sky condition comes as repeated `sky_cover` /
/// `cloud_base_ft_agl` pairs; each cover column pairs with the next base column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub station_id: String,
    pub observation_time: String,
    pub latitude: String,
    pub longitude: String,
    pub temperature: String,
    pub visibility: String,
    pub flight_category: String,
    pub ceiling: String,
    pub sky_cover: String,
    pub cloud_base: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            station_id: "station_id".into(),
            observation_time: "observation_time".into(),
            latitude: "latitude".into(),
            longitude: "longitude".into(),
            temperature: "temp_c".into(),
            visibility: "visibility_statute_mi".into(),
            flight_category: "flight_category".into(),
            ceiling: "ceiling_ft".into(),
            sky_cover: "sky_cover".into(),
            cloud_base: "cloud_base_ft_agl".into(),
        }
    }
}

const MAX_SKY_LAYERS: usize = 4;

struct Columns {
    station_id: usize,
    observation_time: usize,
    latitude: usize,
    longitude: usize,
    temperature: Option<usize>,
    visibility: Option<usize>,
    flight_category: Option<usize>,
    ceiling: Option<usize>,
    sky: Vec<(usize, usize)>,
}

impl Columns {
    fn resolve(header: &[String], map: &ColumnMapping) -> Result<Self, IngestError> {
        let find = |name: &str| header.iter().position(|h| h == name);
        let need = |name: &str| find(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()));

        let mut sky = Vec::new();
        let mut next_base = 0;
        for (i, h) in header.iter().enumerate() {
            if h == &map.sky_cover && sky.len() < MAX_SKY_LAYERS {
                let base = header
                    .iter()
                    .enumerate()
                    .skip(i.max(next_base))
                    .find(|(_, b)| *b == &map.cloud_base)
                    .map(|(j, _)| j);
                if let Some(j) = base {
                    sky.push((i, j));
                    next_base = j + 1;
                }
            }
        }

        Ok(Columns {
            station_id: need(&map.station_id)?,
            observation_time: need(&map.observation_time)?,
            latitude: need(&map.latitude)?,
            longitude: need(&map.longitude)?,
            temperature: find(&map.temperature),
            visibility: find(&map.visibility),
            flight_category: find(&map.flight_category),
            ceiling: find(&map.ceiling),
            sky,
        })
    }
}

/// Parse AWC-style METAR CSV.
///
/// Lines before the header (AWC cache files open with a few status lines) are
/// not records; the header is the first row containing the station-id column.
/// Rows with an unusable mandatory field are skipped and reported. Unusable
/// optional fields become absent. Missing flight categories are derived from
/// ceiling and visibility.
pub fn parse_awc_csv<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
) -> Result<(Vec<StationObservation>, IngestReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);

    let mut columns = None;
    let mut out = Vec::new();
    let mut report = IngestReport::default();
    let mut record = csv::ByteRecord::new();

    loop {
        match rdr.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    let csv::ErrorKind::Io(io) = e.into_kind() else { unreachable!() };
                    return Err(IngestError::Io(io));
                }
                let line = e.position().map_or(0, |p| p.line() as usize);
                report.skip(line, e.to_string());
                continue;
            }
        }
        let line = record.position().map_or(0, |p| p.line() as usize);

        let Some(cols) = &columns else {
            let fields: Vec<String> = record.iter().map(|f| String::from_utf8_lossy(f).trim().to_string()).collect();
            if fields.iter().any(|f| f == &mapping.station_id) {
                columns = Some(Columns::resolve(&fields, mapping)?);
            }
            continue;
        };

        if record.iter().all(|f| f.iter().all(u8::is_ascii_whitespace)) {
            continue;
        }
        match parse_row(&record, cols) {
            Ok(obs) => {
                out.push(obs);
                report.accept();
            }
            Err(reason) => report.skip(line, reason),
        }
    }

    if columns.is_none() {
        return Err(IngestError::MissingColumn(mapping.station_id.clone()));
    }
    Ok((out, report))
}

fn field(record: &csv::ByteRecord, idx: usize) -> Option<&str> {
    let raw = record.get(idx)?;
    let s = std::str::from_utf8(raw).ok()?.trim();
    (!s.is_empty()).then_some(s)
}

fn parse_row(record: &csv::ByteRecord, cols: &Columns) -> Result<StationObservation, String> {
    let station_id = field(record, cols.station_id).ok_or("missing station id")?.to_ascii_uppercase();
    let time_str = field(record, cols.observation_time).ok_or("missing observation time")?;
    let observation_time = parse_time(time_str).ok_or_else(|| format!("bad observation time `{time_str}`"))?;
    let lat_str = field(record, cols.latitude).ok_or("missing latitude")?;
    let latitude = lat_str
        .parse::<f64>()
        .ok()
        .filter(|v| valid_latitude(*v))
        .ok_or_else(|| format!("bad latitude `{lat_str}`"))?;
    let lon_str = field(record, cols.longitude).ok_or("missing longitude")?;
    let longitude = lon_str
        .parse::<f64>()
        .ok()
        .filter(|v| valid_longitude(*v))
        .ok_or_else(|| format!("bad longitude `{lon_str}`"))?;

    let number = |idx: Option<usize>| -> Option<f64> {
        let s = field(record, idx?)?;
        s.trim_end_matches('+').parse::<f64>().ok().filter(|v| v.is_finite())
    };
    let temperature_c = number(cols.temperature);
    let visibility_mi = number(cols.visibility).filter(|v| *v >= 0.0);

    let explicit_ceiling = number(cols.ceiling).filter(|v| *v >= 0.0);
    let layered_ceiling = cols
        .sky
        .iter()
        .filter(|(cover, _)| {
            field(record, *cover)
                .is_some_and(|c| matches!(c.to_ascii_uppercase().as_str(), "BKN" | "OVC" | "OVX" | "VV"))
        })
        .filter_map(|(_, base)| number(Some(*base)).filter(|v| *v >= 0.0))
        .reduce(f64::min);
    let ceiling_ft = explicit_ceiling.or(layered_ceiling);

    let flight_category = cols
        .flight_category
        .and_then(|i| field(record, i))
        .and_then(|s| s.parse::<FlightCategory>().ok())
        .or_else(|| derive_flight_category(ceiling_ft, visibility_mi).ok().flatten());

    Ok(StationObservation {
        station_id,
        latitude,
        longitude,
        observation_time,
        temperature_c,
        visibility_mi,
        ceiling_ft,
        flight_category,
    })
}

fn parse_time(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|n| n.and_utc())
}

/// Write observations in the canonical CSV layout, readable back with the
/// default [`ColumnMapping`].
pub fn write_observations_csv<W: Write>(observations: &[StationObservation], writer: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    let header = [
        "station_id",
        "observation_time",
        "latitude",
        "longitude",
        "temp_c",
        "visibility_statute_mi",
        "ceiling_ft",
        "flight_category",
    ];
    let io = |e: csv::Error| IngestError::Io(e.into());
    w.write_record(header).map_err(io)?;
    let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
    for o in observations {
        w.write_record([
            o.station_id.clone(),
            o.observation_time.to_rfc3339_opts(SecondsFormat::Secs, true),
            g17(o.latitude),
            g17(o.longitude),
            opt(o.temperature_c),
            opt(o.visibility_mi),
            opt(o.ceiling_ft),
            o.flight_category.map(|c| c.as_str().to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "station_id,observation_time,latitude,longitude,temp_c,visibility_statute_mi,flight_category\n";

    fn parse(body: &str) -> (Vec<StationObservation>, IngestReport) {
        parse_awc_csv(format!("{HEADER}{body}").as_bytes(), &ColumnMapping::default()).unwrap()
    }

    #[test]
    fn reference_row() {
        let (obs, report) = parse("KSEA,2021-01-18T17:53:00Z,47.45,-122.31,12.0,10.0,VFR\n");
        assert_eq!(report.accepted_count, 1);
        let o = &obs[0];
        assert_eq!(o.station_id, "KSEA");
        assert_eq!(o.observation_time.to_rfc3339(), "2021-01-18T17:53:00+00:00");
        assert_eq!((o.latitude, o.longitude), (47.45, -122.31));
        assert_eq!(o.temperature_c, Some(12.0));
        assert_eq!(o.visibility_mi, Some(10.0));
        assert_eq!(o.flight_category, Some(FlightCategory::Vfr));
    }

    #[test]
    fn empty_temperature_is_absent() {
        let (obs, _) = parse("KSEA,2021-01-18T17:53:00Z,47.45,-122.31,,10.0,VFR\n");
        assert_eq!(obs[0].temperature_c, None);
    }

    #[test]
    fn bad_latitude_row_skipped() {
        let (obs, report) = parse(
            "KSEA,2021-01-18T17:53:00Z,abc,-122.31,12.0,10.0,VFR\nKBOS,2021-01-18T17:54:00Z,42.36,-71.01,-3,0.5,LIFR\n",
        );
        assert_eq!(obs.len(), 1);
        assert_eq!(report.skipped_count, 1);
        assert_eq!(report.skip_reasons[0].0, 2);
        assert!(report.skip_reasons[0].1.contains("latitude"));
    }

    #[test]
    fn missing_mandatory_column_named() {
        let err =
            parse_awc_csv("station_id,observation_time,latitude\n".as_bytes(), &ColumnMapping::default()).unwrap_err();
        match err {
            IngestError::MissingColumn(c) => assert_eq!(c, "longitude"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn awc_cache_layout_with_sky_pairs() {
        let text = "No errors\nNo warnings\n5 ms\ndata source=metars\n1 results\n\
raw_text,station_id,observation_time,latitude,longitude,temp_c,visibility_statute_mi,sky_cover,cloud_base_ft_agl,sky_cover,cloud_base_ft_agl,flight_category\n\
KORD 181751Z ...,KORD,2021-01-18T17:51:00Z,41.98,-87.9,0,10+,SCT,400,BKN,2500,\n";
        let (obs, report) = parse_awc_csv(text.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(report.total(), 1);
        assert_eq!(obs[0].visibility_mi, Some(10.0));
        assert_eq!(obs[0].ceiling_ft, Some(2500.0));
        assert_eq!(obs[0].flight_category, Some(FlightCategory::Mvfr));
    }

    #[test]
    fn canonical_round_trip() {
        let (obs, _) = parse(
            "KSEA,2021-01-18T17:53:00Z,47.45,-122.31,12.1,10.0,VFR\nKBOS,2021-01-18T17:54:00Z,42.36,-71.01,,0.5,\n",
        );
        let mut buf = Vec::new();
        write_observations_csv(&obs, &mut buf).unwrap();
        let (back, report) = parse_awc_csv(buf.as_slice(), &ColumnMapping::default()).unwrap();
        assert_eq!(report.skipped_count, 0);
        assert_eq!(back, obs);
    }

    #[test]
    fn invalid_utf8_and_ragged_rows_are_skipped() {
        let mut bytes = HEADER.as_bytes().to_vec();
        bytes.extend_from_slice(b"K\xffX,2021-01-18T17:53:00Z,\xff,-122.31\n");
        bytes.extend_from_slice(b"KSEA,2021-01-18T17:53:00Z\n");
        let (obs, report) = parse_awc_csv(bytes.as_slice(), &ColumnMapping::default()).unwrap();
        assert!(obs.is_empty());
        assert_eq!(report.skipped_count, 2);
    }
}
