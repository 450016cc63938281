use std::sync::LazyLock;

use regex::Regex;

use super::{FlightCategory, IngestError, IngestReport};

static STATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z0-9]{3,5}$").unwrap());
static ISSUE_TIME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(\d{2})(\d{2})(\d{2})Z$").unwrap());
static VISIBILITY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([PM])?(?:(\d{1,2})/(\d{1,2})|(\d{1,3}(?:\.\d+)?))SM$").unwrap());
static WHOLE_MILES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\d{1,2}$").unwrap());
static SKY_LAYER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(FEW|SCT|BKN|OVC|VV)(\d{3}|///)(?:CB|TCU|///)?$").unwrap());
static TEMPERATURE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(M?)(\d{2})/(?:M?\d{2}|//|XX)?$").unwrap());

/// Day-of-month and time from a METAR `DDHHMMZ` group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IssueTime {
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
}

/// A decoded METAR report before it is placed on the map.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialObservation {
    pub station_id: String,
    pub issued: Option<IssueTime>,
    pub temperature_c: Option<f64>,
    pub visibility_mi: Option<f64>,
    pub ceiling_ft: Option<f64>,
    pub flight_category: Option<FlightCategory>,
}

/// Decode one METAR line.
///
/// Extracts the station id, the issue time, temperature, prevailing visibility
/// in statute miles and the ceiling (lowest BKN, OVC or VV layer). Everything
/// after `RMK` and every unrecognized token is ignored.
pub fn parse_metar_text(line: &str) -> Result<PartialObservation, IngestError> {
    let mut tokens = line.split_whitespace().peekable();

    while let Some(t) = tokens.peek() {
        if t.eq_ignore_ascii_case("METAR") || t.eq_ignore_ascii_case("SPECI") {
            tokens.next();
        } else {
            break;
        }
    }
    let station = tokens.next().ok_or_else(|| IngestError::Parse("empty report".into()))?.to_ascii_uppercase();
    if !STATION.is_match(&station) {
        return Err(IngestError::Parse(format!("`{station}` is not a station id")));
    }

    let mut obs = PartialObservation {
        station_id: station,
        issued: None,
        temperature_c: None,
        visibility_mi: None,
        ceiling_ft: None,
        flight_category: None,
    };

    let rest: Vec<&str> = tokens.take_while(|t| *t != "RMK").collect();
    let mut i = 0;
    while i < rest.len() {
        let tok = rest[i];
        if obs.issued.is_none() {
            if let Some(c) = ISSUE_TIME.captures(tok) {
                let day: u32 = c[1].parse().unwrap();
                let hour: u32 = c[2].parse().unwrap();
                let minute: u32 = c[3].parse().unwrap();
                if (1..=31).contains(&day) && hour < 24 && minute < 60 {
                    obs.issued = Some(IssueTime { day, hour, minute });
                }
                i += 1;
                continue;
            }
        }
        if obs.visibility_mi.is_none() {
            // "1 1/2SM" spans two tokens.
            if WHOLE_MILES.is_match(tok) && i + 1 < rest.len() {
                if let Some(frac) = decode_visibility(rest[i + 1]).filter(|_| rest[i + 1].contains('/')) {
                    let whole: f64 = tok.parse().unwrap();
                    obs.visibility_mi = Some(whole + frac);
                    i += 2;
                    continue;
                }
            }
            if let Some(v) = decode_visibility(tok) {
                obs.visibility_mi = Some(v);
                i += 1;
                continue;
            }
        }
        if let Some(c) = SKY_LAYER.captures(tok) {
            if matches!(&c[1], "BKN" | "OVC" | "VV") {
                if let Ok(hundreds) = c[2].parse::<u32>() {
                    let height = f64::from(hundreds) * 100.0;
                    obs.ceiling_ft = Some(obs.ceiling_ft.map_or(height, |h| h.min(height)));
                }
            }
        } else if obs.temperature_c.is_none() {
            if let Some(c) = TEMPERATURE.captures(tok) {
                let magnitude: f64 = c[2].parse().unwrap();
                obs.temperature_c = Some(if &c[1] == "M" { -magnitude } else { magnitude });
            }
        }
        i += 1;
    }
    Ok(obs)
}

fn decode_visibility(tok: &str) -> Option<f64> {
    let c = VISIBILITY.captures(tok)?;
    if let (Some(num), Some(den)) = (c.get(2), c.get(3)) {
        let num: f64 = num.as_str().parse().ok()?;
        let den: f64 = den.as_str().parse().ok()?;
        if den == 0.0 {
            return None;
        }
        Some(num / den)
    } else {
        c.get(4)?.as_str().parse().ok()
    }
}

/// Decode a block of METAR text, one report per line. Blank lines are not
/// records; undecodable lines are skipped and reported with their line number.
pub fn parse_metar_lines(text: &str) -> (Vec<PartialObservation>, IngestReport) {
    let mut out = Vec::new();
    let mut report = IngestReport::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_metar_text(line) {
            Ok(p) => {
                out.push(p);
                report.accept();
            }
            Err(e) => report.skip(i + 1, e.to_string()),
        }
    }
    (out, report)
}
