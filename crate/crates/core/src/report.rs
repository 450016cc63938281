//! Export of analysis products: compressibility curves, scene and
//! dominant-vector maps as GeoJSON, and run summaries as JSON. Every float is
//! rendered with 17 significant digits so identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::compress::{ClassificationStats, CompressibilityCurve, ErrorStats, SpectralCoefficients};
use crate::fmt::{g17, serialize_g17, serialize_g17_opt};
use crate::scene::{SiteIndex, WeatherQuantity};
use crate::spectral::GraphSpectralBasis;

/// Entries smaller than this fraction of a vector's largest entry are not
/// highlighted on dominant-vector maps.
pub const DEFAULT_DISPLAY_FRACTION: f64 = 0.25;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid argument: {0}")]
    Argument(String),
}

impl From<serde_json::Error> for ReportError {
    fn from(e: serde_json::Error) -> Self {
        ReportError::Io(e.into())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, ReportError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `K,level` CSV.
pub fn write_curve_csv<W: Write>(curve: &CompressibilityCurve, mut w: W) -> Result<(), ReportError> {
    writeln!(w, "K,level")?;
    for &(k, level) in curve.points() {
        writeln!(w, "{k},{}", g17(level))?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_curve_csv(curve: &CompressibilityCurve, path: &Path) -> Result<(), ReportError> {
    write_curve_csv(curve, create(path)?)
}

#[derive(Serialize)]
struct FeatureCollection<P: Serialize> {
    #[serde(rename = "type")]
    kind: &'static str,
    features: Vec<Feature<P>>,
}

#[derive(Serialize)]
struct Feature<P: Serialize> {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: Point,
    properties: P,
}

#[derive(Serialize)]
struct Point {
    #[serde(rename = "type")]
    kind: &'static str,
    coordinates: [G17; 2],
}

#[derive(Serialize, Clone, Copy)]
struct G17(#[serde(serialize_with = "serialize_g17")] f64);

fn point_feature<P: Serialize>(lat: f64, lon: f64, properties: P) -> Feature<P> {
    Feature { kind: "Feature", geometry: Point { kind: "Point", coordinates: [G17(lon), G17(lat)] }, properties }
}

fn write_collection<P: Serialize, W: Write>(features: Vec<Feature<P>>, mut w: W) -> Result<(), ReportError> {
    let fc = FeatureCollection { kind: "FeatureCollection", features };
    serde_json::to_writer_pretty(&mut w, &fc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SceneProps<'a> {
    station_id: &'a str,
    #[serde(serialize_with = "serialize_g17")]
    value: f64,
}

/// One `Point` per site (coordinates `[lon, lat]`) with `station_id` and
/// `value` properties, in site order.
pub fn write_scene_geojson<W: Write>(sites: &SiteIndex, values: &[f64], w: W) -> Result<(), ReportError> {
    if values.len() != sites.len() {
        return Err(ReportError::Argument(format!("{} values for {} sites", values.len(), sites.len())));
    }
    let features = sites
        .sites()
        .iter()
        .zip(values)
        .map(|(s, v)| point_feature(s.latitude, s.longitude, SceneProps { station_id: &s.station_id, value: *v }))
        .collect();
    write_collection(features, w)
}

pub fn export_scene_geojson(sites: &SiteIndex, values: &[f64], path: &Path) -> Result<(), ReportError> {
    write_scene_geojson(sites, values, create(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplayClass {
    Positive,
    Negative,
    Suppressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayEntry {
    pub station_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub component: f64,
    pub class: DisplayClass,
}

/// One basis vector laid over the station map.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantVectorOverlay {
    pub basis_index: usize,
    pub eigenvalue: f64,
    pub entries: Vec<OverlayEntry>,
}

impl DominantVectorOverlay {
    /// Entries with `|component| < display_fraction × max |component|` are
    /// suppressed; the rest are classed by sign.
    pub fn build(
        basis: &GraphSpectralBasis,
        sites: &SiteIndex,
        basis_index: usize,
        display_fraction: f64,
    ) -> Result<Self, ReportError> {
        if basis.site_fingerprint() != sites.fingerprint() {
            return Err(ReportError::Argument("basis and sites have different fingerprints".into()));
        }
        if basis_index >= basis.n() {
            return Err(ReportError::Argument(format!("basis index {basis_index} out of range")));
        }
        if !(display_fraction > 0.0 && display_fraction <= 1.0) {
            return Err(ReportError::Argument(format!("display fraction {display_fraction} not in (0, 1]")));
        }
        let v = basis.vector(basis_index);
        let cutoff = display_fraction * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let entries = sites
            .sites()
            .iter()
            .zip(v)
            .map(|(s, &c)| OverlayEntry {
                station_id: s.station_id.clone(),
                latitude: s.latitude,
                longitude: s.longitude,
                component: c,
                class: if c.abs() < cutoff {
                    DisplayClass::Suppressed
                } else if c < 0.0 {
                    DisplayClass::Negative
                } else {
                    DisplayClass::Positive
                },
            })
            .collect();
        Ok(DominantVectorOverlay { basis_index, eigenvalue: basis.eigenvalues()[basis_index], entries })
    }
}

#[derive(Serialize)]
struct OverlayProps<'a> {
    rank: usize,
    basis_index: usize,
    #[serde(serialize_with = "serialize_g17")]
    eigenvalue: f64,
    station_id: &'a str,
    #[serde(serialize_with = "serialize_g17")]
    component: f64,
    display_class: DisplayClass,
}

/// All overlays in one collection; each feature carries its `basis_index` and
/// `rank` (position in `indices`).
pub fn write_dominant_geojson<W: Write>(
    basis: &GraphSpectralBasis,
    sites: &SiteIndex,
    indices: &[usize],
    display_fraction: f64,
    w: W,
) -> Result<(), ReportError> {
    let overlays = indices
        .iter()
        .map(|&i| DominantVectorOverlay::build(basis, sites, i, display_fraction))
        .collect::<Result<Vec<_>, _>>()?;
    let features = overlays
        .iter()
        .enumerate()
        .flat_map(|(rank, o)| {
            o.entries.iter().map(move |e| {
                point_feature(
                    e.latitude,
                    e.longitude,
                    OverlayProps {
                        rank,
                        basis_index: o.basis_index,
                        eigenvalue: o.eigenvalue,
                        station_id: &e.station_id,
                        component: e.component,
                        display_class: e.class,
                    },
                )
            })
        })
        .collect();
    write_collection(features, w)
}

pub fn export_dominant_geojson(
    basis: &GraphSpectralBasis,
    sites: &SiteIndex,
    indices: &[usize],
    display_fraction: f64,
    path: &Path,
) -> Result<(), ReportError> {
    write_dominant_geojson(basis, sites, indices, display_fraction, create(path)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelPoint {
    pub k: usize,
    #[serde(serialize_with = "serialize_g17")]
    pub level: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominantEntry {
    pub basis_index: usize,
    #[serde(serialize_with = "serialize_g17")]
    pub eigenvalue: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub coefficient: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdFraction {
    #[serde(serialize_with = "serialize_g17")]
    pub threshold: f64,
    #[serde(serialize_with = "serialize_g17")]
    pub fraction: f64,
}

/// Reconstruction quality in JSON form.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ErrorSummary {
    Continuous {
        k: usize,
        #[serde(serialize_with = "serialize_g17")]
        max_abs_error: f64,
        within: Vec<ThresholdFraction>,
    },
    Categorical {
        k: usize,
        #[serde(serialize_with = "serialize_g17")]
        accuracy: f64,
        #[serde(serialize_with = "serialize_g17_opt")]
        non_vfr_recall: Option<f64>,
    },
}

impl ErrorSummary {
    pub fn continuous(k: usize, stats: &ErrorStats) -> Self {
        ErrorSummary::Continuous {
            k,
            max_abs_error: stats.max_abs_error,
            within: stats
                .fractions
                .iter()
                .map(|&(threshold, fraction)| ThresholdFraction { threshold, fraction })
                .collect(),
        }
    }

    pub fn categorical(k: usize, stats: &ClassificationStats) -> Self {
        ErrorSummary::Categorical { k, accuracy: stats.accuracy, non_vfr_recall: stats.recall }
    }
}

/// Everything one analysis run produced. Keys serialize in declaration order.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub quantity: WeatherQuantity,
    pub n_sites: usize,
    #[serde(serialize_with = "serialize_g17")]
    pub threshold_mi: f64,
    pub site_fingerprint: String,
    pub levels: Vec<LevelPoint>,
    pub dominant: Vec<DominantEntry>,
    pub error_stats: Option<ErrorSummary>,
}

impl Serialize for WeatherQuantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl RunSummary {
    pub fn new(
        quantity: WeatherQuantity,
        basis: &GraphSpectralBasis,
        curve: &CompressibilityCurve,
        coeffs: &SpectralCoefficients,
        dominant: &[usize],
        error_stats: Option<ErrorSummary>,
    ) -> Self {
        RunSummary {
            quantity,
            n_sites: basis.n(),
            threshold_mi: basis.threshold_mi(),
            site_fingerprint: basis.site_fingerprint().to_hex(),
            levels: curve.points().iter().map(|&(k, level)| LevelPoint { k, level }).collect(),
            dominant: dominant
                .iter()
                .map(|&i| DominantEntry {
                    basis_index: i,
                    eigenvalue: basis.eigenvalues()[i],
                    coefficient: coeffs.coeffs()[i],
                })
                .collect(),
            error_stats,
        }
    }
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn export_summary_json(summary: &RunSummary, path: &Path) -> Result<(), ReportError> {
    write_json(summary, create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compress::{analyze, compressibility_curve, dominant_vectors};
    use crate::geo::{build_graph, laplacian};
    use crate::scene::{SceneVector, Site};
    use crate::spectral::eigendecompose;
    use crate::synthetic::sites_along_meridian;
    use serde_json::Value;

    fn fixture() -> (GraphSpectralBasis, SiteIndex) {
        let sites = sites_along_meridian(5, 35.0, -100.0, 50.0);
        let g = build_graph(&sites, 70.0).unwrap();
        (eigendecompose(&laplacian(&g), &sites, 70.0).unwrap(), sites)
    }

    #[test]
    fn curve_csv_rows() {
        let c = SpectralCoefficients::new(crate::scene::Fingerprint([0; 32]), vec![3.0, 0.0, 4.0, 0.0]);
        let curve = compressibility_curve(&c, &[1, 2]).unwrap();
        let mut a = Vec::new();
        write_curve_csv(&curve, &mut a).unwrap();
        assert_eq!(String::from_utf8(a.clone()).unwrap(), "K,level\n1,0.64000000000000001\n2,1\n");
        let mut b = Vec::new();
        write_curve_csv(&curve, &mut b).unwrap();
        assert_eq!(a, b);

        let mut empty = Vec::new();
        write_curve_csv(&CompressibilityCurve::default(), &mut empty).unwrap();
        assert_eq!(empty, b"K,level\n");
    }

    #[test]
    fn scene_geojson_axis_order_and_values() {
        let sites = SiteIndex::new(vec![Site::new("KBOS", 42.36, -71.01)]).unwrap();
        let mut buf = Vec::new();
        write_scene_geojson(&sites, &[-3.0], &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let f = &v["features"][0];
        assert_eq!(v["type"], "FeatureCollection");
        assert_eq!(f["geometry"]["coordinates"][0].as_f64(), Some(-71.01));
        assert_eq!(f["geometry"]["coordinates"][1].as_f64(), Some(42.36));
        assert_eq!(f["properties"]["value"].as_f64(), Some(-3.0));
        assert_eq!(f["properties"]["station_id"], "KBOS");
    }

    #[test]
    fn overlay_classes() {
        let sites =
            SiteIndex::new((0..4).map(|i| Site::new(format!("S{i}"), 30.0 + i as f64, -90.0)).collect()).unwrap();
        let fp = sites.fingerprint();
        // Column 1 has max |entry| 0.2; cutoff at fraction 0.25 is 0.05.
        let mut vecs = vec![0.5; 4];
        vecs.extend([0.2, -0.1, 0.04, -0.06]);
        vecs.extend([0.5; 8]);
        let basis = GraphSpectralBasis::from_parts(vec![0.0, 1.0, 2.0, 3.0], vecs, fp, 70.0).unwrap();
        let o = DominantVectorOverlay::build(&basis, &sites, 1, 0.25).unwrap();
        let classes: Vec<_> = o.entries.iter().map(|e| e.class).collect();
        use DisplayClass::*;
        assert_eq!(classes, [Positive, Negative, Suppressed, Negative]);

        let flat = DominantVectorOverlay::build(&basis, &sites, 0, 0.25).unwrap();
        assert!(flat.entries.iter().all(|e| e.class == Positive));

        assert!(DominantVectorOverlay::build(&basis, &sites, 4, 0.25).is_err());
        assert!(DominantVectorOverlay::build(&basis, &sites, 0, 0.0).is_err());
    }

    #[test]
    fn dominant_geojson_groups() {
        let (basis, sites) = fixture();
        let mut buf = Vec::new();
        write_dominant_geojson(&basis, &sites, &[2, 0], DEFAULT_DISPLAY_FRACTION, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let features = v["features"].as_array().unwrap();
        assert_eq!(features.len(), 10);
        assert_eq!(features[0]["properties"]["basis_index"], 2);
        assert_eq!(features[5]["properties"]["rank"], 1);
    }

    #[test]
    fn summary_schema_and_determinism() {
        let (basis, sites) = fixture();
        let scene = SceneVector::new(WeatherQuantity::Temperature, &sites, vec![1.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
        let coeffs = analyze(&basis, &scene).unwrap();
        let curve = compressibility_curve(&coeffs, &[1, 2, 5]).unwrap();
        let dom = dominant_vectors(&coeffs, 2).unwrap();
        let summary = RunSummary::new(WeatherQuantity::Temperature, &basis, &curve, &coeffs, &dom, None);

        let mut a = Vec::new();
        write_json(&summary, &mut a).unwrap();
        let mut b = Vec::new();
        write_json(&summary, &mut b).unwrap();
        assert_eq!(a, b);

        let v: Value = serde_json::from_slice(&a).unwrap();
        let keys: Vec<&str> = {
            let text = std::str::from_utf8(&a).unwrap();
            ["quantity", "n_sites", "threshold_mi", "site_fingerprint", "levels", "dominant", "error_stats"]
                .into_iter()
                .inspect(|k| assert!(text.contains(&format!("\"{k}\""))))
                .collect()
        };
        let positions: Vec<usize> =
            keys.iter().map(|k| std::str::from_utf8(&a).unwrap().find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v["levels"].as_array().unwrap().len(), 3);
        assert!(v["error_stats"].is_null());
        assert_eq!(v["quantity"], "temperature");
        assert_eq!(v["site_fingerprint"].as_str().unwrap().len(), 64);
    }
}
