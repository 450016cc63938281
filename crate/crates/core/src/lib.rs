//! Graph-spectral compression of aviation weather scenes.
//!
//! Weather observations from irregularly placed stations (METAR reports) are
//! turned into scene vectors, one value per station. A proximity graph over the
//! station locations defines a Laplacian whose eigenvectors form an orthonormal,
//! frequency-ordered basis. Scenes are analyzed in that basis to measure how much
//! of their energy the `K` strongest components capture, which basis vectors
//! dominate, and how well a sparse representation reconstructs the scene.
//!
//! The pipeline, module by module:
//!
//! ```text
//! ingest  -> scene  -> geo  -> spectral -> compress -> report
//!  (METAR,   (site     (graph,  (eigen-     (levels,    (CSV, GeoJSON,
//!   CSV)      index)    Laplacian) basis)    sparse x*)  JSON summary)
//!                                   \-> persistence (.gsb basis files)
//! ```
//!
//! Runnable walkthroughs for every stage live under `examples/`:
//!
//! ```bash
//! cargo run --release --example compressibility
//! ```

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compress;
pub mod fmt;
pub mod geo;
pub mod ingest;
pub mod persistence;
pub mod report;
pub mod scene;
pub mod spectral;
pub mod synthetic;

pub use compress::{
    analyze, classification_stats, compressibility_curve, compressibility_level, dominant_vectors, ensemble_stats,
    reconstruct_categorical, reconstruction_error_stats, synthesize, top_k, ClassificationStats, CompressError,
    CompressibilityCurve, EnsembleStats, ErrorStats, SparseApproximation, SpectralCoefficients,
};
pub use geo::{
    build_graph, connected_components, haversine_mi, laplacian, GeoPoint, GraphError, LaplacianMatrix, ProximityGraph,
    DEFAULT_THRESHOLD_MI,
};
pub use ingest::{
    derive_flight_category, filter_observations, join_locations, parse_awc_csv, parse_metar_text, BoundingBox,
    ColumnMapping, FlightCategory, IngestError, IngestReport, PartialObservation, StationObservation, StationTable,
    TimeWindow,
};
pub use persistence::{load_basis, save_basis, PersistError};
pub use scene::{build_scene, Fingerprint, SceneError, SceneVector, Site, SiteIndex, WeatherQuantity};
pub use spectral::{eigendecompose, verify_basis, BasisDiagnostics, GraphSpectralBasis, SpectralError};
