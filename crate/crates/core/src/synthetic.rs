//! Seeded synthetic station layouts and fields for examples, tests and
//! benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geo::EARTH_RADIUS_MI;
use crate::scene::{Site, SiteIndex};

/// `n` distinct sites spread along the equator; useful when only the vertex
/// count matters.
pub fn placeholder_sites(n: usize) -> SiteIndex {
    let step = 359.0 / n.max(1) as f64;
    SiteIndex::new((0..n).map(|i| Site::new(format!("V{i:05}"), 0.0, -179.5 + step * i as f64)).collect())
        .expect("placeholder sites are valid")
}

/// Sites `spacing_mi` apart along the meridian at `lon`, starting at `lat0`.
/// A threshold between `spacing_mi` and `2 * spacing_mi` makes the proximity
/// graph a path.
pub fn sites_along_meridian(n: usize, lat0: f64, lon: f64, spacing_mi: f64) -> SiteIndex {
    let step_deg = (spacing_mi / EARTH_RADIUS_MI).to_degrees();
    SiteIndex::new((0..n).map(|i| Site::new(format!("P{i:05}"), lat0 + step_deg * i as f64, lon)).collect())
        .expect("meridian sites are valid")
}

/// Uniformly scattered sites inside a lat/lon rectangle.
pub fn random_sites(n: usize, lat: (f64, f64), lon: (f64, f64), seed: u64) -> SiteIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SiteIndex::new(
        (0..n)
            .map(|i| Site::new(format!("R{i:05}"), rng.random_range(lat.0..lat.1), rng.random_range(lon.0..lon.1)))
            .collect(),
    )
    .expect("random sites are valid")
}

/// Large-scale field: an offset, a linear latitude/longitude gradient and one
/// long-wavelength sinusoid across longitude.
pub fn smooth_field(sites: &SiteIndex) -> Vec<f64> {
    sites
        .sites()
        .iter()
        .map(|s| {
            5.0 + 0.8 * (s.latitude - 35.0) - 0.3 * (s.longitude + 95.0)
                + 4.0 * (std::f64::consts::TAU * s.longitude / 40.0).sin()
        })
        .collect()
}

/// Independent standard-normal values.
pub fn iid_normal_field<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
