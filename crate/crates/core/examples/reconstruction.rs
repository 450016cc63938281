//! Rebuild scenes from K-sparse approximations: a continuous field scored by
//! absolute error, and a binary VFR/non-VFR map scored by accuracy.
//!
//!     cargo run --release --example reconstruction

use wxspectral::compress::{classification_stats, reconstruct_categorical, reconstruction_error_stats, synthesize};
use wxspectral::geo::{build_graph, laplacian};
use wxspectral::synthetic::{random_sites, smooth_field};
use wxspectral::{analyze, eigendecompose, top_k, SceneVector, WeatherQuantity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites = random_sites(600, (30.0, 45.0), (-110.0, -80.0), 21);
    let basis = eigendecompose(&laplacian(&build_graph(&sites, 110.0)?), &sites, 110.0)?;

    let temps = SceneVector::new(WeatherQuantity::Temperature, &sites, smooth_field(&sites))?;
    let coeffs = analyze(&basis, &temps)?;
    println!("temperature-like field, n = {}", basis.n());
    for k in [5, 10, 25, 50, 100] {
        let estimate = synthesize(&basis, &top_k(&coeffs, k)?)?;
        let stats = reconstruction_error_stats(temps.values(), &estimate, &[2.0, 5.0])?;
        println!(
            "  K={k:>3}: within 2: {:5.1}%  within 5: {:5.1}%  max error {:.2}",
            100.0 * stats.fractions[0].1,
            100.0 * stats.fractions[1].1,
            stats.max_abs_error
        );
    }

    // A band of low ceilings along the northern part of the domain.
    let flags: Vec<f64> = sites.sites().iter().map(|s| f64::from(s.latitude > 41.0 && s.longitude > -100.0)).collect();
    let categories = SceneVector::new(WeatherQuantity::FlightCategory, &sites, flags)?;
    let coeffs = analyze(&basis, &categories)?;
    println!("binary flight-category map, {} non-VFR sites", categories.values().iter().sum::<f64>());
    for k in [10, 50, 100, 200] {
        let estimate = reconstruct_categorical(&basis, &top_k(&coeffs, k)?, categories.norm())?;
        let stats = classification_stats(categories.values(), &estimate)?;
        println!("  K={k:>3}: accuracy {:.3}  non-VFR recall {:.3}", stats.accuracy, stats.recall.unwrap_or(f64::NAN));
    }
    Ok(())
}
