//! Compressibility curves: a spatially smooth field against i.i.d. noise on
//! the same 500-station graph, plus the ensemble level over many noise draws.
//!
//!     cargo run --release --example compressibility

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wxspectral::compress::{compressibility_curve, ensemble_stats};
use wxspectral::geo::{build_graph, laplacian};
use wxspectral::synthetic::{iid_normal_field, random_sites, smooth_field};
use wxspectral::{analyze, dominant_vectors, eigendecompose, SceneVector, WeatherQuantity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites = random_sites(500, (30.0, 45.0), (-110.0, -80.0), 8);
    let basis = eigendecompose(&laplacian(&build_graph(&sites, 120.0)?), &sites, 120.0)?;
    let scene = |values| SceneVector::new(WeatherQuantity::Temperature, &sites, values);

    let ks = [1, 5, 10, 25, 50, 100, 250, 500];
    let smooth = analyze(&basis, &scene(smooth_field(&sites))?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise = analyze(&basis, &scene(iid_normal_field(500, &mut rng))?)?;
    let smooth_curve = compressibility_curve(&smooth, &ks)?;
    let noise_curve = compressibility_curve(&noise, &ks)?;

    println!("{:>5} {:>8} {:>8} {:>8}", "K", "smooth", "noise", "K/N");
    for ((k, s), (_, r)) in smooth_curve.points().iter().zip(noise_curve.points()) {
        println!("{k:>5} {s:>8.4} {r:>8.4} {:>8.4}", *k as f64 / 500.0);
    }
    println!("smooth field's dominant basis indices: {:?}", dominant_vectors(&smooth, 6)?);

    let draws = (0..200)
        .map(|_| analyze(&basis, &scene(iid_normal_field(500, &mut rng))?).map_err(Into::into))
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let stats = ensemble_stats(&draws, 25)?;
    println!(
        "noise ensemble ({} draws): mean L(25) = {:.4}, min {:.4}",
        stats.scene_count, stats.mean_level, stats.min_level
    );
    Ok(())
}
