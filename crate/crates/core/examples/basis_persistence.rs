//! Save a basis, load it back bit-for-bit, and watch the loader reject a
//! damaged file and a scene over different stations.
//!
//!     cargo run --example basis_persistence

use wxspectral::geo::{build_graph, laplacian};
use wxspectral::persistence::{decode_basis, encode_basis, HEADER_LEN};
use wxspectral::synthetic::random_sites;
use wxspectral::{analyze, eigendecompose, load_basis, save_basis, SceneVector, WeatherQuantity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites = random_sites(120, (30.0, 45.0), (-110.0, -80.0), 3);
    let basis = eigendecompose(&laplacian(&build_graph(&sites, 150.0)?), &sites, 150.0)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("basis.gsb");
    let bytes = save_basis(&basis, &sites, &path)?;
    println!("wrote {} ({bytes} bytes, header {HEADER_LEN})", path.display());

    let (loaded, loaded_sites) = load_basis(&path)?;
    let same = loaded.eigenvectors().iter().zip(basis.eigenvectors()).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("reloaded n = {}, fingerprint {}, bit-identical: {same}", loaded.n(), loaded_sites.fingerprint());

    let mut damaged = encode_basis(&basis, &sites)?;
    damaged[HEADER_LEN + 10] ^= 0x20;
    println!("flipped a site-table bit: {}", decode_basis(&damaged).unwrap_err());
    println!("cut the file short: {}", decode_basis(&damaged[..1000]).unwrap_err());

    let elsewhere = random_sites(120, (30.0, 45.0), (-110.0, -80.0), 4);
    let scene = SceneVector::new(WeatherQuantity::Temperature, &elsewhere, vec![0.5; 120])?;
    println!("scene over other stations: {}", analyze(&loaded, &scene).unwrap_err());
    Ok(())
}
