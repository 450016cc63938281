//! Eigendecompose a graph Laplacian and check the result: first against the
//! closed-form path spectrum, then on a 400-station random layout.
//!
//!     cargo run --release --example spectral_basis

use std::f64::consts::PI;
use std::time::Instant;

use wxspectral::geo::{build_graph, laplacian};
use wxspectral::synthetic::{random_sites, sites_along_meridian};
use wxspectral::{eigendecompose, verify_basis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Stations 50 mi apart on a meridian form a path under a 70 mi threshold.
    let n = 8;
    let sites = sites_along_meridian(n, 35.0, -100.0, 50.0);
    let basis = eigendecompose(&laplacian(&build_graph(&sites, 70.0)?), &sites, 70.0)?;
    println!("path P{n}: computed vs 2 - 2cos(k pi / n)");
    for (k, got) in basis.eigenvalues().iter().enumerate() {
        let want = 2.0 - 2.0 * (k as f64 * PI / n as f64).cos();
        println!("  k={k}  {got:.15}  {want:.15}");
    }
    println!("  v1 (slowest non-constant mode): {:.3?}", basis.vector(1));

    let sites = random_sites(400, (30.0, 45.0), (-110.0, -80.0), 7);
    let lap = laplacian(&build_graph(&sites, 100.0)?);
    let started = Instant::now();
    let basis = eigendecompose(&lap, &sites, 100.0)?;
    let took = started.elapsed();
    let d = verify_basis(&basis, &lap)?;
    println!("\nrandom layout, n = {}: decomposed in {took:.2?}", basis.n());
    println!("  components {} / zero eigenvalues {}", d.component_count, d.zero_eigenvalue_count);
    println!("  orthonormality defect {:.2e}", d.orthonormality_defect);
    println!("  max residual {:.2e} (bound {:.2e})", d.max_residual, d.residual_bound);
    println!("  smallest eigenvalues {:.4?}", &basis.eigenvalues()[..6]);
    println!("  checks {}", if d.passed() { "passed" } else { "FAILED" });
    Ok(())
}
