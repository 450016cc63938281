//! The graph-spectral basis: all eigenpairs of a proximity-graph Laplacian,
//! eigenvalues ascending, eigenvectors orthonormal.

mod tridiag;

use thiserror::Error;

use crate::geo::LaplacianMatrix;
use crate::scene::{Fingerprint, SiteIndex};

/// Eigenvalues at or below this magnitude count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-8;
/// Maximum entry of `|VᵀV − I|` accepted by [`verify_basis`].
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Residual bound factor; the bound is this times `max(1, λ_max)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// QL iterations allowed per eigenvalue before giving up.
pub const MAX_QL_ITERATIONS: usize = 50;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigensolver did not converge for eigenvalue {column} within {iterations} iterations")]
    NoConvergence { column: usize, iterations: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpectralBasis {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column-major: column `k` is the eigenvector of `eigenvalues[k]`.
    eigenvectors: Vec<f64>,
    site_fingerprint: Fingerprint,
    threshold_mi: f64,
}

impl GraphSpectralBasis {
    /// Assemble a basis from raw parts. Only shapes are checked; use
    /// [`verify_basis`] for the numerical invariants.
    pub fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: Vec<f64>,
        site_fingerprint: Fingerprint,
        threshold_mi: f64,
    ) -> Result<Self, SpectralError> {
        let n = eigenvalues.len();
        if eigenvectors.len() != n * n {
            return Err(SpectralError::Dimension(format!(
                "{} eigenvector entries for {n} eigenvalues",
                eigenvectors.len()
            )));
        }
        Ok(GraphSpectralBasis { n, eigenvalues, eigenvectors, site_fingerprint, threshold_mi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector `k` (basis column `k`).
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k * self.n..(k + 1) * self.n]
    }

    /// All eigenvectors, column-major.
    pub fn eigenvectors(&self) -> &[f64] {
        &self.eigenvectors
    }

    pub fn site_fingerprint(&self) -> Fingerprint {
        self.site_fingerprint
    }

    pub fn threshold_mi(&self) -> f64 {
        self.threshold_mi
    }

    /// Number of eigenvalues at or below [`ZERO_EIGENVALUE_TOL`].
    pub fn zero_eigenvalue_count(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() <= ZERO_EIGENVALUE_TOL).count()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Fingerprint, f64) {
        (self.eigenvalues, self.eigenvectors, self.site_fingerprint, self.threshold_mi)
    }
}

/// Full eigendecomposition of `laplacian`.
///
/// Eigenpairs are sorted by ascending eigenvalue (stable, so equal values keep
/// solver order). Each eigenvector is signed so that its largest-magnitude
/// entry, first one on ties, is positive.
pub fn eigendecompose(
    laplacian: &LaplacianMatrix,
    sites: &SiteIndex,
    threshold_mi: f64,
) -> Result<GraphSpectralBasis, SpectralError> {
    let n = laplacian.n();
    if sites.len() != n {
        return Err(SpectralError::Dimension(format!("{n}x{n} Laplacian for {} sites", sites.len())));
    }
    let (values, vectors) = tridiag::symmetric_eigen(laplacian.as_slice(), n, MAX_QL_ITERATIONS)
        .map_err(|column| SpectralError::NoConvergence { column, iterations: MAX_QL_ITERATIONS })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n * n);
    for &k in &order {
        eigenvalues.push(values[k]);
        let col = &vectors[k * n..(k + 1) * n];
        let mut pivot = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        eigenvectors.extend(col.iter().map(|x| sign * x));
    }

    Ok(GraphSpectralBasis { n, eigenvalues, eigenvectors, site_fingerprint: sites.fingerprint(), threshold_mi })
}

/// Measured quality of a basis against its Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDiagnostics {
    /// `max |VᵀV − I|`.
    pub orthonormality_defect: f64,
    /// `max_k ‖H v_k − λ_k v_k‖₂`.
    pub max_residual: f64,
    pub residual_bound: f64,
    pub zero_eigenvalue_count: usize,
    pub component_count: usize,
    pub ascending: bool,
    pub min_eigenvalue: f64,
    /// Human-readable description of every violated invariant.
    pub breaches: Vec<String>,
}

impl BasisDiagnostics {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

pub fn verify_basis(
    basis: &GraphSpectralBasis,
    laplacian: &LaplacianMatrix,
) -> Result<BasisDiagnostics, SpectralError> {
    let n = basis.n();
    if laplacian.n() != n {
        return Err(SpectralError::Dimension(format!("basis of size {n}, Laplacian of size {}", laplacian.n())));
    }

    let mut orthonormality_defect = 0.0f64;
    for a in 0..n {
        let va = basis.vector(a);
        for b in a..n {
            let dot: f64 = va.iter().zip(basis.vector(b)).map(|(x, y)| x * y).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            orthonormality_defect = orthonormality_defect.max((dot - target).abs());
        }
    }

    // Laplacians are sparse; multiply through the nonzero pattern.
    let rows: Vec<Vec<(usize, f64)>> =
        (0..n).map(|i| laplacian.row(i).iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect()).collect();
    let mut max_residual = 0.0f64;
    for k in 0..n {
        let v = basis.vector(k);
        let lambda = basis.eigenvalues()[k];
        let r2: f64 = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let hv: f64 = row.iter().map(|&(j, h)| h * v[j]).sum();
                (hv - lambda * v[i]).powi(2)
            })
            .sum();
        max_residual = max_residual.max(r2.sqrt());
    }

    let values = basis.eigenvalues();
    let lambda_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let residual_bound = RESIDUAL_TOL * lambda_max.max(1.0);
    let ascending = values.windows(2).all(|w| w[0] <= w[1]);
    let min_eigenvalue = values.iter().copied().fold(f64::INFINITY, f64::min);
    let zero_eigenvalue_count = basis.zero_eigenvalue_count();
    let component_count = laplacian.component_count();

    let mut breaches = Vec::new();
    if !ascending {
        breaches.push("eigenvalues are not in ascending order".to_string());
    }
    if n > 0 && values[0] > ZERO_EIGENVALUE_TOL {
        breaches.push(format!("smallest eigenvalue {} is not zero", values[0]));
    }
    if n > 0 && min_eigenvalue < -ZERO_EIGENVALUE_TOL {
        breaches.push(format!("negative eigenvalue {min_eigenvalue}"));
    }
    if orthonormality_defect > ORTHONORMALITY_TOL {
        breaches.push(format!("orthonormality defect {orthonormality_defect:e}"));
    }
    if max_residual > residual_bound {
        breaches.push(format!("eigen-residual {max_residual:e} exceeds {residual_bound:e}"));
    }
    if zero_eigenvalue_count != component_count {
        breaches.push(format!("{zero_eigenvalue_count} zero eigenvalues for {component_count} connected components"));
    }

    Ok(BasisDiagnostics {
        orthonormality_defect,
        max_residual,
        residual_bound,
        zero_eigenvalue_count,
        component_count,
        ascending,
        min_eigenvalue,
        breaches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{laplacian, ProximityGraph};
    use crate::synthetic::placeholder_sites;

    fn basis_of(g: &ProximityGraph) -> (GraphSpectralBasis, LaplacianMatrix) {
        let l = laplacian(g);
        let sites = placeholder_sites(g.n());
        (eigendecompose(&l, &sites, 1.0).unwrap(), l)
    }

    fn path(n: usize) -> ProximityGraph {
        ProximityGraph::from_edges(n, (1..n).map(|i| (i - 1, i)), 1.0)
    }

    #[test]
    fn path_three_spectrum() {
        let (b, _) = basis_of(&path(3));
        for (got, want) in b.eigenvalues().iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_four_spectrum() {
        let (b, l) = basis_of(&ProximityGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)], 1.0));
        for (got, want) in b.eigenvalues().iter().zip([0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(verify_basis(&b, &l).unwrap().passed());
    }

    #[test]
    fn edgeless_graph_all_zero() {
        let (b, l) = basis_of(&ProximityGraph::from_edges(4, [], 1.0));
        assert!(b.eigenvalues().iter().all(|v| *v == 0.0));
        let diag = verify_basis(&b, &l).unwrap();
        assert!(diag.passed(), "{:?}", diag.breaches);
        assert_eq!(diag.zero_eigenvalue_count, 4);
    }

    #[test]
    fn sign_convention_and_constant_mode() {
        let (b, _) = basis_of(&path(6));
        for k in 0..6 {
            let v = b.vector(k);
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = v.iter().position(|x| x.abs() == max).unwrap();
            assert!(v[first] > 0.0);
        }
        let c = 1.0 / 6f64.sqrt();
        assert!(b.vector(0).iter().all(|x| (x - c).abs() < 1e-12));
    }

    #[test]
    fn negated_column_still_passes() {
        let (b, l) = basis_of(&path(5));
        let (vals, mut vecs, fp, t) = b.into_parts();
        for x in &mut vecs[5..10] {
            *x = -*x;
        }
        let flipped = GraphSpectralBasis::from_parts(vals, vecs, fp, t).unwrap();
        assert!(verify_basis(&flipped, &l).unwrap().passed());
    }

    #[test]
    fn swapped_columns_flag_ordering() {
        let (b, l) = basis_of(&path(5));
        let (mut vals, mut vecs, fp, t) = b.into_parts();
        vals.swap(1, 3);
        for i in 0..5 {
            vecs.swap(5 + i, 15 + i);
        }
        let swapped = GraphSpectralBasis::from_parts(vals, vecs, fp, t).unwrap();
        let diag = verify_basis(&swapped, &l).unwrap();
        assert!(!diag.ascending);
        assert!(diag.max_residual < 1e-12);
        assert!(!diag.passed());
    }

    #[test]
    fn dimension_mismatch() {
        let (b, _) = basis_of(&path(3));
        let other = laplacian(&path(4));
        assert!(matches!(verify_basis(&b, &other), Err(SpectralError::Dimension(_))));
        assert!(matches!(eigendecompose(&other, &placeholder_sites(3), 1.0), Err(SpectralError::Dimension(_))));
    }

    #[test]
    fn deterministic_bits() {
        let g = ProximityGraph::from_edges(30, (0..30).flat_map(|i| [(i, (i + 1) % 30), (i, (i + 7) % 30)]), 1.0);
        let (a, _) = basis_of(&g);
        let (b, _) = basis_of(&g);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(a.eigenvalues()), bits(b.eigenvalues()));
        assert_eq!(bits(a.eigenvectors()), bits(b.eigenvectors()));
    }
}
