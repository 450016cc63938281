//! Sparse representation of scenes in a graph-spectral basis.
//!
//! For an orthonormal basis `F` the coefficients are `ŝ = Fᵀx`. Keeping the `K`
//! largest-magnitude coefficients gives the best `K`-term approximation
//! `x* = F s*`, and the `K`-compressibility level is the fraction of scene
//! energy it retains, `‖s*‖² / ‖ŝ‖²`.

use thiserror::Error;

use crate::scene::{Fingerprint, SceneVector};
use crate::spectral::GraphSpectralBasis;

#[derive(Debug, Error)]
pub enum CompressError {
    #[error("basis was built for sites {basis}, scene is over sites {scene}")]
    Compatibility { basis: Fingerprint, scene: Fingerprint },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("compressibility level is undefined for a zero-energy scene")]
    ZeroEnergy,
    #[error("sparse reconstruction is identically zero but the original scene is not")]
    DegenerateReconstruction,
}

/// Scene coordinates in the full basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    site_fingerprint: Fingerprint,
    coeffs: Vec<f64>,
    total_energy: f64,
}

impl SpectralCoefficients {
    pub fn new(site_fingerprint: Fingerprint, coeffs: Vec<f64>) -> Self {
        let total_energy = coeffs.iter().map(|c| c * c).sum();
        SpectralCoefficients { site_fingerprint, coeffs, total_energy }
    }

    pub fn site_fingerprint(&self) -> Fingerprint {
        self.site_fingerprint
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `‖ŝ‖₂²`.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// Basis indices by descending magnitude, ties by ascending index.
    pub fn magnitude_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.coeffs.len()).collect();
        // Stable sort over ascending indices keeps the tie-break.
        order.sort_by(|&a, &b| self.coeffs[b].abs().total_cmp(&self.coeffs[a].abs()));
        order
    }

    fn check_k(&self, k: usize) -> Result<(), CompressError> {
        if k > self.coeffs.len() {
            return Err(CompressError::Argument(format!("k = {k} exceeds basis size {}", self.coeffs.len())));
        }
        Ok(())
    }
}

/// The retained coefficients of a `K`-sparse approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseApproximation {
    k: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseApproximation {
    pub fn k(&self) -> usize {
        self.k
    }

    /// `(basis index, coefficient)` by descending magnitude.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|(_, c)| c * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompressibilityCurve {
    points: Vec<(usize, f64)>,
}

impl CompressibilityCurve {
    /// `(K, L)` pairs, `K` strictly increasing.
    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn level_at(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|(kk, _)| *kk == k).map(|(_, l)| *l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub k: usize,
    pub mean_level: f64,
    pub min_level: f64,
    pub scene_count: usize,
}

/// Fraction of sites within each absolute-error threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorStats {
    /// `(threshold, fraction of sites with |x − x̂| ≤ threshold)`.
    pub fractions: Vec<(f64, f64)>,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationStats {
    pub accuracy: f64,
    /// Share of true 1's (non-VFR sites) reproduced; absent with no positives.
    pub recall: Option<f64>,
}

/// `ŝ = Fᵀx`.
pub fn analyze(basis: &GraphSpectralBasis, scene: &SceneVector) -> Result<SpectralCoefficients, CompressError> {
    if basis.site_fingerprint() != scene.site_fingerprint() {
        return Err(CompressError::Compatibility { basis: basis.site_fingerprint(), scene: scene.site_fingerprint() });
    }
    let x = scene.values();
    if x.len() != basis.n() {
        return Err(CompressError::Argument(format!("scene length {} vs basis size {}", x.len(), basis.n())));
    }
    let coeffs = (0..basis.n()).map(|k| basis.vector(k).iter().zip(x).map(|(v, xi)| v * xi).sum()).collect();
    Ok(SpectralCoefficients::new(basis.site_fingerprint(), coeffs))
}

/// The `k` largest-magnitude coefficients.
pub fn top_k(coeffs: &SpectralCoefficients, k: usize) -> Result<SparseApproximation, CompressError> {
    coeffs.check_k(k)?;
    let entries = coeffs.magnitude_order().into_iter().take(k).map(|i| (i, coeffs.coeffs[i])).collect();
    Ok(SparseApproximation { k, entries })
}

fn sorted_prefix_energy(coeffs: &SpectralCoefficients) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(coeffs.len() + 1);
    let mut acc = 0.0;
    prefix.push(acc);
    for i in coeffs.magnitude_order() {
        acc += coeffs.coeffs[i] * coeffs.coeffs[i];
        prefix.push(acc);
    }
    prefix
}

fn level_from(prefix: &[f64], total: f64, k: usize) -> f64 {
    (prefix[k] / total).min(1.0)
}

/// `L(k) = ‖s*‖² / ‖ŝ‖²`.
pub fn compressibility_level(coeffs: &SpectralCoefficients, k: usize) -> Result<f64, CompressError> {
    coeffs.check_k(k)?;
    if coeffs.total_energy <= 0.0 {
        return Err(CompressError::ZeroEnergy);
    }
    Ok(level_from(&sorted_prefix_energy(coeffs), coeffs.total_energy, k))
}

/// Levels at each `k` in `ks`, which must be strictly increasing.
pub fn compressibility_curve(
    coeffs: &SpectralCoefficients,
    ks: &[usize],
) -> Result<CompressibilityCurve, CompressError> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CompressError::Argument("k list must be strictly increasing".into()));
    }
    if let Some(&last) = ks.last() {
        coeffs.check_k(last)?;
    }
    if coeffs.total_energy <= 0.0 {
        return Err(CompressError::ZeroEnergy);
    }
    let prefix = sorted_prefix_energy(coeffs);
    let points = ks.iter().map(|&k| (k, level_from(&prefix, coeffs.total_energy, k))).collect();
    Ok(CompressibilityCurve { points })
}

/// `x* = Σ c · v_index`.
pub fn synthesize(basis: &GraphSpectralBasis, sparse: &SparseApproximation) -> Result<Vec<f64>, CompressError> {
    let n = basis.n();
    let mut x = vec![0.0; n];
    for &(idx, c) in &sparse.entries {
        if idx >= n {
            return Err(CompressError::Argument(format!("basis index {idx} out of range for size {n}")));
        }
        for (xi, vi) in x.iter_mut().zip(basis.vector(idx)) {
            *xi += c * vi;
        }
    }
    Ok(x)
}

/// Binary reconstruction: rescale the sparse synthesis to the original norm,
/// round half up and clamp into `{0, 1}`.
pub fn reconstruct_categorical(
    basis: &GraphSpectralBasis,
    sparse: &SparseApproximation,
    original_norm: f64,
) -> Result<Vec<f64>, CompressError> {
    if !(original_norm >= 0.0) {
        return Err(CompressError::Argument(format!("original norm {original_norm} is negative")));
    }
    let y = synthesize(basis, sparse)?;
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        if original_norm == 0.0 {
            return Ok(y);
        }
        return Err(CompressError::DegenerateReconstruction);
    }
    let alpha = original_norm / norm;
    Ok(y.into_iter().map(|v| (alpha * v + 0.5).floor().clamp(0.0, 1.0)).collect())
}

/// Indices of the `count` strongest components, strongest first.
pub fn dominant_vectors(coeffs: &SpectralCoefficients, count: usize) -> Result<Vec<usize>, CompressError> {
    coeffs.check_k(count)?;
    let mut order = coeffs.magnitude_order();
    order.truncate(count);
    Ok(order)
}

pub fn reconstruction_error_stats(
    original: &[f64],
    reconstructed: &[f64],
    thresholds: &[f64],
) -> Result<ErrorStats, CompressError> {
    if original.len() != reconstructed.len() {
        return Err(CompressError::Argument(format!("length mismatch: {} vs {}", original.len(), reconstructed.len())));
    }
    if original.is_empty() {
        return Err(CompressError::Argument("empty scene".into()));
    }
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(CompressError::Argument(format!("threshold {t} is negative")));
    }
    let errors: Vec<f64> = original.iter().zip(reconstructed).map(|(a, b)| (a - b).abs()).collect();
    let n = errors.len() as f64;
    let fractions = thresholds.iter().map(|&t| (t, errors.iter().filter(|e| **e <= t).count() as f64 / n)).collect();
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(ErrorStats { fractions, max_abs_error })
}

pub fn classification_stats(truth: &[f64], predicted: &[f64]) -> Result<ClassificationStats, CompressError> {
    if truth.len() != predicted.len() {
        return Err(CompressError::Argument(format!("length mismatch: {} vs {}", truth.len(), predicted.len())));
    }
    if truth.is_empty() {
        return Err(CompressError::Argument("empty scene".into()));
    }
    if truth.iter().chain(predicted).any(|v| *v != 0.0 && *v != 1.0) {
        return Err(CompressError::Argument("classification inputs must be 0 or 1".into()));
    }
    let matches = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    let positives = truth.iter().filter(|v| **v == 1.0).count();
    let hits = truth.iter().zip(predicted).filter(|(a, b)| **a == 1.0 && **b == 1.0).count();
    Ok(ClassificationStats {
        accuracy: matches as f64 / truth.len() as f64,
        recall: (positives > 0).then(|| hits as f64 / positives as f64),
    })
}

/// Mean and minimum `L(k)` over an ensemble of scenes.
pub fn ensemble_stats(scenes: &[SpectralCoefficients], k: usize) -> Result<EnsembleStats, CompressError> {
    if scenes.is_empty() {
        return Err(CompressError::Argument("empty ensemble".into()));
    }
    let levels = scenes.iter().map(|c| compressibility_level(c, k)).collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleStats {
        k,
        mean_level: levels.iter().sum::<f64>() / levels.len() as f64,
        min_level: levels.iter().copied().fold(f64::INFINITY, f64::min),
        scene_count: levels.len(),
    })
}
