//! Spectral clustering of a coefficient matrix: affinity `|C| + |C|ᵀ`,
//! normalized Laplacian, bottom eigenvectors, k-means on embedding rows.

mod eigen;
mod kmeans;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};
use crate::CoefficientMatrix;

pub use eigen::{smallest_eigenvectors, EigenSolver, SpectralEmbedding};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult};

/// Symmetric, entrywise non-negative similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Wraps a matrix after checking symmetry and non-negativity exactly.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.is_square() {
            return Err(Error::mismatch("affinity matrix must be square"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("affinity entries must be finite and non-negative"));
        }
        if values != values.transpose() {
            return Err(Error::invalid("affinity matrix must be symmetric"));
        }
        Ok(AffinityMatrix(values))
    }

    /// Total edge weight, i.e. the sum of all entries.
    pub fn mass(&self) -> f64 {
        self.0.sum()
    }
}

/// How the embedding rows are scaled before k-means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowNormalization {
    /// Each row of the eigenvector matrix is scaled to unit length.
    #[default]
    Unit,
    /// Rows are used as-is (eigenvectors themselves have unit norm).
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub kmeans: KMeansConfig,
    pub eigen: EigenSolver,
    pub rows: RowNormalization,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            kmeans: KMeansConfig::default(),
            eigen: EigenSolver::Dense,
            rows: RowNormalization::Unit,
        }
    }
}

/// `A = |C| + |C|ᵀ`.
pub fn build_affinity(c: &CoefficientMatrix) -> Result<AffinityMatrix> {
    let c = c.values();
    if !c.is_square() {
        return Err(Error::mismatch(format!(
            "coefficient matrix must be square, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let n = c.nrows();
    // (i, j) and (j, i) are both computed as |c_ij| + |c_ji| in the same order,
    // so the result is symmetric bit for bit.
    Ok(AffinityMatrix(DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        c[(a, b)].abs() + c[(b, a)].abs()
    })))
}

/// `L = I − D^{-1/2} A D^{-1/2}` with `d_i = Σ_j A_ij`. Isolated vertices
/// (`d_i = 0`) get `D^{-1/2}_ii = 0`, so their row is `e_iᵀ`.
pub fn normalized_laplacian(a: &AffinityMatrix) -> DMatrix<f64> {
    let a = a.values();
    let n = a.nrows();
    let inv_sqrt: Vec<f64> = a
        .row_iter()
        .map(|r| {
            let d = r.sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * a[(i, j)] * inv_sqrt[j]
    })
}

/// Full pipeline: affinity, Laplacian, bottom-`k` eigenvectors, k-means.
pub fn spectral_cluster(c: &CoefficientMatrix, k: usize, cfg: &SpectralConfig) -> Result<ClusterAssignment> {
    let a = build_affinity(c)?;
    if a.mass() <= 0.0 {
        return Err(Error::DegenerateAffinity);
    }
    let l = normalized_laplacian(&a);
    let embedding = smallest_eigenvectors(&l, k, cfg.eigen)?;
    let points = match cfg.rows {
        RowNormalization::Unit => embedding.row_normalized(),
        RowNormalization::None => embedding.vectors.clone(),
    };
    Ok(kmeans(&points, k, &cfg.kmeans)?.assignment)
}

/// Share of affinity mass between samples with different labels.
pub fn cross_cluster_mass(a: &AffinityMatrix, labels: &[usize]) -> f64 {
    let v = a.values();
    let total = a.mass();
    if total == 0.0 {
        return 0.0;
    }
    let mut cross = 0.0;
    for j in 0..v.ncols() {
        for i in 0..v.nrows() {
            if labels[i] != labels[j] {
                cross += v[(i, j)];
            }
        }
    }
    cross / total
}
