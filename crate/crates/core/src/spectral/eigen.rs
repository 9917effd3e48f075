use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ITERATIVE_MAX_ITERATIONS: usize = 3000;
const ITERATIVE_TOL: f64 = 1e-10;

/// Bottom eigenpairs of a Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// `n × k`, orthonormal columns.
    pub vectors: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

impl SpectralEmbedding {
    /// Rows scaled to unit length; all-zero rows stay zero.
    pub fn row_normalized(&self) -> DMatrix<f64> {
        let mut v = self.vectors.clone();
        for mut row in v.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenSolver {
    /// Full symmetric eigendecomposition.
    #[default]
    Dense,
    /// Block subspace iteration with Rayleigh–Ritz on `2I − L`; only the
    /// bottom of the spectrum is computed.
    Iterative,
}

/// The `k` eigenpairs of `½(L + Lᵀ)` with the smallest eigenvalues.
pub fn smallest_eigenvectors(l: &DMatrix<f64>, k: usize, solver: EigenSolver) -> Result<SpectralEmbedding> {
    if !l.is_square() {
        return Err(Error::mismatch("Laplacian must be square"));
    }
    let n = l.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let sym = (l + l.transpose()) * 0.5;
    match solver {
        EigenSolver::Dense => dense(sym, k),
        EigenSolver::Iterative if 2 * k + 8 >= n => dense(sym, k),
        EigenSolver::Iterative => iterative(&sym, k),
    }
}

fn dense(sym: DMatrix<f64>, k: usize) -> Result<SpectralEmbedding> {
    let n = sym.nrows();
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::Decomposition("eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    // ties keep the solver's order, so the result is deterministic
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = &order[..k];
    Ok(SpectralEmbedding {
        vectors: eig.eigenvectors.select_columns(keep),
        eigenvalues: keep.iter().map(|&i| eig.eigenvalues[i]).collect(),
    })
}

fn iterative(sym: &DMatrix<f64>, k: usize) -> Result<SpectralEmbedding> {
    let n = sym.nrows();
    let block = (2 * k + 8).min(n);
    // Eigenvalues of a normalized Laplacian lie in [0, 2]; the shift makes the
    // wanted end of the spectrum dominant.
    let mut shifted = -sym.clone();
    for i in 0..n {
        shifted[(i, i)] += 2.0;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x01a2_c305);
    let mut q = DMatrix::from_fn(n, block, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng)).qr().q();

    for _ in 0..ITERATIVE_MAX_ITERATIONS {
        let z = &shifted * &q;
        let small = q.tr_mul(&z);
        let small = (&small + small.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(small, f64::EPSILON, 0).ok_or(Error::Decomposition("Ritz eigenproblem"))?;
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let ritz_vectors = &q * eig.eigenvectors.select_columns(&order);
        let ritz_values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

        let az = &shifted * ritz_vectors.columns(0, k);
        let worst = (0..k)
            .map(|j| (az.column(j) - ritz_vectors.column(j) * ritz_values[j]).norm())
            .fold(0.0, f64::max);
        if worst <= ITERATIVE_TOL {
            return Ok(SpectralEmbedding {
                vectors: ritz_vectors.columns(0, k).into_owned(),
                eigenvalues: ritz_values[..k].iter().map(|t| 2.0 - t).collect(),
            });
        }
        q = (&shifted * ritz_vectors).qr().q();
    }
    Err(Error::Decomposition("iterative eigensolver"))
}
