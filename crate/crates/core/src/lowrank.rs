//! Low-rank representation.
//!
//! [`solve_lrr`] approximately solves
//!
//! ```text
//! min ‖C‖_* + λ‖E‖   s.t.  Y = Y C + E
//! ```
//!
//! by inexact ALM on the split problem with `C = J`:
//!
//! ```text
//! J ← svt(C + Λ₂/μ, 1/μ)
//! C ← (I + YᵀY)⁻¹ (YᵀY − YᵀE + J + (YᵀΛ₁ − Λ₂)/μ)
//! E ← prox_{λ/μ}(Y − YC + Λ₁/μ)
//! Λ₁ ← Λ₁ + μ(Y − YC − E),  Λ₂ ← Λ₂ + μ(C − J),  μ ← min(ρμ, μ_max)
//! ```

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::solver::SolverReport;
use crate::sparse::soft_threshold;
use crate::CoefficientMatrix;

/// Error term penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    /// Sum of column norms; models sample-specific corruption.
    L21,
    /// Entrywise absolute sum; models sparse random corruption.
    L1,
    /// Squared Frobenius norm; models dense Gaussian noise.
    Fro,
}

impl std::str::FromStr for ErrorNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l21" | "l2,1" => Ok(ErrorNorm::L21),
            "l1" => Ok(ErrorNorm::L1),
            "fro" | "frobenius" => Ok(ErrorNorm::Fro),
            other => Err(Error::invalid(format!("unknown error norm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrrConfig {
    pub lambda: f64,
    pub error_norm: ErrorNorm,
    pub mu_init: f64,
    pub rho: f64,
    pub mu_max: f64,
    pub constraint_tol: f64,
    pub max_iterations: usize,
    /// Upper bound on the rank of `C`; enables truncated SVD in the
    /// thresholding step.
    pub rank_bound: Option<usize>,
}

impl Default for LrrConfig {
    fn default() -> Self {
        LrrConfig {
            lambda: 1.0,
            error_norm: ErrorNorm::L21,
            mu_init: 1e-2,
            rho: 1.5,
            mu_max: 1e10,
            constraint_tol: 1e-7,
            max_iterations: 500,
            rank_bound: None,
        }
    }
}

impl LrrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.rho > 1.0) {
            return Err(Error::invalid(format!("rho must exceed 1, got {}", self.rho)));
        }
        if !(self.mu_init > 0.0 && self.mu_init < self.mu_max) {
            return Err(Error::invalid("need 0 < mu_init < mu_max"));
        }
        if !(self.constraint_tol > 0.0) {
            return Err(Error::invalid("constraint_tol must be positive"));
        }
        if self.rank_bound == Some(0) {
            return Err(Error::invalid("rank bound must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LrrSolution {
    pub c: CoefficientMatrix,
    pub e: DMatrix<f64>,
    pub report: SolverReport,
}

impl LrrSolution {
    /// Column norms of the error term.
    pub fn error_column_norms(&self) -> Vec<f64> {
        self.e.column_iter().map(|c| c.norm()).collect()
    }
}

/// Singular value thresholding: `U·max(Σ − τ, 0)·Vᵀ`.
pub fn svt(m: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("threshold must be non-negative, got {tau}")));
    }
    svt_full(m, tau).map(|(x, _)| x)
}

/// Thresholded matrix and its nuclear norm.
fn svt_full(m: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, f64)> {
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::Decomposition("SVD"))?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    let mut nuclear = 0.0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk > 0.0 {
            out += u.column(i) * vt.row(i) * shrunk;
            nuclear += shrunk;
        }
    }
    Ok((out, nuclear))
}

/// SVT on a rank-`rank` randomized approximation of `m`.
///
/// Exact whenever `m` has at most `rank` singular values above `tau` and the
/// approximation captures them; the sketch uses a fixed seed.
pub fn svt_truncated(m: &DMatrix<f64>, tau: f64, rank: usize) -> Result<DMatrix<f64>> {
    svt_truncated_full(m, tau, rank).map(|(x, _)| x)
}

fn svt_truncated_full(m: &DMatrix<f64>, tau: f64, rank: usize) -> Result<(DMatrix<f64>, f64)> {
    let (rows, cols) = m.shape();
    let width = (rank + 10).min(rows.min(cols));
    if width >= rows.min(cols) {
        return svt_full(m, tau);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let omega = DMatrix::from_fn(cols, width, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
    let mut q = (m * omega).qr().q();
    for _ in 0..2 {
        q = (m.tr_mul(&q)).qr().q();
        q = (m * q).qr().q();
    }
    let small = q.tr_mul(m);
    let (thresholded, nuclear) = svt_full(&small, tau)?;
    Ok((q * thresholded, nuclear))
}

/// Column-wise shrinkage: column `j` becomes `max(1 − τ/‖m_j‖, 0)·m_j`.
pub fn l21_shrink(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm <= tau {
            col.fill(0.0);
        } else if tau > 0.0 {
            col *= 1.0 - tau / norm;
        }
    }
    out
}

fn error_prox(q: &DMatrix<f64>, norm: ErrorNorm, lambda: f64, mu: f64) -> DMatrix<f64> {
    let tau = lambda / mu;
    match norm {
        ErrorNorm::L21 => l21_shrink(q, tau),
        ErrorNorm::L1 => q.map(|v| soft_threshold(v, tau)),
        // argmin λ‖E‖² + μ/2‖E − Q‖²
        ErrorNorm::Fro => q * (mu / (mu + 2.0 * lambda)),
    }
}

fn error_penalty(e: &DMatrix<f64>, norm: ErrorNorm) -> f64 {
    match norm {
        ErrorNorm::L21 => e.column_iter().map(|c| c.norm()).sum(),
        ErrorNorm::L1 => e.iter().map(|v| v.abs()).sum(),
        ErrorNorm::Fro => e.norm_squared(),
    }
}

/// Solves the LRR program by inexact ALM. On hitting the iteration cap the
/// last iterate is returned with `converged = false`.
pub fn solve_lrr(y: &DataMatrix, cfg: &LrrConfig) -> Result<LrrSolution> {
    cfg.validate()?;
    let n = y.n();
    if n < 2 {
        return Err(Error::invalid("LRR needs at least two samples"));
    }
    let yv = y.values();
    let m = yv.nrows();
    let scale = yv.norm().max(1.0);

    let gram = yv.tr_mul(yv);
    let mut system = &gram + DMatrix::identity(n, n);
    system.fill_lower_triangle_with_upper_triangle();
    let inverse = system
        .cholesky()
        .ok_or(Error::Decomposition("Cholesky of I + YᵀY"))?
        .inverse();

    let mut c = DMatrix::zeros(n, n);
    let mut e = DMatrix::zeros(m, n);
    let mut dual_constraint = DMatrix::zeros(m, n);
    let mut dual_split = DMatrix::zeros(n, n);
    let mut mu = cfg.mu_init;

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut nuclear = 0.0;

    while iterations < cfg.max_iterations {
        iterations += 1;

        let target = &c + &dual_split / mu;
        let (j, nn) = match cfg.rank_bound {
            Some(r) => svt_truncated_full(&target, 1.0 / mu, r)?,
            None => svt_full(&target, 1.0 / mu)?,
        };
        nuclear = nn;

        let rhs = &gram + yv.tr_mul(&(&dual_constraint / mu - &e)) + &j - &dual_split / mu;
        c = &inverse * rhs;

        let yc = yv * &c;
        e = error_prox(&(yv - &yc + &dual_constraint / mu), cfg.error_norm, cfg.lambda, mu);

        let r_constraint = yv - &yc - &e;
        let r_split = &c - &j;
        let rel_constraint = r_constraint.norm() / scale;
        let rel_split = r_split.norm() / scale;
        residual = rel_constraint.max(rel_split);

        dual_constraint += &r_constraint * mu;
        dual_split += &r_split * mu;
        mu = (cfg.rho * mu).min(cfg.mu_max);

        if !residual.is_finite() {
            return Err(Error::NonFinite("LRR iterate"));
        }
        if residual < cfg.constraint_tol {
            converged = true;
            break;
        }
    }

    let objective = nuclear + cfg.lambda * error_penalty(&e, cfg.error_norm);
    Ok(LrrSolution {
        c: CoefficientMatrix(c),
        e,
        report: SolverReport {
            iterations,
            objective,
            residual_norm: residual,
            tolerance: cfg.constraint_tol,
            converged,
        },
    })
}

/// Columns whose norm exceeds `factor` times the median column norm and the
/// absolute `floor`. The floor keeps round-off in an otherwise zero error
/// term from being reported.
pub fn outlier_columns(e: &DMatrix<f64>, factor: f64, floor: f64) -> Vec<usize> {
    let norms: Vec<f64> = e.column_iter().map(|c| c.norm()).collect();
    if norms.is_empty() {
        return Vec::new();
    }
    let threshold = (factor * median(&norms)).max(floor);
    norms
        .iter()
        .enumerate()
        .filter_map(|(j, &v)| (v > threshold).then_some(j))
        .collect()
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Minimum-nuclear-norm exact self-representation `V_r V_rᵀ` from the skinny
/// SVD of `y` (the shape interaction matrix).
pub fn shape_interaction(y: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    let svd = y
        .clone()
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or(Error::Decomposition("SVD"))?;
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .collect();
    let vr = vt.select_rows(&keep);
    Ok(vr.tr_mul(&vr))
}
