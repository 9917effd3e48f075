//! Out-of-sample assignment.
//!
//! A new sample `x̄` is coded over the clustered in-sample dictionary `X`
//! (ridge or ℓ1), and assigned to the class `j` minimizing
//!
//! ```text
//! r_j = ‖x̄ − X δ_j(c̄)‖₂ / ‖δ_j(c̄)‖₂      (regularized)
//! r_j = ‖x̄ − X δ_j(c̄)‖₂                  (plain)
//! ```
//!
//! where `δ_j` keeps only the coefficients of class-`j` columns. A class
//! whose kept coefficients are all zero gets `r_j = +∞`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::ClusterAssignment;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::sparse::{squared_spectral_norm, LassoSolver, SparseCode, SparseSelfRepConfig};

/// Ridge parameter used when none is given.
pub const DEFAULT_GAMMA: f64 = 1e-6;

/// How out-of-sample points are coded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Coding {
    /// Closed-form `(XᵀX + γI)⁻¹Xᵀx̄`.
    Ridge,
    /// LASSO over `X` with the given settings.
    Sparse(SparseSelfRepConfig),
}

/// Result of assigning one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub label: usize,
    pub residuals: Vec<f64>,
    pub coefficients: DVector<f64>,
}

/// Labeled in-sample dictionary with the ridge projector cached.
#[derive(Debug, Clone)]
pub struct ClassDictionary {
    x: DataMatrix,
    labels: ClusterAssignment,
    gamma: f64,
    /// `p × m`, solves `(XᵀX + γI) P = Xᵀ`.
    projector: DMatrix<f64>,
    gram: DMatrix<f64>,
    sigma_sq: f64,
}

impl ClassDictionary {
    /// Factors `XᵀX + γI` once (Cholesky) and caches the projector.
    pub fn build(x: DataMatrix, labels: ClusterAssignment, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if labels.len() != x.n() {
            return Err(Error::mismatch(format!(
                "{} labels for {} dictionary columns",
                labels.len(),
                x.n()
            )));
        }
        let xv = x.values();
        let mut gram = xv.tr_mul(xv);
        gram.fill_lower_triangle_with_upper_triangle();
        let mut system = gram.clone();
        for i in 0..system.nrows() {
            system[(i, i)] += gamma;
        }
        let chol: Cholesky<f64, Dyn> = system
            .cholesky()
            .ok_or(Error::Decomposition("Cholesky of XᵀX + γI"))?;
        let projector = chol.solve(&xv.transpose());
        if projector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ridge projector"));
        }
        let sigma_sq = squared_spectral_norm(xv);
        Ok(ClassDictionary {
            x,
            labels,
            gamma,
            projector,
            gram,
            sigma_sq,
        })
    }

    pub fn x(&self) -> &DataMatrix {
        &self.x
    }

    pub fn labels(&self) -> &ClusterAssignment {
        &self.labels
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn k(&self) -> usize {
        self.labels.k()
    }

    fn check_len(&self, xbar: &DVector<f64>) -> Result<()> {
        if xbar.len() != self.x.m() {
            return Err(Error::mismatch(format!(
                "sample has dimension {}, dictionary has {}",
                xbar.len(),
                self.x.m()
            )));
        }
        Ok(())
    }

    /// Collaborative (ridge) code `P x̄`.
    pub fn ridge_code(&self, xbar: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(xbar)?;
        Ok(&self.projector * xbar)
    }

    /// ℓ1 code over the dictionary, stopping once the fit residual is at most
    /// `delta`.
    pub fn sparse_code(&self, xbar: &DVector<f64>, delta: f64, cfg: &SparseSelfRepConfig) -> Result<SparseCode> {
        self.check_len(xbar)?;
        let cfg = SparseSelfRepConfig { delta, ..*cfg };
        cfg.validate()?;
        let solver = LassoSolver::from_parts(self.x.values(), Some(&self.gram), self.sigma_sq);
        Ok(solver.solve(xbar, &cfg, None))
    }

    fn code(&self, xbar: &DVector<f64>, coding: &Coding) -> Result<DVector<f64>> {
        match coding {
            Coding::Ridge => self.ridge_code(xbar),
            Coding::Sparse(cfg) => Ok(self.sparse_code(xbar, cfg.delta, cfg)?.coefficients),
        }
    }

    /// Per-class residuals of `x̄` under code `c̄`.
    pub fn class_residuals(&self, xbar: &DVector<f64>, c: &DVector<f64>, regularized: bool) -> Result<Vec<f64>> {
        self.check_len(xbar)?;
        if c.len() != self.x.n() {
            return Err(Error::mismatch(format!(
                "code has length {}, dictionary has {} columns",
                c.len(),
                self.x.n()
            )));
        }
        let k = self.k();
        let m = self.x.m();
        let mut partial = vec![DVector::zeros(m); k];
        let mut coef_sq = vec![0.0; k];
        for (i, &l) in self.labels.labels().iter().enumerate() {
            if c[i] != 0.0 {
                partial[l].axpy(c[i], &self.x.values().column(i), 1.0);
                coef_sq[l] += c[i] * c[i];
            }
        }
        Ok(partial
            .iter()
            .zip(&coef_sq)
            .map(|(rec, &sq)| {
                if sq == 0.0 {
                    return f64::INFINITY;
                }
                let r = (xbar - rec).norm();
                if regularized {
                    r / sq.sqrt()
                } else {
                    r
                }
            })
            .collect())
    }

    /// Code, score every class, take the argmin (lowest index on ties).
    pub fn assign(&self, xbar: &DVector<f64>, coding: &Coding, regularized: bool) -> Result<Assignment> {
        let coefficients = self.code(xbar, coding)?;
        let residuals = self.class_residuals(xbar, &coefficients, regularized)?;
        let label = argmin(&residuals).ok_or(Error::Unassignable)?;
        Ok(Assignment {
            label,
            residuals,
            coefficients,
        })
    }

    /// Assigns every column of `xbar`. Columns are processed in parallel;
    /// failures are collected with their column indices.
    pub fn assign_batch(&self, xbar: &DataMatrix, coding: &Coding, regularized: bool) -> Result<ClusterAssignment> {
        let codes = self.code_batch(xbar, coding)?;
        self.classify_codes(xbar, &codes, regularized)
    }

    /// Codes for every column of `xbar`.
    pub fn code_batch(&self, xbar: &DataMatrix, coding: &Coding) -> Result<Vec<DVector<f64>>> {
        if xbar.n() > 0 && xbar.m() != self.x.m() {
            return Err(Error::mismatch(format!(
                "samples have dimension {}, dictionary has {}",
                xbar.m(),
                self.x.m()
            )));
        }
        let results: Vec<Result<DVector<f64>>> = (0..xbar.n())
            .into_par_iter()
            .map(|j| self.code(&xbar.column(j), coding))
            .collect();
        collect_columns(results)
    }

    /// Sparse codes with their solver reports for every column of `xbar`.
    pub fn sparse_code_batch(&self, xbar: &DataMatrix, cfg: &SparseSelfRepConfig) -> Result<Vec<SparseCode>> {
        if xbar.n() > 0 && xbar.m() != self.x.m() {
            return Err(Error::mismatch(format!(
                "samples have dimension {}, dictionary has {}",
                xbar.m(),
                self.x.m()
            )));
        }
        let results: Vec<Result<SparseCode>> = (0..xbar.n())
            .into_par_iter()
            .map(|j| self.sparse_code(&xbar.column(j), cfg.delta, cfg))
            .collect();
        collect_columns(results)
    }

    /// Labels from precomputed codes (one per column of `xbar`).
    pub fn classify_codes(&self, xbar: &DataMatrix, codes: &[DVector<f64>], regularized: bool) -> Result<ClusterAssignment> {
        if codes.len() != xbar.n() {
            return Err(Error::mismatch(format!("{} codes for {} samples", codes.len(), xbar.n())));
        }
        let results: Vec<Result<usize>> = (0..xbar.n())
            .into_par_iter()
            .map(|j| {
                let r = self.class_residuals(&xbar.column(j), &codes[j], regularized)?;
                argmin(&r).ok_or(Error::Unassignable)
            })
            .collect();
        ClusterAssignment::new(collect_columns(results)?, self.k())
    }
}

fn collect_columns<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut ok = Vec::with_capacity(results.len());
    let mut failed = Vec::new();
    for (j, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failed.push((j, e)),
        }
    }
    if failed.is_empty() {
        Ok(ok)
    } else {
        Err(Error::Columns(failed))
    }
}

/// Index of the smallest finite value; ties go to the lowest index.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
