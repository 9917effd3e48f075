//! ℓ1-regularized coding.
//!
//! Every code minimizes
//!
//! ```text
//! λ‖y − D c‖₂² + ‖c‖₁
//! ```
//!
//! so the effective ℓ1 weight, relative to a unit-weight fidelity term, is
//! `w = 1/λ`, and `c = 0` is optimal exactly when `‖Dᵀy‖_∞ ≤ w/2`.
//!
//! The solver is FISTA with gradient-based momentum restart, followed by an
//! active-set polish that solves the stationarity equations on the detected
//! support and keeps the result only when it is at least as optimal.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::solver::SolverReport;
use crate::CoefficientMatrix;

/// Magnitudes below this are exactly zero in returned codes.
pub const SUPPORT_EPS: f64 = 1e-12;

const POWER_ITERATIONS: usize = 50;
const POWER_TOL: f64 = 1e-8;
const KKT_CHECK_EVERY: usize = 10;

/// Settings for LASSO coding and sparse self-representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseSelfRepConfig {
    /// Weight of the squared fidelity term.
    pub lambda: f64,
    /// Iteration stops once `‖y − D c‖₂ ≤ delta` (disabled when zero).
    pub delta: f64,
    pub max_iterations: usize,
    /// Relative tolerance on the optimality conditions.
    pub kkt_tol: f64,
}

impl Default for SparseSelfRepConfig {
    fn default() -> Self {
        SparseSelfRepConfig {
            lambda: 50.0,
            delta: 1e-3,
            max_iterations: 20_000,
            kkt_tol: 1e-6,
        }
    }
}

impl SparseSelfRepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::invalid(format!("delta must be non-negative, got {}", self.delta)));
        }
        if !(self.kkt_tol > 0.0) {
            return Err(Error::invalid(format!("kkt_tol must be positive, got {}", self.kkt_tol)));
        }
        Ok(())
    }

    /// ℓ1 weight when the fidelity term has unit weight.
    pub fn l1_weight(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// A solved LASSO code.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCode {
    pub coefficients: DVector<f64>,
    /// Indices of the nonzero coefficients, ascending.
    pub support: Vec<usize>,
    pub report: SolverReport,
}

/// Self-representation coefficients with one solver report per column.
#[derive(Debug, Clone)]
pub struct SelfRepresentation {
    pub coefficients: CoefficientMatrix,
    pub reports: Vec<SolverReport>,
}

/// Proximal operator of `tau·|x|`.
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Solves `min λ‖y − D c‖² + ‖c‖₁` over the columns of `dict`.
pub fn solve_lasso(dict: &DataMatrix, y: &DVector<f64>, cfg: &SparseSelfRepConfig) -> Result<SparseCode> {
    cfg.validate()?;
    if dict.m() != y.len() {
        return Err(Error::mismatch(format!(
            "dictionary has {} rows, signal has length {}",
            dict.m(),
            y.len()
        )));
    }
    Ok(LassoSolver::new(dict.values()).solve(y, cfg, None))
}

/// Codes every column of `y` over the remaining columns (`diag(C) = 0`).
///
/// Columns are independent problems and are solved in parallel; the output
/// does not depend on the schedule.
pub fn sparse_self_representation(y: &DataMatrix, cfg: &SparseSelfRepConfig) -> Result<SelfRepresentation> {
    cfg.validate()?;
    let n = y.n();
    if n < 2 {
        return Err(Error::invalid("self-representation needs at least two samples"));
    }
    let solver = LassoSolver::new(y.values());
    let codes: Vec<SparseCode> = (0..n)
        .into_par_iter()
        .map(|i| solver.solve(&y.column(i), cfg, Some(i)))
        .collect();

    let mut c = DMatrix::zeros(n, n);
    let mut reports = Vec::with_capacity(n);
    for (i, code) in codes.into_iter().enumerate() {
        if !code.coefficients.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sparse code").at_column(i));
        }
        c.set_column(i, &code.coefficients);
        reports.push(code.report);
    }
    Ok(SelfRepresentation {
        coefficients: CoefficientMatrix(c),
        reports,
    })
}

/// Largest eigenvalue of `DᵀD` by power iteration.
pub fn squared_spectral_norm(d: &DMatrix<f64>) -> f64 {
    let n = d.ncols();
    if n == 0 || d.nrows() == 0 {
        return 0.0;
    }
    // Fixed, non-symmetric start so no singular vector is missed by accident.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0);
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = d.tr_mul(&(d * &v));
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        let done = (next - estimate).abs() <= POWER_TOL * next;
        estimate = next;
        if done {
            break;
        }
    }
    // The Rayleigh quotient approaches from below.
    estimate * 1.01
}

/// Dictionaries with at most this many atoms get their Gram matrix cached.
const GRAM_MAX_ATOMS: usize = 3000;

/// LASSO solver bound to one dictionary, with its Lipschitz constant and
/// (for moderate sizes) its Gram matrix cached.
pub(crate) struct LassoSolver<'a> {
    dict: &'a DMatrix<f64>,
    gram: Option<Cow<'a, DMatrix<f64>>>,
    sigma_sq: f64,
}

impl<'a> LassoSolver<'a> {
    pub(crate) fn new(dict: &'a DMatrix<f64>) -> Self {
        let gram = (dict.ncols() <= GRAM_MAX_ATOMS).then(|| Cow::Owned(dict.tr_mul(dict)));
        LassoSolver {
            dict,
            gram,
            sigma_sq: squared_spectral_norm(dict),
        }
    }

    /// Reuses a Gram matrix and `‖dict‖₂²` estimate computed elsewhere.
    pub(crate) fn from_parts(dict: &'a DMatrix<f64>, gram: Option<&'a DMatrix<f64>>, sigma_sq: f64) -> Self {
        LassoSolver {
            dict,
            gram: gram.map(Cow::Borrowed),
            sigma_sq,
        }
    }

    /// `DᵀD x`, touching only the atoms where `x` is nonzero.
    fn normal(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.dict;
        match &self.gram {
            Some(g) => {
                let mut out = DVector::zeros(d.ncols());
                for (j, &v) in x.iter().enumerate() {
                    if v != 0.0 {
                        out.axpy(v, &g.column(j), 1.0);
                    }
                }
                out
            }
            None => {
                let mut dx = DVector::zeros(d.nrows());
                for (j, &v) in x.iter().enumerate() {
                    if v != 0.0 {
                        dx.axpy(v, &d.column(j), 1.0);
                    }
                }
                d.tr_mul(&dx)
            }
        }
    }

    /// Solves over the dictionary with column `masked` (if any) held at zero.
    pub(crate) fn solve(&self, y: &DVector<f64>, cfg: &SparseSelfRepConfig, masked: Option<usize>) -> SparseCode {
        let d = self.dict;
        let n = d.ncols();
        let lambda = cfg.lambda;

        let y_norm = y.norm();
        if y_norm == 0.0 || self.sigma_sq == 0.0 || (cfg.delta > 0.0 && y_norm <= cfg.delta) {
            let obj = lambda * y_norm * y_norm;
            let (residual, tol) = if y_norm == 0.0 || self.sigma_sq == 0.0 {
                (0.0, cfg.kkt_tol)
            } else {
                (y_norm, cfg.delta)
            };
            return SparseCode {
                coefficients: DVector::zeros(n),
                support: Vec::new(),
                report: SolverReport {
                    residual_norm: residual,
                    ..SolverReport::trivial(obj, tol)
                },
            };
        }

        let problem = Problem {
            solver: self,
            b: d.tr_mul(y),
            yy: y_norm * y_norm,
            lambda,
            masked,
        };
        let step = 1.0 / (2.0 * lambda * self.sigma_sq);

        let mut x = DVector::zeros(n);
        let mut gx = DVector::zeros(n);
        let mut z = x.clone();
        let mut gz = gx.clone();
        let mut t = 1.0f64;

        let mut best = (problem.objective(&x, &gx), x.clone());
        let mut iterations = 0;
        let mut converged = false;
        let mut stopped_by_delta = false;

        while iterations < cfg.max_iterations {
            iterations += 1;
            let grad = (&gz - &problem.b) * (2.0 * lambda);
            let mut x_new = DVector::from_fn(n, |j, _| soft_threshold(z[j] - step * grad[j], step));
            if let Some(i) = masked {
                x_new[i] = 0.0;
            }
            let gx_new = self.normal(&x_new);

            let restart = (&z - &x_new).dot(&(&x_new - &x)) > 0.0;
            let t_new = if restart { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
            let beta = if restart { 0.0 } else { (t - 1.0) / t_new };
            z = &x_new + (&x_new - &x) * beta;
            gz = &gx_new + (&gx_new - &gx) * beta;
            x = x_new;
            gx = gx_new;
            t = t_new;

            let obj = problem.objective(&x, &gx);
            if obj < best.0 {
                best = (obj, x.clone());
            }

            if cfg.delta > 0.0 && problem.residual_sq(&x, &gx) <= cfg.delta * cfg.delta {
                stopped_by_delta = true;
                break;
            }
            if iterations % KKT_CHECK_EVERY == 0 {
                if problem.kkt(&x, &gx) <= cfg.kkt_tol {
                    converged = true;
                    break;
                }
                // Once the support is (nearly) identified the active-set
                // solve finishes the job exactly.
                let mut snapped = x.clone();
                snap(&mut snapped);
                if let Some(p) = problem.polish(&snapped) {
                    let kkt_p = kkt_violation(d, y, &p, lambda, masked);
                    if kkt_p <= cfg.kkt_tol {
                        return finish(p, lambda, y, d, iterations, kkt_p, cfg.kkt_tol, true);
                    }
                }
            }
        }

        if stopped_by_delta {
            snap(&mut x);
            let residual = (y - d * &x).norm();
            return finish(x, lambda, y, d, iterations, residual, cfg.delta, true);
        }

        if !converged {
            x = best.1;
        }
        snap(&mut x);
        let mut kkt_x = kkt_violation(d, y, &x, lambda, masked);
        if kkt_x > cfg.kkt_tol {
            if let Some(p) = problem.polish(&x) {
                let kkt_p = kkt_violation(d, y, &p, lambda, masked);
                let obj_x = lasso_objective(d, y, &x, lambda);
                let obj_p = lasso_objective(d, y, &p, lambda);
                if kkt_p <= kkt_x && obj_p <= obj_x + 1e-12 * (1.0 + obj_x.abs()) {
                    x = p;
                    kkt_x = kkt_p;
                }
            }
        }
        let converged = kkt_x <= cfg.kkt_tol;
        finish(x, lambda, y, d, iterations, kkt_x, cfg.kkt_tol, converged)
    }
}

/// One right-hand side against a bound solver, in normal-equation form:
/// everything is expressed through `b = Dᵀy`, `yᵀy` and `DᵀD x`.
struct Problem<'s, 'a> {
    solver: &'s LassoSolver<'a>,
    b: DVector<f64>,
    yy: f64,
    lambda: f64,
    masked: Option<usize>,
}

impl Problem<'_, '_> {
    fn residual_sq(&self, x: &DVector<f64>, gx: &DVector<f64>) -> f64 {
        (self.yy - 2.0 * x.dot(&self.b) + x.dot(gx)).max(0.0)
    }

    fn objective(&self, x: &DVector<f64>, gx: &DVector<f64>) -> f64 {
        self.lambda * self.residual_sq(x, gx) + x.lp_norm(1)
    }

    /// Same measure as [`kkt_violation`], from `gx = DᵀD x`.
    fn kkt(&self, x: &DVector<f64>, gx: &DVector<f64>) -> f64 {
        let scale = 2.0 * self.lambda;
        (0..x.len())
            .filter(|&j| Some(j) != self.masked)
            .map(|j| {
                let g = scale * (self.b[j] - gx[j]);
                if x[j] != 0.0 {
                    (g - x[j].signum()).abs()
                } else {
                    (g.abs() - 1.0).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Active-set refinement: solves the stationarity equations on the
    /// support of `x` with its signs, drops atoms whose sign flips, adds the
    /// worst violator, and repeats. Returns `None` if it does not settle.
    fn polish(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let d = self.solver.dict;
        let n = d.ncols();
        let mut active: Vec<(usize, f64)> = x
            .iter()
            .enumerate()
            .filter_map(|(j, &v)| (v != 0.0).then_some((j, v.signum())))
            .collect();
        if active.len() > d.nrows() {
            return None;
        }
        let max_rounds = 2 * active.len() + 8;

        for _ in 0..max_rounds {
            let mut c = DVector::zeros(n);
            if !active.is_empty() {
                let idx: Vec<usize> = active.iter().map(|a| a.0).collect();
                let gram = match &self.solver.gram {
                    Some(g) => g.select_rows(&idx).select_columns(&idx),
                    None => {
                        let ds = d.select_columns(&idx);
                        ds.tr_mul(&ds)
                    }
                };
                let signs = DVector::from_iterator(active.len(), active.iter().map(|a| a.1));
                let rhs = self.b.select_rows(&idx) - signs / (2.0 * self.lambda);
                let Some(chol) = gram.cholesky() else {
                    // Dependent atoms: drop the weakest and retry.
                    let weakest =
                        (0..active.len()).min_by(|&a, &b| x[active[a].0].abs().total_cmp(&x[active[b].0].abs()))?;
                    active.remove(weakest);
                    continue;
                };
                let sol = chol.solve(&rhs);
                if !sol.iter().all(|v| v.is_finite()) {
                    return None;
                }
                let before = active.len();
                let kept: Vec<(usize, f64)> = active
                    .iter()
                    .zip(sol.iter())
                    .filter(|((_, s), &v)| v * s > 0.0)
                    .map(|(a, _)| *a)
                    .collect();
                if kept.len() < before {
                    active = kept;
                    continue;
                }
                for (&(j, _), &v) in active.iter().zip(sol.iter()) {
                    c[j] = v;
                }
            }

            let gc = self.solver.normal(&c);
            let scale = 2.0 * self.lambda;
            let worst = (0..n)
                .filter(|&j| c[j] == 0.0 && Some(j) != self.masked)
                .map(|j| (j, scale * (self.b[j] - gc[j])))
                .filter(|&(_, g)| g.abs() > 1.0 + 1e-12)
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
            match worst {
                None => return Some(c),
                Some((j, g)) if active.len() < d.nrows() => active.push((j, g.signum())),
                Some(_) => return None,
            }
        }
        None
    }
}

fn lasso_objective(d: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    lambda * (y - d * x).norm_squared() + x.lp_norm(1)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: DVector<f64>,
    lambda: f64,
    y: &DVector<f64>,
    d: &DMatrix<f64>,
    iterations: usize,
    residual_norm: f64,
    tolerance: f64,
    converged: bool,
) -> SparseCode {
    let objective = lasso_objective(d, y, &x, lambda);
    let support = x.iter().enumerate().filter_map(|(j, &v)| (v != 0.0).then_some(j)).collect();
    SparseCode {
        coefficients: x,
        support,
        report: SolverReport {
            iterations,
            objective,
            residual_norm,
            tolerance,
            converged,
        },
    }
}

fn snap(x: &mut DVector<f64>) {
    for v in x.iter_mut() {
        if v.abs() < SUPPORT_EPS {
            *v = 0.0;
        }
    }
}

/// Largest violation of the optimality conditions, scaled so the ℓ1 weight
/// is one: `|g_j − sign(c_j)|` on the support and `(|g_j| − 1)₊` off it, with
/// `g = 2λ Dᵀ(y − D c)`.
pub fn kkt_violation(d: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, lambda: f64, masked: Option<usize>) -> f64 {
    let g = d.tr_mul(&(y - d * x)) * (2.0 * lambda);
    g.iter()
        .zip(x.iter())
        .enumerate()
        .filter(|(j, _)| Some(*j) != masked)
        .map(|(_, (&gj, &xj))| {
            if xj != 0.0 {
                (gj - xj.signum()).abs()
            } else {
                (gj.abs() - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng))
    }

    fn cfg(lambda: f64) -> SparseSelfRepConfig {
        SparseSelfRepConfig {
            lambda,
            delta: 0.0,
            max_iterations: 50_000,
            kkt_tol: 1e-9,
        }
    }

    #[test]
    fn soft_threshold_cases() {
        assert!((soft_threshold(0.5, 0.2) - 0.3).abs() < 1e-15);
        assert_eq!(soft_threshold(-0.1, 0.2), 0.0);
        for x in [-3.0, -0.1, 0.0, 2.5] {
            assert_eq!(soft_threshold(x, 0.0), x);
        }
    }

    #[test]
    fn null_threshold_is_exact() {
        let d = gaussian(6, 9, 1);
        let y = DVector::from_column_slice(gaussian(6, 1, 2).as_slice());
        let corr = d.tr_mul(&y).amax();
        // w/2 = 1/(2λ) ≥ ‖Dᵀy‖∞  ⇔  λ ≤ 1/(2‖Dᵀy‖∞)
        let at = solve_lasso(&DataMatrix::new(d.clone()).unwrap(), &y, &cfg(0.5 / corr)).unwrap();
        assert!(at.coefficients.iter().all(|&v| v == 0.0));
        assert!(at.report.converged);
        let past = solve_lasso(&DataMatrix::new(d).unwrap(), &y, &cfg(0.51 / corr)).unwrap();
        assert!(!past.support.is_empty());
    }

    #[test]
    fn single_atom_least_squares() {
        let d = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, -1.0]);
        let y = d.column(0) * 2.0;
        let code = solve_lasso(&DataMatrix::new(d).unwrap(), &y, &cfg(1e8)).unwrap();
        assert!((code.coefficients[0] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn zero_signal_gives_zero_code() {
        let d = gaussian(4, 5, 3);
        let code = solve_lasso(&DataMatrix::new(d).unwrap(), &DVector::zeros(4), &cfg(1.0)).unwrap();
        assert!(code.report.converged);
        assert!(code.support.is_empty());
    }

    #[test]
    fn delta_covering_signal_gives_zero_code() {
        let d = gaussian(4, 5, 4);
        let y = DVector::from_column_slice(gaussian(4, 1, 5).as_slice());
        let mut c = cfg(100.0);
        c.delta = y.norm();
        let code = solve_lasso(&DataMatrix::new(d).unwrap(), &y, &c).unwrap();
        assert!(code.coefficients.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let d = DataMatrix::new(gaussian(4, 5, 6)).unwrap();
        assert!(matches!(
            solve_lasso(&d, &DVector::zeros(3), &cfg(1.0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn iteration_cap_returns_unconverged_best() {
        let d = DataMatrix::new(gaussian(20, 40, 7)).unwrap();
        let y = DVector::from_column_slice(gaussian(20, 1, 8).as_slice());
        let mut c = cfg(1e4);
        c.max_iterations = 3;
        c.kkt_tol = 1e-14;
        let code = solve_lasso(&d, &y, &c).unwrap();
        assert_eq!(code.report.iterations, 3);
        assert!(!code.report.converged || code.report.residual_norm <= c.kkt_tol);
    }

    #[test]
    fn duplicate_columns_code_each_other() {
        let v = [1.0, -2.0, 0.5, 3.0];
        let y = DataMatrix::new(DMatrix::from_fn(4, 2, |i, _| v[i])).unwrap();
        let mut c = cfg(1e5);
        c.delta = 1e-6;
        let rep = sparse_self_representation(&y, &c).unwrap();
        let m = rep.coefficients.values();
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(1, 1)], 0.0);
        assert!((m[(1, 0)] - 1.0).abs() < 1e-4);
        assert!((m[(0, 1)] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn self_representation_matches_direct_solves() {
        let y = DataMatrix::new(gaussian(6, 10, 9)).unwrap();
        let c = cfg(5.0);
        let rep = sparse_self_representation(&y, &c).unwrap();
        for i in 0..10 {
            let mut zeroed = y.values().clone();
            zeroed.column_mut(i).fill(0.0);
            let direct = solve_lasso(&DataMatrix::new(zeroed).unwrap(), &y.column(i), &c).unwrap();
            let diff = (rep.coefficients.values().column(i) - &direct.coefficients).amax();
            assert!(diff <= 1e-10, "column {i}: {diff}");
        }
    }

    #[test]
    fn self_representation_needs_two_samples() {
        let y = DataMatrix::new(gaussian(3, 1, 1)).unwrap();
        assert!(sparse_self_representation(&y, &cfg(1.0)).is_err());
    }

    #[test]
    fn spectral_norm_estimate_bounds_truth() {
        let d = gaussian(7, 12, 10);
        let truth = d.singular_values().max().powi(2);
        let est = squared_spectral_norm(&d);
        assert!(est >= truth && est <= 1.02 * truth);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn kkt_conditions_hold(seed in any::<u64>(), log_lambda in -1.0f64..2.0) {
                let lambda = 10f64.powf(log_lambda);
                let d = gaussian(5, 8, seed);
                let y = DVector::from_column_slice(gaussian(5, 1, seed ^ 0xabc).as_slice());
                let c = SparseSelfRepConfig { kkt_tol: 1e-8, ..cfg(lambda) };
                let code = solve_lasso(&DataMatrix::new(d.clone()).unwrap(), &y, &c).unwrap();
                prop_assert!(code.report.converged);
                let w = 1.0 / lambda;
                let corr = d.tr_mul(&(&y - &d * &code.coefficients));
                for j in 0..8 {
                    let cj = code.coefficients[j];
                    prop_assert!(corr[j].abs() <= w / 2.0 * (1.0 + c.kkt_tol));
                    if cj != 0.0 {
                        prop_assert!((corr[j] - w / 2.0 * cj.signum()).abs() <= w / 2.0 * c.kkt_tol);
                        prop_assert!(code.support.contains(&j));
                    }
                }
            }

            #[test]
            fn l1_norm_shrinks_with_weight(seed in any::<u64>()) {
                let d = DataMatrix::new(gaussian(6, 10, seed)).unwrap();
                let y = DVector::from_column_slice(gaussian(6, 1, seed.wrapping_add(1)).as_slice());
                let mut last = f64::INFINITY;
                // decreasing λ = increasing ℓ1 weight
                for lambda in [100.0, 30.0, 10.0, 3.0, 1.0, 0.3, 0.1] {
                    let code = solve_lasso(&d, &y, &cfg(lambda)).unwrap();
                    let l1 = code.coefficients.lp_norm(1);
                    prop_assert!(l1 <= last + 1e-7, "l1 {} after {}", l1, last);
                    last = l1;
                }
            }

            #[test]
            fn diagonal_is_exactly_zero(seed in any::<u64>(), n in 2usize..9) {
                let y = DataMatrix::new(gaussian(4, n, seed)).unwrap();
                let rep = sparse_self_representation(&y, &cfg(3.0)).unwrap();
                for i in 0..n {
                    prop_assert_eq!(rep.coefficients.values()[(i, i)], 0.0);
                }
            }
        }
    }
}
