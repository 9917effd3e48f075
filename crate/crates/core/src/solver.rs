use serde::Serialize;

/// Outcome of an iterative solver run.
///
/// `residual_norm` is whatever quantity the solver compared against
/// `tolerance` to decide convergence, so `converged` implies
/// `residual_norm <= tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub objective: f64,
    pub residual_norm: f64,
    pub tolerance: f64,
    pub converged: bool,
}

impl SolverReport {
    pub(crate) fn trivial(objective: f64, tolerance: f64) -> Self {
        SolverReport {
            iterations: 0,
            objective,
            residual_norm: 0.0,
            tolerance,
            converged: true,
        }
    }
}

/// Aggregate over many independent solver runs (one per column).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSummary {
    pub runs: usize,
    pub converged_runs: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub worst_residual: f64,
    pub total_objective: f64,
}

impl SolverSummary {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a SolverReport>) -> Self {
        let mut s = SolverSummary {
            runs: 0,
            converged_runs: 0,
            max_iterations: 0,
            mean_iterations: 0.0,
            worst_residual: 0.0,
            total_objective: 0.0,
        };
        let mut iters = 0usize;
        for r in reports {
            s.runs += 1;
            s.converged_runs += r.converged as usize;
            s.max_iterations = s.max_iterations.max(r.iterations);
            iters += r.iterations;
            if r.residual_norm > s.worst_residual {
                s.worst_residual = r.residual_norm;
            }
            s.total_objective += r.objective;
        }
        if s.runs > 0 {
            s.mean_iterations = iters as f64 / s.runs as f64;
        }
        s
    }

    pub fn all_converged(&self) -> bool {
        self.converged_runs == self.runs
    }
}
