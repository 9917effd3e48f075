use std::fs;
use std::path::Path;

use serde::Deserialize;
use sssc_core::lowrank::ErrorNorm;
use sssc_core::pipeline::{Algorithm, CodingMode, RunConfig};
use sssc_core::spectral::EigenSolver;

use crate::args::SolverArgs;
use crate::exit::Failure;

/// Options accepted in a `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub algorithm: Option<String>,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub kkt_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub lrr_lambda: Option<f64>,
    pub error_norm: Option<String>,
    pub constraint_tol: Option<f64>,
    pub lrr_max_iterations: Option<usize>,
    pub gamma: Option<f64>,
    pub coding: Option<String>,
    pub regularized: Option<bool>,
    pub restarts: Option<usize>,
    pub eigen: Option<String>,
    pub pca_energy: Option<f64>,
    pub outlier_factor: Option<f64>,
    pub exclude_outliers: Option<bool>,
    pub full_data_cap: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))
    }
}

fn parse<T: std::str::FromStr>(what: &str, s: Option<String>) -> Result<Option<T>, Failure>
where
    T::Err: std::fmt::Display,
{
    s.map(|v| v.parse::<T>().map_err(|e| Failure::usage(format!("--{what}: {e}"))))
        .transpose()
}

fn parse_eigen(s: Option<String>) -> Result<Option<EigenSolver>, Failure> {
    match s.as_deref().map(str::to_ascii_lowercase).as_deref() {
        None => Ok(None),
        Some("dense") => Ok(Some(EigenSolver::Dense)),
        Some("iterative") => Ok(Some(EigenSolver::Iterative)),
        Some(other) => Err(Failure::usage(format!("--eigen: unknown solver {other:?}"))),
    }
}

/// Builds a run configuration with precedence flags > file > defaults.
pub fn resolve(flags: &SolverArgs, k: Option<usize>, seed: u64) -> Result<RunConfig, Failure> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let f = flags.clone();
    let mut cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };

    if let Some(a) = parse::<Algorithm>("algorithm", f.algorithm.or(file.algorithm))? {
        cfg.algorithm = a;
    }
    if let Some(k) = k.or(file.k) {
        cfg.k = k;
    }
    cfg.p = f.p.or(file.p);

    let s = &mut cfg.sparse;
    s.lambda = f.lambda.or(file.lambda).unwrap_or(s.lambda);
    s.delta = f.delta.or(file.delta).unwrap_or(s.delta);
    s.kkt_tol = f.kkt_tol.or(file.kkt_tol).unwrap_or(s.kkt_tol);
    s.max_iterations = f.max_iterations.or(file.max_iterations).unwrap_or(s.max_iterations);

    let l = &mut cfg.lrr;
    l.lambda = f.lrr_lambda.or(file.lrr_lambda).unwrap_or(l.lambda);
    if let Some(n) = parse::<ErrorNorm>("error-norm", f.error_norm.or(file.error_norm))? {
        l.error_norm = n;
    }
    l.constraint_tol = f.constraint_tol.or(file.constraint_tol).unwrap_or(l.constraint_tol);
    l.max_iterations = f.lrr_max_iterations.or(file.lrr_max_iterations).unwrap_or(l.max_iterations);

    cfg.gamma = f.gamma.or(file.gamma).unwrap_or(cfg.gamma);
    if let Some(c) = parse::<CodingMode>("coding", f.coding.or(file.coding))? {
        cfg.coding = c;
    }
    cfg.regularized = if f.unregularized {
        false
    } else {
        file.regularized.unwrap_or(cfg.regularized)
    };
    cfg.spectral.kmeans.restarts = f.restarts.or(file.restarts).unwrap_or(cfg.spectral.kmeans.restarts);
    if let Some(e) = parse_eigen(f.eigen.or(file.eigen))? {
        cfg.spectral.eigen = e;
    }
    cfg.pca_energy = f.pca_energy.or(file.pca_energy);
    cfg.outlier_factor = f.outlier_factor.or(file.outlier_factor).unwrap_or(cfg.outlier_factor);
    cfg.exclude_outliers = if f.keep_outliers {
        false
    } else {
        file.exclude_outliers.unwrap_or(cfg.exclude_outliers)
    };
    cfg.full_data_cap = f.full_data_cap.or(file.full_data_cap).unwrap_or(cfg.full_data_cap);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn defaults_without_flags_or_file() {
        let cfg = resolve(&SolverArgs::default(), None, 3).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.gamma, 1e-6);
        assert_eq!(cfg.algorithm, Algorithm::Sssc);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let f = file("algorithm = \"slrr\"\ngamma = 0.5\nlrr_lambda = 2.0\nk = 4\n");
        let flags = SolverArgs {
            gamma: Some(0.25),
            config: Some(f.path().to_path_buf()),
            ..SolverArgs::default()
        };
        let cfg = resolve(&flags, Some(3), 0).unwrap();
        assert_eq!(cfg.gamma, 0.25);
        assert_eq!(cfg.algorithm, Algorithm::Slrr);
        assert_eq!(cfg.lrr.lambda, 2.0);
        assert_eq!(cfg.k, 3);
    }

    #[test]
    fn unknown_keys_and_values_are_usage_errors() {
        let f = file("lamda = 1.0\n");
        let flags = SolverArgs {
            config: Some(f.path().to_path_buf()),
            ..SolverArgs::default()
        };
        assert_eq!(resolve(&flags, None, 0).unwrap_err().code, 1);
        let flags = SolverArgs {
            error_norm: Some("l3".into()),
            ..SolverArgs::default()
        };
        assert_eq!(resolve(&flags, None, 0).unwrap_err().code, 1);
    }
}
