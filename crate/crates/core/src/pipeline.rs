//! End-to-end runs: preprocessing, sampling, in-sample clustering, coding and
//! classifying, plus the scaling benchmark.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterAssignment;
use crate::data::{pca_retain_energy, synth_subspaces, uniform_split, DataMatrix, SampleSplit, SynthParams};
use crate::error::{Error, Result};
use crate::lowrank::{median, outlier_columns, solve_lrr, LrrConfig};
use crate::metrics;
use crate::oos::{ClassDictionary, Coding, DEFAULT_GAMMA};
use crate::solver::SolverSummary;
use crate::sparse::{sparse_self_representation, SparseSelfRepConfig};
use crate::spectral::{spectral_cluster, SpectralConfig};

/// Largest `n` accepted by the whole-data modes unless raised explicitly.
pub const DEFAULT_FULL_DATA_CAP: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Sampled SSC with out-of-sample assignment.
    Sssc,
    /// Sampled LRR with out-of-sample assignment.
    Slrr,
    /// SSC on all samples.
    Ssc,
    /// LRR on all samples.
    Lrr,
}

impl Algorithm {
    pub fn is_sampled(self) -> bool {
        matches!(self, Algorithm::Sssc | Algorithm::Slrr)
    }

    pub fn is_low_rank(self) -> bool {
        matches!(self, Algorithm::Slrr | Algorithm::Lrr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Sssc => "sssc",
            Algorithm::Slrr => "slrr",
            Algorithm::Ssc => "ssc",
            Algorithm::Lrr => "lrr",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sssc" => Ok(Algorithm::Sssc),
            "slrr" => Ok(Algorithm::Slrr),
            "ssc" => Ok(Algorithm::Ssc),
            "lrr" => Ok(Algorithm::Lrr),
            other => Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Out-of-sample coding scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingMode {
    #[default]
    Ridge,
    Sparse,
}

impl FromStr for CodingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ridge" => Ok(CodingMode::Ridge),
            "sparse" => Ok(CodingMode::Sparse),
            other => Err(Error::invalid(format!("unknown coding mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    /// In-sample count for the sampled modes.
    pub p: Option<usize>,
    pub seed: u64,
    pub sparse: SparseSelfRepConfig,
    pub lrr: LrrConfig,
    pub gamma: f64,
    pub coding: CodingMode,
    pub regularized: bool,
    pub spectral: SpectralConfig,
    /// Keep this fraction of the spectral energy with PCA first.
    pub pca_energy: Option<f64>,
    /// Columns of the LRR error term above this multiple of the median
    /// column norm are reported as corrupted.
    pub outlier_factor: f64,
    /// Drop reported corrupted columns from the out-of-sample dictionary.
    pub exclude_outliers: bool,
    pub full_data_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            algorithm: Algorithm::Sssc,
            k: 2,
            p: None,
            seed: 0,
            sparse: SparseSelfRepConfig::default(),
            lrr: LrrConfig::default(),
            gamma: DEFAULT_GAMMA,
            coding: CodingMode::Ridge,
            regularized: true,
            spectral: SpectralConfig::default(),
            pca_energy: None,
            outlier_factor: 10.0,
            exclude_outliers: true,
            full_data_cap: DEFAULT_FULL_DATA_CAP,
        }
    }
}

impl RunConfig {
    /// Checks the configuration against a data set of `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.algorithm.is_low_rank() {
            self.lrr.validate()?;
        } else {
            self.sparse.validate()?;
        }
        if self.coding == CodingMode::Sparse {
            self.sparse.validate()?;
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if let Some(e) = self.pca_energy {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::invalid(format!("PCA energy must lie in (0, 1], got {e}")));
            }
        }
        if !(self.outlier_factor > 0.0) {
            return Err(Error::invalid("outlier factor must be positive"));
        }
        if self.algorithm.is_sampled() {
            let p = self
                .p
                .ok_or_else(|| Error::invalid(format!("{} needs an in-sample count p", self.algorithm)))?;
            if p == 0 || p > n {
                return Err(Error::invalid(format!("need 1 <= p <= n, got p = {p}, n = {n}")));
            }
            if self.k > p {
                return Err(Error::invalid(format!("k = {} exceeds p = {p}", self.k)));
            }
        } else {
            if n > self.full_data_cap {
                return Err(Error::invalid(format!(
                    "{} on all {n} samples exceeds the whole-data cap of {}; use {} with a sample size p, or raise the cap",
                    self.algorithm,
                    self.full_data_cap,
                    if self.algorithm.is_low_rank() { "slrr" } else { "sssc" }
                )));
            }
            if self.k > n {
                return Err(Error::invalid(format!("k = {} exceeds n = {n}", self.k)));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub preprocessing: f64,
    pub sampling: f64,
    pub in_sample_clustering: f64,
    pub coding: f64,
    pub classifying: f64,
    pub total: f64,
}

impl StageTimes {
    pub fn stage_sum(&self) -> f64 {
        self.preprocessing + self.sampling + self.in_sample_clustering + self.coding + self.classifying
    }

    /// Coding plus classifying: the per-sample work on out-of-sample data.
    pub fn classification(&self) -> f64 {
        self.coding + self.classifying
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub k: usize,
    pub in_sample: usize,
    pub out_of_sample: usize,
    pub accuracy: Option<f64>,
    pub nmi: Option<f64>,
    pub times: StageTimes,
    pub converged: bool,
    pub in_sample_solver: SolverSummary,
    pub out_of_sample_solver: Option<SolverSummary>,
    /// Samples reported as corrupted by the LRR error term, in input order.
    pub outliers: Vec<usize>,
    pub config: RunConfig,
    pub labels: Vec<usize>,
}

impl RunReport {
    pub fn assignment(&self) -> ClusterAssignment {
        ClusterAssignment::from_labels(self.labels.clone())
    }
}

/// Clusters the columns of `data`. With `truth`, accuracy and NMI are filled
/// in. Solver non-convergence is reported through `converged`, not as an
/// error.
pub fn run_cluster(data: &DataMatrix, truth: Option<&ClusterAssignment>, cfg: &RunConfig) -> Result<RunReport> {
    let n = data.n();
    cfg.validate(n)?;
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::mismatch(format!("{} truth labels for {n} samples", t.len())));
        }
    }
    let start = Instant::now();
    let mut times = StageTimes::default();

    let clock = Instant::now();
    let prepared = match cfg.pca_energy {
        Some(e) => pca_retain_energy(data, e).map_err(|e| e.in_stage("preprocessing"))?,
        None => data.clone(),
    };
    times.preprocessing = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let split = if cfg.algorithm.is_sampled() {
        uniform_split(n, cfg.p.expect("validated"), cfg.seed).map_err(|e| e.in_stage("sampling"))?
    } else {
        SampleSplit {
            in_sample: (0..n).collect(),
            out_of_sample: Vec::new(),
            seed: cfg.seed,
        }
    };
    let x = prepared.select_columns(&split.in_sample);
    times.sampling = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let in_sample = cluster_in_sample(&x, cfg).map_err(|e| e.in_stage("in-sample clustering"))?;
    times.in_sample_clustering = clock.elapsed().as_secs_f64();

    let mut labels = vec![0usize; n];
    for (&i, &l) in split.in_sample.iter().zip(in_sample.labels.labels()) {
        labels[i] = l;
    }

    let mut out_of_sample_solver = None;
    if !split.out_of_sample.is_empty() {
        let clock = Instant::now();
        let keep: Vec<usize> = if cfg.exclude_outliers {
            (0..x.n()).filter(|j| in_sample.outliers.binary_search(j).is_err()).collect()
        } else {
            (0..x.n()).collect()
        };
        let dictionary = ClassDictionary::build(x.select_columns(&keep), in_sample.labels.select(&keep), cfg.gamma)
            .map_err(|e| e.in_stage("coding"))?;
        let xbar = prepared.select_columns(&split.out_of_sample);
        let codes = match cfg.coding {
            CodingMode::Ridge => dictionary.code_batch(&xbar, &Coding::Ridge),
            CodingMode::Sparse => dictionary.sparse_code_batch(&xbar, &cfg.sparse).map(|solved| {
                out_of_sample_solver = Some(SolverSummary::from_reports(solved.iter().map(|c| &c.report)));
                solved.into_iter().map(|c| c.coefficients).collect()
            }),
        }
        .map_err(|e| e.in_stage("coding"))?;
        times.coding = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let assigned = dictionary
            .classify_codes(&xbar, &codes, cfg.regularized)
            .map_err(|e| e.in_stage("classifying"))?;
        for (&i, &l) in split.out_of_sample.iter().zip(assigned.labels()) {
            labels[i] = l;
        }
        times.classifying = clock.elapsed().as_secs_f64();
    }
    times.total = start.elapsed().as_secs_f64();

    let assignment = ClusterAssignment::new(labels, cfg.k)?;
    let (accuracy, nmi) = match truth {
        Some(t) => {
            let s = metrics::score(&assignment, t)?;
            (Some(s.accuracy), Some(s.nmi))
        }
        None => (None, None),
    };
    let converged =
        in_sample.summary.all_converged() && out_of_sample_solver.as_ref().is_none_or(SolverSummary::all_converged);

    Ok(RunReport {
        algorithm: cfg.algorithm,
        n,
        k: cfg.k,
        in_sample: split.in_sample.len(),
        out_of_sample: split.out_of_sample.len(),
        accuracy,
        nmi,
        times,
        converged,
        in_sample_solver: in_sample.summary,
        out_of_sample_solver,
        outliers: in_sample.outliers.iter().map(|&j| split.in_sample[j]).collect(),
        config: cfg.clone(),
        labels: assignment.into_labels(),
    })
}

struct InSample {
    labels: ClusterAssignment,
    summary: SolverSummary,
    /// Positions within the in-sample set, ascending.
    outliers: Vec<usize>,
}

fn cluster_in_sample(x: &DataMatrix, cfg: &RunConfig) -> Result<InSample> {
    let spectral = SpectralConfig {
        kmeans: crate::spectral::KMeansConfig {
            seed: cfg.seed,
            ..cfg.spectral.kmeans
        },
        ..cfg.spectral
    };
    if x.n() == 1 {
        return Ok(InSample {
            labels: ClusterAssignment::new(vec![0], cfg.k)?,
            summary: SolverSummary::from_reports(&[]),
            outliers: Vec::new(),
        });
    }
    if cfg.algorithm.is_low_rank() {
        let sol = solve_lrr(x, &cfg.lrr)?;
        let norms: Vec<f64> = x.values().column_iter().map(|c| c.norm()).collect();
        let floor = 1e-6 * median(&norms);
        let outliers = outlier_columns(&sol.e, cfg.outlier_factor, floor);
        let labels = spectral_cluster(&sol.c, cfg.k, &spectral)?;
        Ok(InSample {
            labels,
            summary: SolverSummary::from_reports(&[sol.report]),
            outliers,
        })
    } else {
        let rep = sparse_self_representation(x, &cfg.sparse)?;
        let labels = spectral_cluster(&rep.coefficients, cfg.k, &spectral)?;
        Ok(InSample {
            labels,
            summary: SolverSummary::from_reports(&rep.reports),
            outliers: Vec::new(),
        })
    }
}

/// Settings for the scaling benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub ambient: usize,
    pub dims: Vec<usize>,
    pub noise_sigma: f64,
    /// Each `n` is timed this many times; the fastest run is kept.
    pub repeats: usize,
    /// `k` is taken from `dims`; `p` must be set.
    pub run: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub classification_seconds: f64,
    pub total_seconds: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub p: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log classification time against log n; absent
    /// with fewer than two sizes.
    pub slope: Option<f64>,
}

/// Runs the pipeline on generated data for every `n` and fits the growth
/// rate of the classification stage.
pub fn bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let p = cfg
        .run
        .p
        .ok_or_else(|| Error::invalid("benchmark needs an in-sample count p"))?;
    if cfg.ns.is_empty() {
        return Err(Error::invalid("benchmark needs at least one n"));
    }
    let smallest = *cfg.ns.iter().min().expect("non-empty");
    if p > smallest {
        return Err(Error::invalid(format!("p = {p} exceeds the smallest n = {smallest}")));
    }
    if !cfg.run.algorithm.is_sampled() {
        return Err(Error::invalid("benchmark runs a sampled algorithm (sssc or slrr)"));
    }
    let k = cfg.dims.len();
    let run = RunConfig { k, ..cfg.run.clone() };

    let mut rows = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let points: Vec<usize> = (0..k).map(|i| n / k + usize::from(i < n % k)).collect();
        let ds = synth_subspaces(&SynthParams {
            ambient: cfg.ambient,
            dims: cfg.dims.clone(),
            points,
            noise_sigma: cfg.noise_sigma,
            corrupt_frac: 0.0,
            seed: cfg.run.seed,
        })?;
        let mut best: Option<BenchRow> = None;
        for _ in 0..cfg.repeats.max(1) {
            let report = run_cluster(&ds.data, Some(&ds.truth), &run)?;
            let row = BenchRow {
                n,
                classification_seconds: report.times.classification(),
                total_seconds: report.times.total,
                accuracy: report.accuracy.unwrap_or(0.0),
            };
            best = Some(match best {
                Some(b) => BenchRow {
                    classification_seconds: b.classification_seconds.min(row.classification_seconds),
                    total_seconds: b.total_seconds.min(row.total_seconds),
                    ..b
                },
                None => row,
            });
        }
        rows.push(best.expect("at least one repeat"));
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.classification_seconds.max(f64::MIN_POSITIVE).ln()))
        .collect();
    Ok(BenchReport {
        p,
        slope: log_log_slope(&points),
        rows,
    })
}

/// Ordinary least-squares slope; `None` unless at least two distinct x.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
