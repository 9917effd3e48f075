use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sssc", version, about = "Scalable sparse and low-rank subspace clustering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate points on a union of independent subspaces.
    Synth(SynthArgs),
    /// Cluster the rows of a CSV file.
    Cluster(ClusterArgs),
    /// Time the pipeline on generated data for several sample counts.
    Bench(BenchArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub ambient: usize,
    /// Subspace dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Points per subspace; a single value applies to every subspace.
    #[arg(long, value_delimiter = ',', required = true)]
    pub points: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Fraction of samples replaced by random outliers.
    #[arg(long, default_value_t = 0.0)]
    pub corrupt_frac: f64,
    #[arg(long)]
    pub seed: u64,
    /// Data CSV, one sample per row.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth labels, one per line. Outlier flags go to
    /// `<labels>.corrupted`.
    #[arg(long)]
    pub labels: PathBuf,
}

/// Knobs shared by `cluster` and `bench`. Unset values fall back to the
/// config file, then to built-in defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct SolverArgs {
    /// sssc, slrr, ssc or lrr.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// In-sample count for sssc and slrr.
    #[arg(long)]
    pub p: Option<usize>,
    /// Fidelity weight of the sparse coding objective.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Residual at which sparse coding stops early.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kkt_tol: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Error weight of the low-rank objective.
    #[arg(long)]
    pub lrr_lambda: Option<f64>,
    /// l21, l1 or fro.
    #[arg(long)]
    pub error_norm: Option<String>,
    #[arg(long)]
    pub constraint_tol: Option<f64>,
    #[arg(long)]
    pub lrr_max_iterations: Option<usize>,
    /// Ridge parameter of the out-of-sample coding.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// ridge or sparse.
    #[arg(long)]
    pub coding: Option<String>,
    /// Use plain instead of regularized residuals.
    #[arg(long)]
    pub unregularized: bool,
    /// k-means restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// dense or iterative.
    #[arg(long)]
    pub eigen: Option<String>,
    /// Keep this fraction of spectral energy with PCA first.
    #[arg(long)]
    pub pca_energy: Option<f64>,
    #[arg(long)]
    pub outlier_factor: Option<f64>,
    /// Keep columns flagged as corrupted in the out-of-sample dictionary.
    #[arg(long)]
    pub keep_outliers: bool,
    /// Largest n accepted by ssc and lrr.
    #[arg(long)]
    pub full_data_cap: Option<usize>,
    /// TOML file with any of the options above (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Data CSV, one sample per row.
    #[arg(long)]
    pub input: PathBuf,
    /// The first CSV row is a header.
    #[arg(long)]
    pub header: bool,
    /// Ground-truth labels; enables accuracy and NMI in the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Predicted labels, one per line; defaults to the report path with a
    /// `.labels` extension.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sample counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2000,4000,8000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub ambient: usize,
    #[arg(long, value_delimiter = ',', default_value = "5,5,5,5")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Timings keep the fastest of this many runs.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// JSON report in addition to the table on stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}
