//! Data ingestion, preprocessing, sampling and synthetic generation.
//!
//! CSV files are sample-per-row; in memory every sample is a column.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};

/// `m × n` real matrix whose columns are samples. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid(format!(
                "data matrix must be non-empty, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data matrix"));
        }
        Ok(DataMatrix { values })
    }

    /// An `m × 0` matrix, used for empty out-of-sample sets.
    pub fn empty(m: usize) -> Self {
        DataMatrix {
            values: DMatrix::zeros(m, 0),
        }
    }

    /// Ambient dimension.
    pub fn m(&self) -> usize {
        self.values.nrows()
    }

    /// Sample count.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.values.column(j).into_owned()
    }

    /// Columns at `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select_columns(indices),
        }
    }
}

/// Seeded partition of `0..n` into in-sample and out-of-sample indices,
/// both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSplit {
    pub in_sample: Vec<usize>,
    pub out_of_sample: Vec<usize>,
    pub seed: u64,
}

/// Generated data with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub truth: ClusterAssignment,
    pub subspace_dims: Vec<usize>,
    /// `corrupted[j]` is set when column `j` was replaced by an outlier.
    pub corrupted: Vec<bool>,
    /// Orthonormal basis (`ambient × dim`) of each subspace.
    pub bases: Vec<DMatrix<f64>>,
}

impl LabeledDataset {
    pub fn corrupted_indices(&self) -> Vec<usize> {
        self.corrupted
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }
}

/// Reads a CSV file of samples (one per row) into a `DataMatrix`.
///
/// Row and column numbers in errors are 1-based and count data rows only.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = r + 1;
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row,
                expected,
                found: record.len(),
            });
        }
        let parsed = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumeric {
                        path: path.to_path_buf(),
                        row,
                        column: c + 1,
                        value: cell.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(parsed);
    }

    let m = width.unwrap_or(0);
    let n = rows.len();
    if m == 0 || n == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    DataMatrix::new(DMatrix::from_fn(m, n, |i, j| rows[j][i]))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes samples as CSV rows using the shortest round-trip float format.
pub fn write_csv(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let v = data.values();
    for j in 0..v.ncols() {
        let line = v
            .column(j)
            .iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a label sidecar: one non-negative integer per line. Blank lines are
/// skipped.
pub fn load_labels(path: impl AsRef<Path>) -> Result<ClusterAssignment> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let l = t.parse::<usize>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {t:?} is not a non-negative integer", i + 1),
        })?;
        labels.push(l);
    }
    Ok(ClusterAssignment::from_labels(labels))
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for l in labels {
        writeln!(w, "{l}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Principal-component projection fitted on a data matrix.
#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// `m × d` orthonormal principal directions.
    pub components: DMatrix<f64>,
    /// All squared singular values of the centered data, descending.
    pub spectrum: Vec<f64>,
}

impl Pca {
    /// Fits the smallest number of principal directions whose squared
    /// singular values reach `energy` of the total.
    pub fn fit(y: &DataMatrix, energy: f64) -> Result<Pca> {
        if !(energy > 0.0 && energy <= 1.0) {
            return Err(Error::invalid(format!("energy {energy} is outside (0, 1]")));
        }
        let v = y.values();
        let mean = v.column_mean();
        let mut centered = v.clone();
        for mut col in centered.column_iter_mut() {
            col -= &mean;
        }
        let svd = centered
            .try_svd(true, false, f64::EPSILON, 0)
            .ok_or(Error::Decomposition("SVD"))?;
        let u = svd.u.expect("requested U");

        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let spectrum: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].powi(2)).collect();

        let total: f64 = spectrum.iter().sum();
        let smax = spectrum.first().map_or(0.0, |s| s.sqrt());
        let rank_tol = v.nrows().max(v.ncols()) as f64 * f64::EPSILON * smax;
        let rank = spectrum.iter().filter(|s| s.sqrt() > rank_tol).count();

        let target = energy * total;
        let mut d = 0;
        let mut acc = 0.0;
        while d < rank && acc < target * (1.0 - 1e-12) {
            acc += spectrum[d];
            d += 1;
        }
        let d = d.max(1);
        let components = DMatrix::from_fn(v.nrows(), d, |i, j| {
            if j < rank {
                u[(i, order[j])]
            } else {
                0.0
            }
        });
        Ok(Pca {
            mean,
            components,
            spectrum,
        })
    }

    pub fn dims(&self) -> usize {
        self.components.ncols()
    }

    /// `d × n` coordinates of the centered columns.
    pub fn transform(&self, y: &DataMatrix) -> Result<DataMatrix> {
        if y.m() != self.mean.len() {
            return Err(Error::mismatch(format!(
                "PCA fitted on dimension {}, got {}",
                self.mean.len(),
                y.m()
            )));
        }
        let mut centered = y.values().clone();
        for mut col in centered.column_iter_mut() {
            col -= &self.mean;
        }
        DataMatrix::new(self.components.transpose() * centered)
    }

    /// Maps coordinates back to the ambient space.
    pub fn reconstruct(&self, z: &DataMatrix) -> DMatrix<f64> {
        let mut out = &self.components * z.values();
        for mut col in out.column_iter_mut() {
            col += &self.mean;
        }
        out
    }
}

/// Projects mean-centered samples onto the fewest principal directions that
/// retain `energy` of the total squared singular-value mass.
pub fn pca_retain_energy(y: &DataMatrix, energy: f64) -> Result<DataMatrix> {
    Pca::fit(y, energy)?.transform(y)
}

/// Draws `p` of `n` indices uniformly without replacement.
pub fn uniform_split(n: usize, p: usize, seed: u64) -> Result<SampleSplit> {
    if p == 0 {
        return Err(Error::invalid("in-sample count p must be at least 1"));
    }
    if p > n {
        return Err(Error::invalid(format!(
            "in-sample count p = {p} exceeds sample count n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_sample = index::sample(&mut rng, n, p).into_vec();
    in_sample.sort_unstable();
    let mut taken = vec![false; n];
    for &i in &in_sample {
        taken[i] = true;
    }
    let out_of_sample = (0..n).filter(|&i| !taken[i]).collect();
    Ok(SampleSplit {
        in_sample,
        out_of_sample,
        seed,
    })
}

/// Parameters of [`synth_subspaces`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthParams {
    pub ambient: usize,
    pub dims: Vec<usize>,
    pub points: Vec<usize>,
    pub noise_sigma: f64,
    pub corrupt_frac: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn k(&self) -> usize {
        self.dims.len()
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("at least one subspace is required"));
        }
        if self.dims.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "{} subspace dimensions but {} point counts",
                self.dims.len(),
                self.points.len()
            )));
        }
        let budget: usize = self.dims.iter().sum();
        if budget > self.ambient {
            return Err(Error::invalid(format!(
                "subspace dimensions sum to {budget}, exceeding ambient dimension {}",
                self.ambient
            )));
        }
        for (i, (&d, &p)) in self.dims.iter().zip(&self.points).enumerate() {
            if d == 0 {
                return Err(Error::invalid(format!("subspace {i} has dimension 0")));
            }
            if p < d {
                return Err(Error::invalid(format!(
                    "subspace {i}: {p} points cannot span dimension {d}"
                )));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise sigma must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.corrupt_frac) {
            return Err(Error::invalid("corruption fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Generates points on a union of independent linear subspaces.
///
/// Subspace `i` is spanned by a disjoint block of columns of one random
/// orthogonal matrix, so the subspaces are independent exactly. Clean points
/// have unit norm. Columns are grouped by subspace in label order.
pub fn synth_subspaces(params: &SynthParams) -> Result<LabeledDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = params.ambient;
    let rotation = random_orthogonal(m, &mut rng);

    let mut bases = Vec::with_capacity(params.k());
    let mut offset = 0;
    for &d in &params.dims {
        bases.push(rotation.columns(offset, d).into_owned());
        offset += d;
    }

    let n: usize = params.points.iter().sum();
    let mut values = DMatrix::zeros(m, n);
    let mut labels = Vec::with_capacity(n);
    let mut j = 0;
    for (label, (basis, &count)) in bases.iter().zip(&params.points).enumerate() {
        for _ in 0..count {
            let coeffs = unit_gaussian(basis.ncols(), &mut rng);
            values.set_column(j, &(basis * coeffs));
            labels.push(label);
            j += 1;
        }
    }

    if params.noise_sigma > 0.0 {
        for v in values.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += params.noise_sigma * z;
        }
    }

    let n_corrupt = (params.corrupt_frac * n as f64).round() as usize;
    let mut corrupted = vec![false; n];
    if n_corrupt > 0 {
        let mut picked = index::sample(&mut rng, n, n_corrupt).into_vec();
        picked.sort_unstable();
        for j in picked {
            values.set_column(j, &unit_gaussian(m, &mut rng));
            corrupted[j] = true;
        }
    }

    Ok(LabeledDataset {
        data: DataMatrix::new(values)?,
        truth: ClusterAssignment::new(labels, params.k())?,
        subspace_dims: params.dims.clone(),
        corrupted,
        bases,
    })
}

/// Uniform direction on the unit sphere.
fn unit_gaussian(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(dim, |_, _| Distribution::<f64>::sample(&StandardNormal, rng));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix from the sign-corrected QR of a
/// Gaussian matrix.
fn random_orthogonal(m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| Distribution::<f64>::sample(&StandardNormal, rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}
