//! Clustering evaluation: accuracy under the best one-to-one label matching
//! and normalized mutual information.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};

/// `counts[a][b]` = number of samples with predicted label `a` and true
/// label `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn k_pred(&self) -> usize {
        self.counts.len()
    }

    pub fn k_true(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        (0..self.k_true()).map(|b| self.counts.iter().map(|r| r[b]).sum()).collect()
    }
}

/// Optimal injective mapping from predicted to true cluster ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelMapping {
    /// `mapping[a]` is the true id matched to predicted id `a`, if any.
    pub mapping: Vec<Option<usize>>,
    /// Samples whose predicted id maps to their true id.
    pub matched: usize,
}

/// Minimum-cost assignment of rows to columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `assignment[i]` is the column matched to row `i`; `None` only when a
    /// rectangular input has more rows than columns.
    pub assignment: Vec<Option<usize>>,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub accuracy: f64,
    pub nmi: f64,
}

pub fn contingency(pred: &ClusterAssignment, truth: &ClusterAssignment) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(Error::mismatch(format!(
            "{} predicted labels but {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut counts = vec![vec![0usize; truth.k()]; pred.k()];
    for (&a, &b) in pred.labels().iter().zip(truth.labels()) {
        counts[a][b] += 1;
    }
    Ok(ContingencyTable { counts, n: pred.len() })
}

/// Kuhn–Munkres with row/column potentials, `O(n³)`.
///
/// Rectangular inputs are padded to square with a constant sentinel cost
/// larger than every real entry; padded pairs are reported as unmatched.
pub fn hungarian(cost: &DMatrix<f64>) -> Result<Matching> {
    if cost.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("assignment cost matrix"));
    }
    let (rows, cols) = cost.shape();
    let size = rows.max(cols);
    if size == 0 {
        return Ok(Matching {
            assignment: Vec::new(),
            cost: 0.0,
        });
    }
    let sentinel = cost.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 2.0 + 1.0;
    let at = |i: usize, j: usize| if i < rows && j < cols { cost[(i, j)] } else { sentinel };

    // 1-based arrays; column 0 is the virtual start.
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut owner = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut total = 0.0;
    for j in 1..=size {
        let i = owner[j] - 1;
        if i < rows && j - 1 < cols {
            assignment[i] = Some(j - 1);
            total += cost[(i, j - 1)];
        }
    }
    Ok(Matching { assignment, cost: total })
}

/// Best injective mapping of predicted ids onto true ids by agreement count.
pub fn best_mapping(table: &ContingencyTable) -> Result<LabelMapping> {
    let size = table.k_pred().max(table.k_true());
    // zero-count padding keeps the matrix square without changing the optimum
    let cost = DMatrix::from_fn(size, size, |a, b| {
        if a < table.k_pred() && b < table.k_true() {
            -(table.counts[a][b] as f64)
        } else {
            0.0
        }
    });
    let m = hungarian(&cost)?;
    let mut mapping = vec![None; table.k_pred()];
    let mut matched = 0;
    for (a, slot) in mapping.iter_mut().enumerate() {
        if let Some(b) = m.assignment[a].filter(|&b| b < table.k_true()) {
            *slot = Some(b);
            matched += table.counts[a][b];
        }
    }
    Ok(LabelMapping { mapping, matched })
}

/// Fraction of samples labeled correctly under the best label matching.
pub fn accuracy(pred: &ClusterAssignment, truth: &ClusterAssignment) -> Result<f64> {
    let table = contingency(pred, truth)?;
    if table.n == 0 {
        return Err(Error::invalid("accuracy of an empty labeling"));
    }
    Ok(best_mapping(&table)?.matched as f64 / table.n as f64)
}

/// Sum in ascending order so that equal multisets of terms give bitwise
/// equal totals; with it a perfect clustering scores exactly 1.
fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

/// Shannon entropy in bits of a count vector summing to `n`.
fn entropy(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    ordered_sum(
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 / n * (n / c as f64).log2())
            .collect(),
    )
}

pub fn mutual_information(table: &ContingencyTable) -> f64 {
    let rows = table.row_sums();
    let cols = table.col_sums();
    let n = table.n as f64;
    let mut terms = Vec::new();
    for (a, row) in table.counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if c > 0 {
                let ratio = (n * c as f64) / (rows[a] as f64 * cols[b] as f64);
                terms.push(c as f64 / n * ratio.log2());
            }
        }
    }
    ordered_sum(terms)
}

/// `MI / max(H(pred), H(truth))`, zero when both partitions are trivial.
pub fn nmi(pred: &ClusterAssignment, truth: &ClusterAssignment) -> Result<f64> {
    let table = contingency(pred, truth)?;
    if table.n == 0 {
        return Err(Error::invalid("NMI of an empty labeling"));
    }
    let h = entropy(&table.row_sums(), table.n).max(entropy(&table.col_sums(), table.n));
    if h <= 0.0 {
        return Ok(0.0);
    }
    Ok(mutual_information(&table) / h)
}

pub fn score(pred: &ClusterAssignment, truth: &ClusterAssignment) -> Result<Scores> {
    Ok(Scores {
        accuracy: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
    })
}
