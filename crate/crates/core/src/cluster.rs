use serde::Serialize;

use crate::error::{Error, Result};

/// Per-sample cluster labels in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::invalid(format!(
                "label {l} at position {i} is outside [0, {k})"
            )));
        }
        Ok(ClusterAssignment { labels, k })
    }

    /// Builds an assignment whose `k` is one past the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        ClusterAssignment { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels restricted to the given positions, keeping `k`.
    pub fn select(&self, indices: &[usize]) -> ClusterAssignment {
        ClusterAssignment {
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
        }
    }

    /// Number of samples carrying each label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Relabels clusters in order of first appearance, so `labels[0] == 0`
    /// and each new cluster gets the next unused id.
    pub fn canonical(&self) -> ClusterAssignment {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        ClusterAssignment { labels, k: self.k }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_label() {
        assert!(ClusterAssignment::new(vec![0, 2], 2).is_err());
        assert!(ClusterAssignment::new(vec![0, 1], 2).is_ok());
    }

    #[test]
    fn canonical_orders_by_first_appearance() {
        let a = ClusterAssignment::new(vec![2, 2, 0, 1, 0], 3).unwrap();
        assert_eq!(a.canonical().labels(), &[0, 0, 1, 2, 1]);
    }
}
