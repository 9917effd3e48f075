//! Scalable subspace clustering.
//!
//! Sparse-subspace clustering (SSC) and low-rank-representation (LRR)
//! clustering made scalable by the "sampling, clustering, coding,
//! classifying" scheme: a uniformly sampled subset of the data is clustered
//! with SSC or LRR followed by spectral clustering, and every remaining
//! sample is coded over the clustered subset and assigned to the class with
//! the smallest (regularized) reconstruction residual.
//!
//! Matrices follow the column-sample convention: a [`DataMatrix`] is
//! `ambient dimension × sample count`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod data;
pub mod error;
pub mod lowrank;
pub mod metrics;
pub mod oos;
pub mod pipeline;
pub mod solver;
pub mod sparse;
pub mod spectral;

pub use cluster::ClusterAssignment;
pub use data::{DataMatrix, LabeledDataset, SampleSplit};
pub use error::{Error, Result};
pub use solver::SolverReport;

use nalgebra::DMatrix;

/// Representation coefficients over a dictionary; column `i` codes sample `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix(pub DMatrix<f64>);

impl CoefficientMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }
}

impl From<DMatrix<f64>> for CoefficientMatrix {
    fn from(m: DMatrix<f64>) -> Self {
        CoefficientMatrix(m)
    }
}
