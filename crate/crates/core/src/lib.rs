//! Classical clustering algorithms and a reproducible benchmark harness.
//!
//! Hierarchical agglomeration, K-means, PAM/CLARA, DBSCAN/OPTICS and Gaussian
//! mixtures fitted by EM, plus synthetic data generators and matched-label
//! accuracy scoring.

pub mod data;
pub mod density;
pub mod error;
pub mod evalgen;
pub mod hierarchical;
pub mod medoids;
pub mod mixture;
pub mod parallel;
pub mod partitional;

pub use data::{distance, distance_matrix, Assignment, Clustering, Dataset, DistanceMatrix, Metric};
pub use error::{ClusterError, Result};
