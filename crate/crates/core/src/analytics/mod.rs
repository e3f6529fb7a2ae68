//! Distances between contributors, density and centroid clustering, and a
//! deterministic planar embedding.

mod dbscan;
mod distance;
mod dtw;
mod kmeans;
mod mds;

use thiserror::Error;

pub use dbscan::{dbscan, dbscan_reference, knee_eps, ClusterLabels, DbscanParams, NOISE};
pub use distance::{euclidean, pairwise_dtw, pairwise_l2, DistanceMatrix};
pub use dtw::{dtw_exact, fast_dtw, DtwParams};
pub use kmeans::{kmeans, knee_index, select_k_elbow, wcss, ElbowResult, KMeansResult};
pub use mds::{embed_2d, Embedding2D};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("series must be non-empty")]
    EmptySeries,
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("k = {k} is out of range for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}
