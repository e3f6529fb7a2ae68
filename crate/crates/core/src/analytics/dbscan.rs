use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::distance::DistanceMatrix;
use super::kmeans::knee_index;
use super::AnalyticsError;

pub const NOISE: i32 = -1;

/// One label per item; [`NOISE`] marks unclustered points.
pub type ClusterLabels = Vec<i32>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    pub eps: f64,
    /// Neighbourhood size needed for a core point, the point itself included.
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(AnalyticsError::InvalidParams(format!("eps must be positive, got {}", self.eps)));
        }
        if self.min_pts == 0 {
            return Err(AnalyticsError::InvalidParams("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

fn neighbours(d: &DistanceMatrix, i: usize, eps: f64) -> impl Iterator<Item = usize> + '_ {
    d.row(i).iter().enumerate().filter(move |(_, &x)| x <= eps).map(|(j, _)| j)
}

fn core_flags(d: &DistanceMatrix, params: DbscanParams) -> Vec<bool> {
    (0..d.len())
        .map(|i| neighbours(d, i, params.eps).count() >= params.min_pts)
        .collect()
}

/// Density clustering over a precomputed distance matrix.
///
/// Clusters are numbered in order of their lowest-index core point. A border
/// point reachable from several clusters joins the lowest-numbered one.
pub fn dbscan(d: &DistanceMatrix, params: DbscanParams) -> Result<ClusterLabels, AnalyticsError> {
    params.validate()?;
    let n = d.len();
    let core = core_flags(d, params);
    let mut labels = vec![NOISE; n];
    let mut assigned = vec![false; n];
    let mut next = 0;
    for seed in 0..n {
        if assigned[seed] || !core[seed] {
            continue;
        }
        let cluster = next;
        next += 1;
        assigned[seed] = true;
        labels[seed] = cluster;
        let mut queue = VecDeque::from([seed]);
        while let Some(p) = queue.pop_front() {
            for q in neighbours(d, p, params.eps) {
                if assigned[q] {
                    continue;
                }
                assigned[q] = true;
                labels[q] = cluster;
                if core[q] {
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(labels)
}

/// Brute-force DBSCAN: core components by repeated min-label propagation
/// until nothing changes, then borders take the smallest adjacent cluster.
pub fn dbscan_reference(d: &DistanceMatrix, params: DbscanParams) -> Result<ClusterLabels, AnalyticsError> {
    params.validate()?;
    let n = d.len();
    let core = core_flags(d, params);
    let mut root: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if core[i] && core[j] && d.get(i, j) <= params.eps && root[j] < root[i] {
                    root[i] = root[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut roots: Vec<usize> = (0..n).filter(|&i| core[i]).map(|i| root[i]).collect();
    roots.sort_unstable();
    roots.dedup();
    let cluster_of = |i: usize| roots.binary_search(&root[i]).unwrap() as i32;
    Ok((0..n)
        .map(|i| {
            if core[i] {
                cluster_of(i)
            } else {
                (0..n)
                    .filter(|&j| core[j] && d.get(i, j) <= params.eps)
                    .map(cluster_of)
                    .min()
                    .unwrap_or(NOISE)
            }
        })
        .collect())
}

/// Distance from every item to its `k`-th nearest other item, sorted
/// ascending.
fn k_distances(d: &DistanceMatrix, k: usize) -> Vec<f64> {
    let k = k.clamp(1, d.len() - 1);
    let mut out: Vec<f64> = (0..d.len())
        .map(|i| {
            let mut row: Vec<f64> = d.row(i).iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            row.sort_by(f64::total_cmp);
            row[k - 1]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// eps at the knee of the sorted `min_pts`-th nearest-neighbour distance
/// curve.
pub fn knee_eps(d: &DistanceMatrix, min_pts: usize) -> Result<f64, AnalyticsError> {
    if d.len() < 2 {
        return Err(AnalyticsError::TooFewItems(d.len()));
    }
    let curve = k_distances(d, min_pts);
    let eps = curve[knee_index(&curve)];
    Ok(eps.max(f64::MIN_POSITIVE))
}
