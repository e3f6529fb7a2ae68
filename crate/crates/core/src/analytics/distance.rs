use rayon::prelude::*;

use super::dtw::{fast_dtw, DtwParams};
use super::AnalyticsError;

/// Dense symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds from full rows, checking the matrix invariants.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AnalyticsError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AnalyticsError::InvalidMatrix(format!("row {i} has {} entries", row.len())));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m.validate()?;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, d: f64) {
        self.data[i * self.n + j] = d;
        self.data[j * self.n + i] = d;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        for i in 0..self.n {
            if self.get(i, i) != 0.0 {
                return Err(AnalyticsError::InvalidMatrix(format!("non-zero diagonal at {i}")));
            }
            for j in 0..self.n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(AnalyticsError::InvalidMatrix(format!("entry ({i},{j}) = {d}")));
                }
                if d != self.get(j, i) {
                    return Err(AnalyticsError::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(())
    }
}

fn from_pairs<F>(n: usize, dist: F) -> Result<DistanceMatrix, AnalyticsError>
where
    F: Fn(usize, usize) -> Result<f64, AnalyticsError> + Sync,
{
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| dist(i, j))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = DistanceMatrix::zeros(n);
    for (&(i, j), d) in pairs.iter().zip(values) {
        m.set(i, j, d);
    }
    Ok(m)
}

/// FastDTW distance between every pair of series.
pub fn pairwise_dtw<S: AsRef<[f64]> + Sync>(
    series: &[S],
    params: DtwParams,
) -> Result<DistanceMatrix, AnalyticsError> {
    if series.len() < 2 {
        return Err(AnalyticsError::TooFewItems(series.len()));
    }
    from_pairs(series.len(), |i, j| {
        fast_dtw(series[i].as_ref(), series[j].as_ref(), params)
    })
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Euclidean distance between every pair of rows.
pub fn pairwise_l2<R: AsRef<[f64]> + Sync>(rows: &[R]) -> Result<DistanceMatrix, AnalyticsError> {
    if rows.len() < 2 {
        return Err(AnalyticsError::TooFewItems(rows.len()));
    }
    from_pairs(rows.len(), |i, j| Ok(euclidean(rows[i].as_ref(), rows[j].as_ref())))
}
