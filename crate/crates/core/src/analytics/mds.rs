use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::distance::DistanceMatrix;
use super::AnalyticsError;

/// Planar coordinates from classical multidimensional scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub points: Vec<[f64; 2]>,
    /// The two leading eigenvalues before clamping.
    pub eigenvalues: [f64; 2],
    /// True when a leading eigenvalue was negative and replaced by zero.
    pub clamped: bool,
}

impl Embedding2D {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }
}

/// Classical MDS: eigenvectors of `-1/2 J D^2 J` scaled by the square root of
/// their eigenvalues. Each axis is flipped so its largest-magnitude
/// coordinate is positive.
pub fn embed_2d(d: &DistanceMatrix) -> Result<Embedding2D, AnalyticsError> {
    let n = d.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewItems(n));
    }
    d.validate()?;
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));

    // eigenvalues this small relative to the largest are rounding noise
    let floor = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs())) * 1e-12;
    let mut points = vec![[0.0; 2]; n];
    let mut eigenvalues = [0.0; 2];
    let mut clamped = false;
    for axis in 0..2 {
        let Some(&k) = order.get(axis) else { break };
        let lambda = eig.eigenvalues[k];
        eigenvalues[axis] = lambda;
        if lambda < -floor {
            clamped = true;
        }
        let scale = if lambda > floor { lambda.sqrt() } else { 0.0 };
        let mut coords: Vec<f64> = eig.eigenvectors.column(k).iter().map(|v| v * scale).collect();
        let mean = coords.iter().sum::<f64>() / n as f64;
        for c in &mut coords {
            *c -= mean;
        }
        let pivot = coords
            .iter()
            .enumerate()
            .fold(0, |best, (i, c)| if c.abs() > coords[best].abs() { i } else { best });
        if coords[pivot] < 0.0 {
            for c in &mut coords {
                *c = -*c;
            }
        }
        for (p, c) in points.iter_mut().zip(coords) {
            p[axis] = c;
        }
    }
    Ok(Embedding2D {
        points,
        eigenvalues,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::distance::{euclidean, pairwise_l2};

    fn embedded_distance(e: &Embedding2D, i: usize, j: usize) -> f64 {
        euclidean(&e.points[i], &e.points[j])
    }

    #[test]
    fn two_points() {
        let d = pairwise_l2(&[vec![0.0], vec![5.0]]).unwrap();
        let e = embed_2d(&d).unwrap();
        assert!((embedded_distance(&e, 0, 1) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn right_triangle() {
        let d = DistanceMatrix::from_rows(&[
            vec![0.0, 3.0, 4.0],
            vec![3.0, 0.0, 5.0],
            vec![4.0, 5.0, 0.0],
        ])
        .unwrap();
        let e = embed_2d(&d).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((embedded_distance(&e, i, j) - d.get(i, j)).abs() < 1e-9);
        }
        assert!(!e.clamped);
    }

    #[test]
    fn collinear_points_have_flat_second_axis() {
        let d = pairwise_l2(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let e = embed_2d(&d).unwrap();
        assert!(e.points.iter().all(|p| p[1].abs() < 1e-9));
        assert!((e.points[2][0] - e.points[0][0]).abs() - 3.0 < 1e-9);
    }

    #[test]
    fn centered_and_sign_fixed() {
        let rows = vec![vec![0.0, 0.0], vec![4.0, 1.0], vec![-1.0, 3.0], vec![2.0, -2.0]];
        let e = embed_2d(&pairwise_l2(&rows).unwrap()).unwrap();
        for axis in 0..2 {
            let mean: f64 = e.points.iter().map(|p| p[axis]).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-9);
            let top = e.points.iter().map(|p| p[axis]).fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
            assert!(top > 0.0);
        }
    }

    #[test]
    fn non_euclidean_input_is_clamped() {
        // violates the triangle inequality badly
        let d = DistanceMatrix::from_rows(&[
            vec![0.0, 1.0, 1.0, 10.0],
            vec![1.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 0.0, 1.0],
            vec![10.0, 1.0, 1.0, 0.0],
        ])
        .unwrap();
        let e = embed_2d(&d).unwrap();
        assert!(e.points.iter().flatten().all(|c| c.is_finite()));
    }
}
