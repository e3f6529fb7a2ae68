//! Dynamic time warping under absolute-difference cost with the symmetric
//! step pattern `{(1,0), (0,1), (1,1)}`, plus the FastDTW multi-resolution
//! approximation (Salvador & Chan).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtwParams {
    pub radius: usize,
}

impl Default for DtwParams {
    fn default() -> Self {
        Self { radius: 1 }
    }
}

fn check_inputs(a: &[f64], b: &[f64]) -> Result<(), AnalyticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalyticsError::EmptySeries);
    }
    Ok(())
}

/// Full O(len(a) * len(b)) DTW cost.
pub fn dtw_exact(a: &[f64], b: &[f64]) -> Result<f64, AnalyticsError> {
    check_inputs(a, b)?;
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => curr[j - 1],
                (_, 0) => prev[j],
                _ => prev[j - 1].min(prev[j]).min(curr[j - 1]),
            };
            curr[j] = (x - y).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

/// Inclusive column range searched in each row of the cost matrix.
type Window = Vec<(usize, usize)>;

fn full_window(n: usize, m: usize) -> Window {
    vec![(0, m - 1); n]
}

/// Cost and warp path of the cheapest path confined to `window`.
fn windowed_dtw(a: &[f64], b: &[f64], window: &Window) -> (f64, Vec<(usize, usize)>) {
    let n = a.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for &(lo, hi) in window {
        offsets.push(offsets.last().unwrap() + hi - lo + 1);
    }
    let mut cost = vec![f64::INFINITY; *offsets.last().unwrap()];
    let at = |cost: &[f64], i: usize, j: usize| -> f64 {
        let (lo, hi) = window[i];
        if j < lo || j > hi {
            f64::INFINITY
        } else {
            cost[offsets[i] + j - lo]
        }
    };

    for i in 0..n {
        let (lo, hi) = window[i];
        for j in lo..=hi {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { at(&cost, i - 1, j - 1) } else { f64::INFINITY };
                let up = if i > 0 { at(&cost, i - 1, j) } else { f64::INFINITY };
                let left = if j > 0 { at(&cost, i, j - 1) } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            cost[offsets[i] + j - lo] = (a[i] - b[j]).abs() + best;
        }
    }

    let (mut i, mut j) = (n - 1, b.len() - 1);
    let total = at(&cost, i, j);
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { at(&cost, i - 1, j - 1) } else { f64::INFINITY };
        let up = if i > 0 { at(&cost, i - 1, j) } else { f64::INFINITY };
        let left = if j > 0 { at(&cost, i, j - 1) } else { f64::INFINITY };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();
    (total, path)
}

/// Halves the resolution by averaging adjacent pairs; an odd tail element
/// is kept as is.
fn coarsen(x: &[f64]) -> Vec<f64> {
    x.chunks(2)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Projects a coarse path onto the doubled grid and widens it by `radius`.
fn expand_window(path: &[(usize, usize)], n: usize, m: usize, radius: usize) -> Window {
    let mut window = vec![(usize::MAX, 0usize); n];
    for &(ci, cj) in path {
        for i in [2 * ci, 2 * ci + 1] {
            for j in [2 * cj, 2 * cj + 1] {
                if i >= n || j >= m {
                    continue;
                }
                let lo = j.saturating_sub(radius);
                let hi = (j + radius).min(m - 1);
                for row in i.saturating_sub(radius)..=(i + radius).min(n - 1) {
                    let w = &mut window[row];
                    w.0 = w.0.min(lo);
                    w.1 = w.1.max(hi);
                }
            }
        }
    }
    window
}

fn fast_dtw_path(a: &[f64], b: &[f64], radius: usize) -> (f64, Vec<(usize, usize)>) {
    let min_size = 2 * radius + 2;
    if a.len() <= min_size || b.len() <= min_size {
        return windowed_dtw(a, b, &full_window(a.len(), b.len()));
    }
    let (_, coarse_path) = fast_dtw_path(&coarsen(a), &coarsen(b), radius);
    let window = expand_window(&coarse_path, a.len(), b.len(), radius);
    windowed_dtw(a, b, &window)
}

fn canonical_order(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// FastDTW cost: the cost of a legal warp path found by refining the
/// coarse-resolution path within `radius`. Never below [`dtw_exact`].
///
/// Arguments are put in a canonical order first so the result is symmetric.
pub fn fast_dtw(a: &[f64], b: &[f64], params: DtwParams) -> Result<f64, AnalyticsError> {
    check_inputs(a, b)?;
    let (a, b) = if canonical_order(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    Ok(fast_dtw_path(a, b, params.radius).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_examples() {
        assert_eq!(dtw_exact(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw_exact(&[0.0, 1.0, 2.0], &[0.0, 2.0]).unwrap(), 1.0);
        assert_eq!(dtw_exact(&[5.0], &[1.0, 1.0]).unwrap(), 8.0);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(dtw_exact(&[], &[1.0]), Err(AnalyticsError::EmptySeries)));
        assert!(matches!(
            fast_dtw(&[1.0], &[], DtwParams::default()),
            Err(AnalyticsError::EmptySeries)
        ));
    }

    #[test]
    fn coarsening_keeps_odd_tail() {
        assert_eq!(coarsen(&[1.0, 3.0, 5.0]), vec![2.0, 5.0]);
        assert_eq!(coarsen(&[1.0, 3.0]), vec![2.0]);
    }

    #[test]
    fn windowed_full_matches_exact() {
        let a = [0.0, 3.0, 1.0, 4.0, 1.0];
        let b = [2.0, 0.0, 5.0];
        let (cost, path) = windowed_dtw(&a, &b, &full_window(a.len(), b.len()));
        assert_eq!(cost, dtw_exact(&a, &b).unwrap());
        assert_eq!(path.first(), Some(&(0, 0)));
        assert_eq!(path.last(), Some(&(4, 2)));
        let along: f64 = path.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum();
        assert!((along - cost).abs() < 1e-12);
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..5.0, 1..80)
    }

    proptest! {
        #[test]
        fn fast_is_an_upper_bound(a in series(), b in series(), radius in 0usize..5) {
            let exact = dtw_exact(&a, &b).unwrap();
            let fast = fast_dtw(&a, &b, DtwParams { radius }).unwrap();
            prop_assert!(fast >= exact - 1e-9);
        }

        #[test]
        fn fast_is_symmetric(a in series(), b in series(), radius in 0usize..3) {
            let p = DtwParams { radius };
            prop_assert_eq!(fast_dtw(&a, &b, p).unwrap(), fast_dtw(&b, &a, p).unwrap());
        }

        #[test]
        fn fast_self_distance_is_zero(a in series(), radius in 0usize..3) {
            prop_assert_eq!(fast_dtw(&a, &a, DtwParams { radius }).unwrap(), 0.0);
        }

        #[test]
        fn exact_is_symmetric(a in series(), b in series()) {
            prop_assert_eq!(dtw_exact(&a, &b).unwrap(), dtw_exact(&b, &a).unwrap());
        }

        #[test]
        fn small_inputs_are_exact(a in prop::collection::vec(0.0f64..5.0, 1..5), b in prop::collection::vec(0.0f64..5.0, 1..5)) {
            let p = DtwParams { radius: 1 };
            prop_assert_eq!(fast_dtw(&a, &b, p).unwrap(), dtw_exact(&a, &b).unwrap());
        }
    }

    #[test]
    fn window_projection_covers_corners() {
        let a: Vec<f64> = (0..37).map(|i| (i % 5) as f64).collect();
        let b: Vec<f64> = (0..23).map(|i| (i % 3) as f64).collect();
        let (_, coarse) = fast_dtw_path(&coarsen(&a), &coarsen(&b), 0);
        let w = expand_window(&coarse, a.len(), b.len(), 0);
        assert_eq!(w[0].0, 0);
        assert_eq!(w[a.len() - 1].1, b.len() - 1);
        for pair in w.windows(2) {
            assert!(pair[0].0 <= pair[1].0 && pair[0].1 <= pair[1].1);
            assert!(pair[1].0 <= pair[0].1 + 1);
        }
    }
}
