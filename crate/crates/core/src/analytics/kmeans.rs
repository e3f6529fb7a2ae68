use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::seed::derive_seed;

const MAX_ITERS: usize = 300;
const RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub wcss: f64,
    /// WCSS after seeding and after every Lloyd iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Within-cluster sum of squared distances.
pub fn wcss(points: &[Vec<f64>], labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    points.iter().zip(labels).map(|(p, &l)| sq_dist(p, &centers[l])).sum()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every remaining point coincides with a center
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centers).0).collect()
}

/// Moves centers to cluster means. An empty cluster takes over the point
/// farthest from its own center among clusters that can spare one.
fn update(points: &[Vec<f64>], labels: &mut [usize], centers: &mut [Vec<f64>]) {
    let k = centers.len();
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut sizes = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels.iter()) {
        sizes[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    for c in 0..k {
        if sizes[c] > 0 {
            centers[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
        }
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let donor = (0..points.len())
            .filter(|&i| sizes[labels[i]] >= 2)
            .map(|i| (i, sq_dist(&points[i], &centers[labels[i]])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = donor {
            sizes[labels[i]] -= 1;
            labels[i] = c;
            sizes[c] = 1;
            centers[c] = points[i].clone();
        }
    }
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or the iteration cap is hit.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansResult, AnalyticsError> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(AnalyticsError::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let mut labels = assign(points, &centers);
    let mut trace = vec![wcss(points, &labels, &centers)];
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        update(points, &mut labels, &mut centers);
        let next = assign(points, &centers);
        let stable = next == labels;
        labels = next;
        trace.push(wcss(points, &labels, &centers));
        if stable {
            break;
        }
    }
    // final centers are the means of the final assignment
    update(points, &mut labels, &mut centers);
    let total = wcss(points, &labels, &centers);
    Ok(KMeansResult {
        labels,
        centers,
        wcss: total,
        trace,
        iterations,
    })
}

/// Index of the point farthest from the chord joining the first and last
/// points of `curve`, after scaling both axes to the unit interval. Only
/// interior points qualify; ties go to the smaller index. Curves without an
/// interior point give their last index.
pub fn knee_index(curve: &[f64]) -> usize {
    let n = curve.len();
    if n <= 2 {
        return n.saturating_sub(1);
    }
    let lo = curve.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let point = |i: usize| {
        let x = i as f64 / (n - 1) as f64;
        let y = if span > 0.0 { (curve[i] - lo) / span } else { 0.0 };
        (x, y)
    };
    let (x0, y0) = point(0);
    let (x1, y1) = point(n - 1);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = (dx * dx + dy * dy).sqrt();
    let scores: Vec<f64> = (1..n - 1)
        .map(|i| {
            let (x, y) = point(i);
            (dy * (x - x0) - dx * (y - y0)).abs() / len
        })
        .collect();
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    1 + scores.iter().position(|&s| s >= best - 1e-12).unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowResult {
    pub k: usize,
    /// Best WCSS for k = 1..=k_max.
    pub wcss: Vec<f64>,
    pub best: KMeansResult,
}

/// Picks k at the knee of the best-of-restarts WCSS curve for k = 1..=k_max.
pub fn select_k_elbow(points: &[Vec<f64>], k_max: usize, seed: u64) -> Result<ElbowResult, AnalyticsError> {
    let n = points.len();
    if k_max < 2 || k_max > n {
        return Err(AnalyticsError::InvalidK { k: k_max, n });
    }
    let mut fits = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut best: Option<KMeansResult> = None;
        for r in 0..RESTARTS {
            let fit = kmeans(points, k, derive_seed(seed, &format!("kmeans/{k}/{r}")))?;
            if best.as_ref().is_none_or(|b| fit.wcss < b.wcss) {
                best = Some(fit);
            }
        }
        fits.push(best.expect("at least one restart"));
    }
    let curve: Vec<f64> = fits.iter().map(|f| f.wcss).collect();
    let k = knee_index(&curve) + 1;
    Ok(ElbowResult {
        k,
        wcss: curve,
        best: fits.swap_remove(k - 1),
    })
}
