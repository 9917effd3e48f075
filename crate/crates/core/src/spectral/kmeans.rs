use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cluster::ClusterAssignment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop when the objective improves by less than this fraction.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 20,
            max_iterations: 300,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: ClusterAssignment,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    /// `k × d`, one centroid per row, in canonical label order.
    pub centroids: DMatrix<f64>,
}

/// Lloyd's algorithm from k-means++ seeds on the rows of `points`, best of
/// `cfg.restarts` runs.
///
/// Restart `r` draws from its own ChaCha stream `(seed, r)`, so the result is
/// the same whatever the thread count. Labels are canonical (numbered by
/// first appearance).
pub fn kmeans(points: &DMatrix<f64>, k: usize, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if n < k {
        return Err(Error::invalid(format!("cannot form {k} clusters from {n} points")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("k-means input"));
    }
    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();

    let runs: Vec<(f64, Vec<usize>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            lloyd(&rows, k, cfg, &mut rng)
        })
        .collect();

    // first minimum wins, so ties go to the lowest restart index
    let (objective, labels) = runs
        .into_iter()
        .reduce(|best, run| if run.0 < best.0 { run } else { best })
        .expect("at least one restart");

    let assignment = ClusterAssignment::new(labels, k)?.canonical();
    let centroids = centroids_of(&rows, assignment.labels(), k);
    let d = points.ncols();
    Ok(KMeansResult {
        assignment,
        objective,
        centroids: DMatrix::from_fn(k, d, |i, j| centroids[i][j]),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn seed_plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(rows[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = rows[pick].clone();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &c));
        }
        centers.push(c);
    }
    centers
}

fn centroids_of(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn lloyd(rows: &[Vec<f64>], k: usize, cfg: &KMeansConfig, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let n = rows.len();
    let mut centers = seed_plus_plus(rows, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut last = f64::INFINITY;

    for _ in 0..cfg.max_iterations.max(1) {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let (j, d) = nearest(r, &centers);
            changed |= labels[i] != j;
            labels[i] = j;
            dists[i] = d;
        }

        // An empty cluster takes the point currently worst served.
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[labels[i]] > 1)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)));
                if let Some(i) = far {
                    counts[labels[i]] -= 1;
                    counts[c] = 1;
                    labels[i] = c;
                    dists[i] = 0.0;
                    changed = true;
                }
            }
        }

        centers = centroids_of(rows, &labels, k);
        let objective: f64 = rows.iter().zip(&labels).map(|(r, &l)| sq_dist(r, &centers[l])).sum();
        let stalled = last.is_finite() && last - objective <= cfg.tol * last.abs();
        last = objective;
        if !changed || stalled {
            break;
        }
    }
    (last, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Uniform};

    fn cfg(restarts: usize, seed: u64) -> KMeansConfig {
        KMeansConfig {
            restarts,
            seed,
            ..KMeansConfig::default()
        }
    }

    #[test]
    fn separated_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let pts = DMatrix::from_fn(40, 2, |i, _| u.sample(&mut rng) + if i < 25 { 0.0 } else { 100.0 });
        let res = kmeans(&pts, 2, &cfg(5, 3)).unwrap();
        let l = res.assignment.labels();
        assert!(l[..25].iter().all(|&x| x == l[0]));
        assert!(l[25..].iter().all(|&x| x == l[25]));
        assert_ne!(l[0], l[25]);
    }

    #[test]
    fn single_cluster_objective_is_total_scatter() {
        let pts = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 2.0, 0.0, 0.0, 2.0, 2.0, 2.0]);
        let res = kmeans(&pts, 1, &cfg(3, 0)).unwrap();
        assert!(res.assignment.labels().iter().all(|&l| l == 0));
        assert!((res.objective - 8.0).abs() <= 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(kmeans(&DMatrix::zeros(2, 1), 3, &cfg(1, 0)).is_err());
    }

    #[test]
    fn identical_points_do_not_leave_empty_clusters() {
        let pts = DMatrix::from_element(5, 2, 1.0);
        let res = kmeans(&pts, 3, &cfg(2, 0)).unwrap();
        assert_eq!(res.assignment.sizes().iter().filter(|&&s| s > 0).count(), 3);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let pts = DMatrix::from_fn(50, 3, |_, _| u.sample(&mut rng));
        let a = kmeans(&pts, 4, &cfg(10, 42)).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| kmeans(&pts, 4, &cfg(10, 42)).unwrap());
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.objective, b.objective);
    }

    /// Exhaustive minimum of the k-means objective over every labeling into
    /// at most `k` cells.
    fn brute_force_objective(pts: &DMatrix<f64>, k: usize) -> f64 {
        let n = pts.nrows();
        let rows: Vec<Vec<f64>> = pts.row_iter().map(|r| r.iter().copied().collect()).collect();
        let mut labels = vec![0usize; n];
        let mut best = f64::INFINITY;
        loop {
            let c = centroids_of(&rows, &labels, k);
            let obj: f64 = rows.iter().zip(&labels).map(|(r, &l)| sq_dist(r, &c[l])).sum();
            best = best.min(obj);
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                labels[i] += 1;
                if labels[i] < k {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn matches_exhaustive_optimum_on_small_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let u = Uniform::new(-1.0, 1.0).unwrap();
        let pts = DMatrix::from_fn(12, 2, |_, _| u.sample(&mut rng));
        let oracle = brute_force_objective(&pts, 3);
        let res = kmeans(&pts, 3, &cfg(50, 5)).unwrap();
        assert!(res.objective <= oracle + 1e-9, "{} vs {}", res.objective, oracle);
    }
}
