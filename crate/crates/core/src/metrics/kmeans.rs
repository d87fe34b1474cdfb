use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Real;
use crate::rng::{self, stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence threshold on the summed squared centroid shift, relative
    /// to the mean per-feature variance of the data.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 300,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    /// `sum_i |x_i - c_{label_i}|^2`.
    pub inertia: f64,
    pub seed: u64,
    /// Index of the winning restart.
    pub restart: usize,
    pub iterations: usize,
    /// Inertia after every centroid update of the winning restart.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(x: &Array2<f64>, k: usize, rng: &mut rng::Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut centers = Array2::zeros((k, x.ncols()));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&x.row(first));
    let mut d2: Vec<f64> = x.axis_iter(Axis(0)).map(|r| sq_dist(r, centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&x.row(pick));
        for (i, r) in x.axis_iter(Axis(0)).enumerate() {
            d2[i] = d2[i].min(sq_dist(r, centers.row(c)));
        }
    }
    centers
}

/// Nearest centroid per row; ties go to the lower centroid index.
fn assign(x: &Array2<f64>, centers: &Array2<f64>) -> Vec<usize> {
    x.axis_iter(Axis(0))
        .map(|r| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.axis_iter(Axis(0)).enumerate() {
                let d = sq_dist(r, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Cluster means. An empty cluster claims the point farthest from its own
/// centroid among clusters that can spare one; `labels` is updated.
fn update(x: &Array2<f64>, labels: &mut [usize], centers: &Array2<f64>) -> Array2<f64> {
    let k = centers.nrows();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            let mut sums = Array2::zeros(centers.dim());
            for (i, &l) in labels.iter().enumerate() {
                let mut row = sums.row_mut(l);
                row += &x.row(i);
            }
            for (c, mut row) in sums.axis_iter_mut(Axis(0)).enumerate() {
                row /= counts[c] as f64;
            }
            return sums;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] > 1 {
                let d = sq_dist(x.row(i), centers.row(l));
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        labels[far.expect("k <= n guarantees a donor cluster")] = empty;
    }
}

fn inertia(x: &Array2<f64>, labels: &[usize], centers: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x.row(i), centers.row(l)))
        .sum()
}

struct Run {
    labels: Vec<usize>,
    centers: Array2<f64>,
    inertia: f64,
    iterations: usize,
    history: Vec<f64>,
}

fn lloyd(x: &Array2<f64>, init: Array2<f64>, cfg: &KMeansConfig, tol_abs: f64) -> Run {
    let mut centers = init;
    let mut labels = assign(x, &centers);
    let mut history = Vec::new();
    let mut consistent = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters.max(1) {
        iterations += 1;
        let updated = update(x, &mut labels, &centers);
        let shift: f64 = (&updated - &centers).iter().map(|v| v * v).sum();
        centers = updated;
        let current = inertia(x, &labels, &centers);
        if let Some(&last) = history.last() {
            debug_assert!(
                current <= last * (1.0 + 1e-9) + 1e-12,
                "inertia increased from {last} to {current}"
            );
        }
        history.push(current);
        consistent = true;
        if shift <= tol_abs {
            break;
        }
        let next = assign(x, &centers);
        if next == labels {
            break;
        }
        labels = next;
        consistent = false;
    }
    if !consistent {
        centers = update(x, &mut labels, &centers);
        history.push(inertia(x, &labels, &centers));
    }
    Run {
        inertia: inertia(x, &labels, &centers),
        labels,
        centers,
        iterations,
        history,
    }
}

/// Single-point moves from a Lloyd fixed point. Moving `x` from cluster `a`
/// to `b` changes the inertia by `n_b/(n_b+1) |x-c_b|^2 - n_a/(n_a-1) |x-c_a|^2`;
/// the best improving move is taken until none is left.
fn hartigan(x: &Array2<f64>, run: &mut Run) {
    let k = run.centers.nrows();
    if k < 2 {
        return;
    }
    let mut counts = vec![0usize; k];
    for &l in &run.labels {
        counts[l] += 1;
    }
    let eps = 1e-12 * (1.0 + run.inertia);
    let mut moved = true;
    let mut passes = 0;
    while moved && passes < 100 {
        moved = false;
        passes += 1;
        for i in 0..x.nrows() {
            let a = run.labels[i];
            if counts[a] < 2 {
                continue;
            }
            let na = counts[a] as f64;
            let remove = na / (na - 1.0) * sq_dist(x.row(i), run.centers.row(a));
            let mut best = None;
            let mut best_delta = -eps;
            for b in (0..k).filter(|&b| b != a) {
                let nb = counts[b] as f64;
                let delta = nb / (nb + 1.0) * sq_dist(x.row(i), run.centers.row(b)) - remove;
                if delta < best_delta {
                    best_delta = delta;
                    best = Some(b);
                }
            }
            let Some(b) = best else { continue };
            let (na, nb) = (na, counts[b] as f64);
            let row = x.row(i);
            let mut ca = run.centers.row_mut(a);
            ca.zip_mut_with(&row, |c, &v| *c = (*c * na - v) / (na - 1.0));
            let mut cb = run.centers.row_mut(b);
            cb.zip_mut_with(&row, |c, &v| *c = (*c * nb + v) / (nb + 1.0));
            counts[a] -= 1;
            counts[b] += 1;
            run.labels[i] = b;
            moved = true;
        }
    }
    if passes > 1 {
        run.centers = update(x, &mut run.labels, &run.centers);
        run.inertia = inertia(x, &run.labels, &run.centers);
        run.history.push(run.inertia);
    }
}

/// K-means with k-means++ seeding, Lloyd iterations and a single-point-move
/// refinement; the restart with the lowest inertia wins (ties go to the
/// earliest restart).
pub fn kmeans<T: Real>(x: ArrayView2<'_, T>, k: usize, cfg: &KMeansConfig, seed: u64) -> Result<ClusterResult> {
    let n = x.nrows();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds the {n} samples")));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let x: Array2<f64> = x.mapv(|v| v.to_f64_lossy());
    let mean_var = x.var_axis(Axis(0), 0.0).mean().unwrap_or(0.0);
    let tol_abs = cfg.tol * mean_var;
    let mut rng = stream(seed, Stream::KMeans);
    let mut best: Option<(usize, Run)> = None;
    for restart in 0..cfg.restarts {
        let init = plus_plus(&x, k, &mut rng);
        let mut run = lloyd(&x, init, cfg, tol_abs);
        hartigan(&x, &mut run);
        if best.as_ref().is_none_or(|(_, b)| run.inertia < b.inertia) {
            best = Some((restart, run));
        }
    }
    let (restart, run) = best.unwrap();
    Ok(ClusterResult {
        labels: run.labels,
        centroids: run.centers,
        inertia: run.inertia,
        seed,
        restart,
        iterations: run.iterations,
        inertia_history: run.history,
    })
}

/// Column mean, the `k = 1` solution.
pub fn column_mean<T: Real>(x: ArrayView2<'_, T>) -> Array1<f64> {
    x.mapv(|v| v.to_f64_lossy()).mean_axis(Axis(0)).unwrap()
}
