//! Independent reference implementations shared by the integration tests
//! and the acceptance target.
#![allow(dead_code)]

pub mod grad;

use std::collections::HashMap;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// Scale-aware relative difference; values below `floor` compare absolutely.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let floor = 1e-6;
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest relative error between `analytic` and a central difference of
/// `f` over each coordinate of `params`.
pub fn fd_max_rel_err(params: &mut [f64], analytic: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    assert_eq!(params.len(), analytic.len());
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + h;
        let up = f(params);
        params[i] = orig - h;
        let down = f(params);
        params[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max(rel_err(analytic[i], numeric));
    }
    worst
}

/// Every permutation of `0..k`.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Best fraction of agreements over all injective relabelings of `pred`.
pub fn brute_force_acc(truth: &[usize], pred: &[usize]) -> f64 {
    let kt = truth.iter().max().map_or(0, |m| m + 1);
    let kp = pred.iter().max().map_or(0, |m| m + 1);
    let k = kt.max(kp);
    let mut best = 0usize;
    for perm in permutations(k) {
        let hits = truth.iter().zip(pred).filter(|&(&t, &p)| perm[p] == t).count();
        best = best.max(hits);
    }
    best as f64 / truth.len() as f64
}

/// Minimum cost over all assignments of rows to distinct columns.
pub fn brute_force_assignment(cost: &[Vec<i64>]) -> i64 {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    let k = rows.max(cols);
    permutations(k)
        .into_iter()
        .map(|perm| {
            (0..rows)
                .filter(|&r| perm[r] < cols)
                .map(|r| cost[r][perm[r]])
                .sum::<i64>()
        })
        .min()
        .unwrap_or(0)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// NMI with geometric normalization from contingency counts.
pub fn direct_nmi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            pxy * (pxy / (ca[&x] as f64 / n * cb[&y] as f64 / n)).ln()
        })
        .sum();
    mi / (ha * hb).sqrt()
}

fn partition_inertia(x: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> f64 {
    let d = x.ncols();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for j in 0..d {
            sums[l][j] += x[[i, j]];
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            (0..d)
                .map(|j| {
                    let c = sums[l][j] / counts[l] as f64;
                    (x[[i, j]] - c).powi(2)
                })
                .sum::<f64>()
        })
        .sum()
}

/// Minimum within-cluster sum of squares over every partition of the rows
/// into exactly `k` non-empty groups.
pub fn exhaustive_min_inertia(x: ArrayView2<'_, f64>, k: usize) -> f64 {
    let n = x.nrows();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    // Restricted growth strings enumerate each set partition once.
    fn recurse(
        i: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        x: ArrayView2<'_, f64>,
        best: &mut f64,
    ) {
        let n = labels.len();
        if n - i < k - used {
            return;
        }
        if i == n {
            if used == k {
                *best = best.min(partition_inertia(x, labels, k));
            }
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels[i] = l;
            recurse(i + 1, used.max(l + 1), k, labels, x, best);
        }
    }
    recurse(0, 0, k, &mut labels, x, &mut best);
    best
}

/// `D^-1/2 (A + I) D^-1/2` built densely from an edge list.
pub fn dense_normalized_adjacency(n: usize, edges: &[(usize, usize)]) -> Array2<f64> {
    let mut a = Array2::<f64>::eye(n);
    for &(i, j) in edges {
        a[[i, j]] = 1.0;
        a[[j, i]] = 1.0;
    }
    let deg: Vec<f64> = a.rows().into_iter().map(|r| r.sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (deg[i] * deg[j]).sqrt())
}

/// Random simple graph on `n` nodes with edge probability `p`.
pub fn random_edges(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Row-stochastic matrix with strictly positive entries.
pub fn random_stochastic(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let mut m = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(0.01..1.0));
    for mut r in m.rows_mut() {
        let s = r.sum();
        r /= s;
    }
    m
}
