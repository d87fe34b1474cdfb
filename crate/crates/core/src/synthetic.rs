//! Seeded synthetic data sets used by tests, examples and benchmarks.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::corpus::{parse_labels, Corpus, LabelVector};
use crate::error::Result;
use crate::graph::TextGraph;
use crate::rng::{stream, Stream};

/// Isotropic Gaussian clusters whose centers sit at distance `radius` from
/// the origin along random directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub radius: f64,
    pub noise: f64,
}

impl BlobSpec {
    /// Three clusters that K-means separates perfectly.
    pub fn separated() -> Self {
        Self {
            n: 150,
            k: 3,
            dim: 50,
            radius: 10.0,
            noise: 1.0,
        }
    }

    /// Two clusters with substantial overlap.
    pub fn overlapping() -> Self {
        Self {
            n: 200,
            k: 2,
            dim: 20,
            radius: 1.2,
            noise: 1.0,
        }
    }

}

/// Samples `spec.n` points; sample `i` belongs to cluster `i % k`.
pub fn gaussian_blobs(spec: &BlobSpec, seed: u64) -> (Array2<f32>, LabelVector) {
    let mut rng = stream(seed, Stream::Synthetic);
    let mut centers = Array2::<f64>::zeros((spec.k, spec.dim));
    for mut c in centers.rows_mut() {
        c.mapv_inplace(|_| rng.sample(StandardNormal));
        let norm = c.dot(&c).sqrt().max(f64::MIN_POSITIVE);
        c *= spec.radius / norm;
    }
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k).collect();
    let x = Array2::from_shape_fn((spec.n, spec.dim), |(i, j)| {
        let noise: f64 = rng.sample(StandardNormal);
        (centers[[labels[i], j]] + spec.noise * noise) as f32
    });
    (x, LabelVector::new(&labels))
}

/// Clusters embedded in a low-rank subspace of a high-dimensional space,
/// the spectral shape of typical sentence embeddings.
///
/// Cluster `c` is centered at `radius * e_c` within `k` signal directions
/// and spreads there with `cluster_noise`. `nuisance_dims` further
/// directions carry label-independent variation of scale `nuisance_noise`,
/// and `rogue_dims` more directions carry large label-independent variation
/// of scale `rogue_noise`. All latent coordinates are rotated into `dim` dimensions by
/// a random orthonormal map, and every coordinate gets `ambient_noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceBlobSpec {
    pub n: usize,
    pub k: usize,
    pub dim: usize,
    pub radius: f64,
    pub cluster_noise: f64,
    pub nuisance_dims: usize,
    pub nuisance_noise: f64,
    pub rogue_dims: usize,
    pub rogue_noise: f64,
    pub ambient_noise: f64,
}

impl SubspaceBlobSpec {
    /// The four-cluster, 256-dimensional pipeline benchmark. Two rogue
    /// directions dominate Euclidean distances in the raw space.
    pub fn benchmark() -> Self {
        Self {
            n: 800,
            k: 4,
            dim: 256,
            radius: 4.0,
            cluster_noise: 1.0,
            nuisance_dims: 10,
            nuisance_noise: 0.5,
            rogue_dims: 2,
            rogue_noise: 3.0,
            ambient_noise: 0.1,
        }
    }
}

/// Data seed of the fixed benchmark instance.
pub const BENCHMARK_SEED: u64 = 7;

/// Columns of a random `rows x cols` matrix with orthonormal columns.
fn orthonormal_columns(rows: usize, cols: usize, rng: &mut crate::rng::Rng) -> Array2<f64> {
    let mut q = Array2::<f64>::zeros((rows, cols));
    for j in 0..cols {
        let mut v: ndarray::Array1<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..j {
            let prev = q.column(i);
            let proj = prev.dot(&v);
            v.scaled_add(-proj, &prev);
        }
        let norm = v.dot(&v).sqrt();
        q.column_mut(j).assign(&(v / norm));
    }
    q
}

/// Samples `spec.n` points; sample `i` belongs to cluster `i % k`.
pub fn subspace_blobs(spec: &SubspaceBlobSpec, seed: u64) -> (Array2<f32>, LabelVector) {
    let m = spec.k + spec.nuisance_dims + spec.rogue_dims;
    assert!(m <= spec.dim, "latent coordinates exceed the ambient dimension");
    let mut rng = stream(seed, Stream::Synthetic);
    let basis = orthonormal_columns(spec.dim, m, &mut rng);
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k).collect();
    let latent = Array2::from_shape_fn((spec.n, m), |(i, j)| {
        let g: f64 = rng.sample(StandardNormal);
        if j < spec.k {
            let center = if labels[i] == j { spec.radius } else { 0.0 };
            center + spec.cluster_noise * g
        } else if j < spec.k + spec.nuisance_dims {
            spec.nuisance_noise * g
        } else {
            spec.rogue_noise * g
        }
    });
    let mut x = latent.dot(&basis.t());
    x.mapv_inplace(|v| v + spec.ambient_noise * rng.sample::<f64, _>(StandardNormal));
    (x.mapv(|v| v as f32), LabelVector::new(&labels))
}

/// Two disjoint cliques of `size` nodes each, with i.i.d. standard-normal
/// node features that carry no cluster signal.
pub fn two_cliques(size: usize, feature_dim: usize, seed: u64) -> Result<(TextGraph, Array2<f32>, LabelVector)> {
    let mut edges = Vec::new();
    for offset in [0, size] {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((offset + i, offset + j));
            }
        }
    }
    let g = TextGraph::from_edges(2 * size, edges)?;
    let mut rng = stream(seed, Stream::Synthetic);
    let x = Array2::from_shape_simple_fn((2 * size, feature_dim), || rng.sample::<f32, _>(StandardNormal));
    let labels: Vec<usize> = (0..2 * size).map(|i| i / size).collect();
    Ok((g, x, LabelVector::new(&labels)))
}

pub const TINY_TEXTS: &str = include_str!("../fixtures/tiny_texts.txt");
pub const TINY_LABELS: &str = include_str!("../fixtures/tiny_labels.txt");

/// Twenty short texts on two topics.
pub fn tiny_corpus() -> (Corpus, LabelVector) {
    let texts = TINY_TEXTS.lines().map(str::to_owned).collect();
    let corpus = Corpus::new(texts).expect("bundled corpus is valid");
    let labels = parse_labels(TINY_LABELS).expect("bundled labels are valid");
    (corpus, labels)
}
