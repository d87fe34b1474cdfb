//! K-means, clustering accuracy and normalized mutual information.

mod hungarian;
mod kmeans;
mod scores;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub use hungarian::linear_assignment;
pub use kmeans::{column_mean, kmeans, ClusterResult, KMeansConfig};
pub use scores::{clustering_accuracy, contingency, nmi, NmiNormalization};

use crate::corpus::LabelVector;
use crate::error::{Error, Result};
use crate::nn::Real;

/// Mean and population standard deviation of ACC and NMI over several runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub acc: Vec<f64>,
    pub nmi: Vec<f64>,
}

impl MetricReport {
    pub fn from_scores(seeds: Vec<u64>, acc: Vec<f64>, nmi: Vec<f64>) -> Result<Self> {
        if acc.is_empty() || acc.len() != nmi.len() || acc.len() != seeds.len() {
            return Err(Error::InvalidArgument(format!(
                "mismatched score lists: {} seeds, {} acc, {} nmi",
                seeds.len(),
                acc.len(),
                nmi.len()
            )));
        }
        let (acc_mean, acc_std) = mean_std(&acc);
        let (nmi_mean, nmi_std) = mean_std(&nmi);
        Ok(Self {
            acc_mean,
            acc_std,
            nmi_mean,
            nmi_std,
            runs: acc.len(),
            seeds,
            acc,
            nmi,
        })
    }
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}

/// Runs K-means with seeds `base_seed..base_seed + runs` and scores each run
/// against `truth`.
pub fn evaluate_pipeline<T: Real>(
    z: ArrayView2<'_, T>,
    truth: &LabelVector,
    k: usize,
    runs: usize,
    base_seed: u64,
    cfg: &KMeansConfig,
    norm: NmiNormalization,
) -> Result<MetricReport> {
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let mut seeds = Vec::with_capacity(runs);
    let mut acc = Vec::with_capacity(runs);
    let mut scores = Vec::with_capacity(runs);
    for r in 0..runs as u64 {
        let seed = base_seed + r;
        let result = kmeans(z, k, cfg, seed)?;
        let pred = LabelVector::new(&result.labels);
        seeds.push(seed);
        acc.push(clustering_accuracy(truth, &pred)?);
        scores.push(nmi(truth, &pred, norm)?);
    }
    MetricReport::from_scores(seeds, acc, scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_run_matches_direct_call() {
        let z = array![[0.0f64, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0], [0.0, 0.2]];
        let truth = LabelVector::new(&[0, 0, 1, 1, 0]);
        let cfg = KMeansConfig::default();
        let rep = evaluate_pipeline(z.view(), &truth, 2, 1, 9, &cfg, NmiNormalization::Geometric).unwrap();
        let direct = kmeans(z.view(), 2, &cfg, 9).unwrap();
        let pred = LabelVector::new(&direct.labels);
        assert_eq!(rep.acc_mean, clustering_accuracy(&truth, &pred).unwrap());
        assert_eq!(rep.nmi_mean, nmi(&truth, &pred, NmiNormalization::Geometric).unwrap());
        assert_eq!(rep.seeds, vec![9]);
        assert_eq!(rep.acc_std, 0.0);
    }

    #[test]
    fn deterministic_data_has_zero_spread() {
        let z = array![[0.0f32], [0.0], [10.0], [10.0]];
        let truth = LabelVector::new(&[0, 0, 1, 1]);
        let rep =
            evaluate_pipeline(z.view(), &truth, 2, 5, 0, &KMeansConfig::default(), NmiNormalization::Geometric)
                .unwrap();
        assert_eq!(rep.seeds, vec![0, 1, 2, 3, 4]);
        assert_eq!((rep.acc_mean, rep.acc_std, rep.nmi_std), (1.0, 0.0, 0.0));
    }

    #[test]
    fn zero_runs_rejected() {
        let z = array![[0.0f64]];
        let truth = LabelVector::new(&[0]);
        assert!(evaluate_pipeline(z.view(), &truth, 1, 0, 0, &KMeansConfig::default(), NmiNormalization::Max).is_err());
    }

    #[test]
    fn population_std() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    }
}
