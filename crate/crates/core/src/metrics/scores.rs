use serde::{Deserialize, Serialize};

use super::hungarian::linear_assignment;
use crate::corpus::LabelVector;
use crate::error::{Error, Result};

fn check_lengths(truth: &LabelVector, pred: &LabelVector) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(Error::Shape(format!(
            "label vectors differ in length: {} vs {}",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("label vectors are empty".into()));
    }
    Ok(())
}

/// `table[p][t]` counts samples with predicted cluster `p` and true class `t`.
pub fn contingency(truth: &LabelVector, pred: &LabelVector) -> Result<Vec<Vec<u64>>> {
    check_lengths(truth, pred)?;
    let mut table = vec![vec![0u64; truth.k()]; pred.k()];
    for (&t, &p) in truth.labels().iter().zip(pred.labels()) {
        table[p][t] += 1;
    }
    Ok(table)
}

/// Fraction of samples correctly labeled under the best one-to-one mapping
/// from predicted clusters to true classes.
pub fn clustering_accuracy(truth: &LabelVector, pred: &LabelVector) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let cost: Vec<Vec<i64>> = table
        .iter()
        .map(|row| row.iter().map(|&c| -(c as i64)).collect())
        .collect();
    let (_, total) = linear_assignment(&cost);
    Ok((-total) as f64 / truth.len() as f64)
}

/// How the mutual information is normalized by the two entropies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmiNormalization {
    #[default]
    Geometric,
    Arithmetic,
    Max,
    Min,
}

impl NmiNormalization {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Self::Geometric => (a * b).sqrt(),
            Self::Arithmetic => 0.5 * (a + b),
            Self::Max => a.max(b),
            Self::Min => a.min(b),
        }
    }
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with natural-log entropies. Two
/// single-cluster partitions score 1; otherwise a zero entropy scores 0.
pub fn nmi(truth: &LabelVector, pred: &LabelVector, norm: NmiNormalization) -> Result<f64> {
    let table = contingency(truth, pred)?;
    let n = truth.len() as f64;
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..truth.k()).map(|t| table.iter().map(|r| r[t]).sum()).collect();
    let h_pred = entropy(row_sums.iter().copied(), n);
    let h_true = entropy(col_sums.iter().copied(), n);
    if h_pred == 0.0 && h_true == 0.0 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_true == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (p, row) in table.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * ((n * c) / (row_sums[p] as f64 * col_sums[t] as f64)).ln();
            }
        }
    }
    Ok((mi / norm.combine(h_true, h_pred)).clamp(0.0, 1.0))
}
