use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Ground-truth or predicted cluster labels, densely relabeled to `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    /// Relabels arbitrary non-negative ids to `0..k`, preserving the order of
    /// the original values.
    pub fn new(raw: &[usize]) -> Self {
        let mut map = BTreeMap::new();
        for &l in raw {
            map.entry(l).or_insert(0usize);
        }
        for (i, v) in map.values_mut().enumerate() {
            *v = i;
        }
        Self {
            labels: raw.iter().map(|l| map[l]).collect(),
            k: map.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl From<Vec<usize>> for LabelVector {
    fn from(v: Vec<usize>) -> Self {
        LabelVector::new(&v)
    }
}

/// One non-negative integer per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text)
}

pub fn parse_labels(text: &str) -> Result<LabelVector> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        raw.push(line.parse::<usize>().map_err(|e| Error::Parse {
            line: i + 1,
            msg: format!("{line:?}: {e}"),
        })?);
    }
    Ok(LabelVector::new(&raw))
}

pub fn write_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
