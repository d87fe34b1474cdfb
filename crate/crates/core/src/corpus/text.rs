//! Raw corpora and bag-of-words features.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    texts: Vec<String>,
}

impl Corpus {
    pub fn new(texts: Vec<String>) -> Result<Self> {
        if texts.is_empty() {
            return Err(Error::InvalidArgument("corpus has no texts".into()));
        }
        Ok(Self { texts })
    }

    /// One text per line; every line (including empty ones) is a text.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(raw.lines().map(str::to_owned).collect())
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn tokens(&self) -> Vec<Vec<String>> {
        self.texts.iter().map(|t| tokenize(t)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BowWeighting {
    Binary,
    #[default]
    Tfidf,
}

/// Term order of the columns: first occurrence across the corpus.
pub fn vocabulary(tokens: &[Vec<String>]) -> Vec<String> {
    let mut index = HashMap::new();
    let mut vocab = Vec::new();
    for doc in tokens {
        for t in doc {
            if !index.contains_key(t) {
                index.insert(t.clone(), vocab.len());
                vocab.push(t.clone());
            }
        }
    }
    vocab
}

/// Binary presence or smoothed TF-IDF (`idf = ln((1+n)/(1+df)) + 1`, raw
/// counts as tf, L2-normalized rows).
pub fn bow_features(corpus: &Corpus, weighting: BowWeighting) -> Result<EmbeddingMatrix> {
    let tokens = corpus.tokens();
    let vocab = vocabulary(&tokens);
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let col: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let n = tokens.len();
    let d = vocab.len();
    let mut counts = vec![0f64; n * d];
    for (i, doc) in tokens.iter().enumerate() {
        for t in doc {
            counts[i * d + col[t.as_str()]] += 1.0;
        }
    }
    let data: Vec<f32> = match weighting {
        BowWeighting::Binary => counts.iter().map(|&c| if c > 0.0 { 1.0 } else { 0.0 }).collect(),
        BowWeighting::Tfidf => {
            let mut df = vec![0f64; d];
            for row in counts.chunks_exact(d) {
                for (j, &c) in row.iter().enumerate() {
                    if c > 0.0 {
                        df[j] += 1.0;
                    }
                }
            }
            let idf: Vec<f64> = df
                .iter()
                .map(|&df| ((1.0 + n as f64) / (1.0 + df)).ln() + 1.0)
                .collect();
            let mut out = Vec::with_capacity(n * d);
            for row in counts.chunks_exact(d) {
                let weighted: Vec<f64> = row.iter().zip(&idf).map(|(c, w)| c * w).collect();
                let norm = weighted.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                out.extend(weighted.iter().map(|v| (v * scale) as f32));
            }
            out
        }
    };
    EmbeddingMatrix::new(n, d, data)
}
