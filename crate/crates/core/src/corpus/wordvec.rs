use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::embeddings::EmbeddingMatrix;
use super::text::Corpus;
use crate::error::{Error, Result};

/// Half-width of the uniform range used for out-of-vocabulary vectors.
pub const OOV_RANGE: f32 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    index: HashMap<String, usize>,
    vectors: Vec<f32>,
    dim: usize,
}

impl WordVectorTable {
    pub fn new(words: Vec<String>, vectors: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 || vectors.len() != words.len() * dim {
            return Err(Error::Shape(format!(
                "{} words with dimension {dim} but {} values",
                words.len(),
                vectors.len()
            )));
        }
        if let Some(pos) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.into_iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word {w:?}")));
            }
        }
        Ok(Self {
            index,
            vectors,
            dim,
        })
    }

    /// Text format: header `m d_w`, then `word v1 .. v_dw` per line.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?
            .map_err(|e| Error::io(path, e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: 1, msg: format!("bad header {header:?}: {e}") })?;
        let [m, dim] = dims[..] else {
            return Err(Error::Parse { line: 1, msg: format!("bad header {header:?}") });
        };
        let mut words = Vec::with_capacity(m);
        let mut vectors = Vec::with_capacity(m * dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap().to_owned();
            let before = vectors.len();
            for f in fields {
                vectors.push(f.parse::<f32>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("{f:?}: {e}"),
                })?);
            }
            if vectors.len() - before != dim {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {dim} values, found {}", vectors.len() - before),
                });
            }
            words.push(word);
        }
        if words.len() != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} words, file has {}", words.len()),
            });
        }
        Self::new(words, vectors, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }
}

/// Deterministic stand-in vector for a word missing from the table.
pub fn oov_vector(oov_seed: u64, token: &str, dim: usize) -> Vec<f32> {
    let mut h = Sha256::new();
    h.update(oov_seed.to_le_bytes());
    h.update(token.as_bytes());
    let digest = h.finalize();
    let seed: [u8; 32] = digest.as_slice().try_into().expect("sha256 is 32 bytes");
    let mut rng = ChaCha8Rng::from_seed(seed);
    (0..dim)
        .map(|_| rng.random_range(-OOV_RANGE..=OOV_RANGE))
        .collect()
}

#[derive(Debug, Clone)]
pub struct AveragedVectors {
    pub matrix: EmbeddingMatrix,
    /// Texts with no tokens; their rows are zero.
    pub empty_texts: usize,
    pub oov_tokens: usize,
}

/// Each row is the mean of its tokens' vectors.
pub fn average_word_vectors(
    corpus: &Corpus,
    table: &WordVectorTable,
    oov_seed: u64,
) -> Result<AveragedVectors> {
    let dim = table.dim();
    let mut data = Vec::with_capacity(corpus.len() * dim);
    let mut empty_texts = 0;
    let mut oov_tokens = 0;
    let mut oov_cache: HashMap<String, Vec<f32>> = HashMap::new();
    for doc in corpus.tokens() {
        let mut sum = vec![0f64; dim];
        for tok in &doc {
            let v = match table.get(tok) {
                Some(v) => v,
                None => {
                    oov_tokens += 1;
                    oov_cache
                        .entry(tok.clone())
                        .or_insert_with(|| oov_vector(oov_seed, tok, dim))
                }
            };
            for (s, x) in sum.iter_mut().zip(v) {
                *s += f64::from(*x);
            }
        }
        if doc.is_empty() {
            empty_texts += 1;
            data.extend(std::iter::repeat_n(0f32, dim));
        } else {
            let len = doc.len() as f64;
            data.extend(sum.iter().map(|s| (s / len) as f32));
        }
    }
    if empty_texts > 0 {
        log::warn!("{empty_texts} texts have no tokens; using zero vectors");
    }
    Ok(AveragedVectors {
        matrix: EmbeddingMatrix::new(corpus.len(), dim, data)?,
        empty_texts,
        oov_tokens,
    })
}
