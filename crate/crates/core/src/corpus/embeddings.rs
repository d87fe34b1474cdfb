//! Embedding matrices and the STCE binary container.
//!
//! Layout (little-endian):
//!
//! ```text
//! "STCE" | version u32 = 1 | n u64 | d u64 | n*d f32 row-major | hasIds u8
//! [ n x (len u32, utf-8 bytes) ]   when hasIds == 1
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const STCE_MAGIC: [u8; 4] = *b"STCE";
pub const STCE_VERSION: u32 = 1;

/// Row-major `n x d` matrix of finite `f32` values, one row per text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    d: usize,
    data: Vec<f32>,
    ids: Option<Vec<String>>,
}

impl EmbeddingMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        Self::with_ids(n, d, data, None)
    }

    pub fn with_ids(n: usize, d: usize, data: Vec<f32>, ids: Option<Vec<String>>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Shape(format!("embedding matrix must be non-empty, got {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::Shape(format!(
                "data length {} does not match {n}x{d}",
                data.len()
            )));
        }
        check_finite(&data, d)?;
        if let Some(ids) = &ids {
            if ids.len() != n {
                return Err(Error::Shape(format!("{} ids for {n} rows", ids.len())));
            }
            let mut seen = HashSet::with_capacity(n);
            for id in ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::InvalidArgument(format!("duplicate text id {id:?}")));
                }
            }
        }
        Ok(Self { n, d, data, ids })
    }

    pub fn from_array(a: ArrayView2<'_, f32>) -> Result<Self> {
        let (n, d) = a.dim();
        Self::new(n, d, a.iter().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn view(&self) -> ArrayView2<'_, f32> {
        ArrayView2::from_shape((self.n, self.d), &self.data).expect("shape checked at construction")
    }

    pub fn to_array(&self) -> Array2<f32> {
        self.view().to_owned()
    }

    pub fn to_array_f64(&self) -> Array2<f64> {
        self.view().mapv(f64::from)
    }
}

fn check_finite(data: &[f32], d: usize) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(pos) => Err(Error::NonFinite {
            row: pos / d,
            col: pos % d,
        }),
        None => Ok(()),
    }
}

pub fn write_embeddings(m: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    // A matrix can only be built finite, but refuse anyway rather than emit a bad file.
    check_finite(&m.data, m.d)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_stce(m, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_stce(m: &EmbeddingMatrix, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(&STCE_MAGIC)?;
    w.write_all(&STCE_VERSION.to_le_bytes())?;
    w.write_all(&(m.n as u64).to_le_bytes())?;
    w.write_all(&(m.d as u64).to_le_bytes())?;
    for v in &m.data {
        w.write_all(&v.to_le_bytes())?;
    }
    match &m.ids {
        None => w.write_all(&[0u8])?,
        Some(ids) => {
            w.write_all(&[1u8])?;
            for id in ids {
                w.write_all(&(id.len() as u32).to_le_bytes())?;
                w.write_all(id.as_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    decode_stce(&bytes)
}

pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub(crate) fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }

    pub(crate) fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Truncated(format!(
                "needed {len} bytes for {what} at offset {}, {} available",
                self.pos,
                self.buf.len() - self.pos
            ))),
        }
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_stce(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let mut cur = Cursor::new(bytes);
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != STCE_MAGIC {
        return Err(Error::BadMagic {
            expected: STCE_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32("version")?;
    if version != STCE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = cur.u64("row count")? as usize;
    let d = cur.u64("column count")? as usize;
    let count = n
        .checked_mul(d)
        .ok_or_else(|| Error::Truncated(format!("header declares {n}x{d} values")))?;
    let payload_len = count
        .checked_mul(4)
        .ok_or_else(|| Error::Truncated(format!("header declares {n}x{d} values")))?;
    let payload = cur.take(payload_len, "payload")?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let ids = match cur.take(1, "id flag")?[0] {
        0 => None,
        1 => {
            let mut ids = Vec::with_capacity(n);
            for _ in 0..n {
                let len = cur.u32("id length")? as usize;
                let raw = cur.take(len, "id")?;
                let s = std::str::from_utf8(raw)
                    .map_err(|e| Error::Parse {
                        line: 0,
                        msg: format!("id is not utf-8: {e}"),
                    })?
                    .to_owned();
                ids.push(s);
            }
            Some(ids)
        }
        other => {
            return Err(Error::Parse {
                line: 0,
                msg: format!("id flag must be 0 or 1, got {other}"),
            })
        }
    };
    EmbeddingMatrix::with_ids(n, d, data, ids)
}

/// Imports a tab-separated matrix: one row per line, one float per field.
/// A non-numeric first field is taken as the row's text id.
pub fn read_embeddings_tsv(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    let mut ids = Vec::new();
    let mut d = None;
    let mut n = 0;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split('\t').collect();
        if fields[0].trim().parse::<f32>().is_err() {
            ids.push(fields.remove(0).to_owned());
        }
        let width = fields.len();
        match d {
            None => d = Some(width),
            Some(d) if d != width => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {d} values, found {width}"),
                })
            }
            _ => {}
        }
        for f in fields {
            let v = f.trim().parse::<f32>().map_err(|e| Error::Parse {
                line: lineno + 1,
                msg: format!("{f:?}: {e}"),
            })?;
            data.push(v);
        }
        n += 1;
    }
    let ids = match ids.len() {
        0 => None,
        k if k == n => Some(ids),
        _ => {
            return Err(Error::Parse {
                line: 0,
                msg: "text ids present on some rows but not others".into(),
            })
        }
    };
    EmbeddingMatrix::with_ids(n, d.unwrap_or(0), data, ids)
}

/// Reads STCE, or TSV when the file extension is `.tsv`.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => read_embeddings_tsv(path),
        _ => read_embeddings(path),
    }
}
