//! Binary model checkpoints.
//!
//! Little-endian layout: magic `STCK`, `u32` version, `u8` model kind,
//! `u8` tied-decoder flag, `u32` count plus `u64` layer sizes, `u32` count
//! plus `u8` activation codes, then `u32` tensor count and per tensor a `u8`
//! rank, `u64` dims and row-major `f32` values.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::autoencoder::AutoencoderModel;
use crate::corpus::Cursor;
use crate::error::{Error, Result};
use crate::gae::{GaeModel, GcnLayer};
use crate::nn::{Activation, DenseLayer, NetworkSpec};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"STCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Autoencoder,
    Gae,
    /// Fine-tuned encoder plus cluster centers.
    Sca,
}

impl ModelKind {
    fn code(self) -> u8 {
        match self {
            ModelKind::Autoencoder => 0,
            ModelKind::Gae => 1,
            ModelKind::Sca => 2,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(ModelKind::Autoencoder),
            1 => Ok(ModelKind::Gae),
            2 => Ok(ModelKind::Sca),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown model kind {other}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    fn matrix(a: &Array2<f32>) -> Self {
        Self {
            shape: a.shape().to_vec(),
            data: a.iter().copied().collect(),
        }
    }

    fn vector(a: &Array1<f32>) -> Self {
        Self {
            shape: vec![a.len()],
            data: a.to_vec(),
        }
    }

    fn to_matrix(&self, rows: usize, cols: usize) -> Result<Array2<f32>> {
        if self.shape != [rows, cols] {
            return Err(Error::Shape(format!("expected a {rows}x{cols} tensor, found {:?}", self.shape)));
        }
        Ok(Array2::from_shape_vec((rows, cols), self.data.clone()).unwrap())
    }

    fn to_vector(&self, len: usize) -> Result<Array1<f32>> {
        if self.shape != [len] {
            return Err(Error::Shape(format!("expected a length-{len} tensor, found {:?}", self.shape)));
        }
        Ok(Array1::from(self.data.clone()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub spec: NetworkSpec,
    pub tensors: Vec<Tensor>,
}

fn dense_tensors(layers: &[DenseLayer<f32>], out: &mut Vec<Tensor>) {
    for l in layers {
        out.push(Tensor::matrix(&l.weights));
        out.push(Tensor::vector(&l.bias));
    }
}

fn dense_layers<'a>(
    tensors: &mut impl Iterator<Item = &'a Tensor>,
    sizes: &[usize],
    activations: &[Activation],
) -> Result<Vec<DenseLayer<f32>>> {
    sizes
        .windows(2)
        .zip(activations)
        .map(|(w, &act)| {
            let weights = tensors.next().ok_or_else(missing)?.to_matrix(w[0], w[1])?;
            let bias = tensors.next().ok_or_else(missing)?.to_vector(w[1])?;
            DenseLayer::new(weights, bias, act)
        })
        .collect()
}

fn missing() -> Error {
    Error::Truncated("checkpoint holds fewer tensors than its layer sizes require".into())
}

impl Checkpoint {
    pub fn from_autoencoder(model: &AutoencoderModel<f32>) -> Self {
        let mut tensors = Vec::new();
        dense_tensors(&model.encoder, &mut tensors);
        dense_tensors(&model.decoder, &mut tensors);
        Self {
            kind: ModelKind::Autoencoder,
            spec: model.spec.clone(),
            tensors,
        }
    }

    pub fn from_gae(model: &GaeModel<f32>) -> Self {
        Self {
            kind: ModelKind::Gae,
            spec: model.spec.clone(),
            tensors: model.layers.iter().map(|l| Tensor::matrix(&l.weights)).collect(),
        }
    }

    pub fn from_sca(spec: &NetworkSpec, encoder: &[DenseLayer<f32>], centers: &Array2<f32>) -> Self {
        let mut tensors = Vec::new();
        dense_tensors(encoder, &mut tensors);
        tensors.push(Tensor::matrix(centers));
        Self {
            kind: ModelKind::Sca,
            spec: spec.clone(),
            tensors,
        }
    }

    fn expect_kind(&self, kind: ModelKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!(
                "checkpoint holds a {:?} model, not {kind:?}",
                self.kind
            )));
        }
        Ok(())
    }

    fn expect_count(&self, count: usize) -> Result<()> {
        if self.tensors.len() != count {
            return Err(Error::Shape(format!(
                "checkpoint holds {} tensors, expected {count}",
                self.tensors.len()
            )));
        }
        Ok(())
    }

    pub fn into_autoencoder(&self) -> Result<AutoencoderModel<f32>> {
        self.expect_kind(ModelKind::Autoencoder)?;
        let layers = self.spec.num_layers();
        self.expect_count(4 * layers)?;
        let mut it = self.tensors.iter();
        let encoder = dense_layers(&mut it, &self.spec.layer_sizes, &self.spec.activations)?;
        let rev: Vec<usize> = self.spec.layer_sizes.iter().rev().copied().collect();
        let dec_acts: Vec<Activation> = (0..layers)
            .map(|l| if l + 1 == layers { Activation::Linear } else { Activation::Relu })
            .collect();
        let decoder = dense_layers(&mut it, &rev, &dec_acts)?;
        Ok(AutoencoderModel {
            spec: self.spec.clone(),
            encoder,
            decoder,
        })
    }

    pub fn into_gae(&self) -> Result<GaeModel<f32>> {
        self.expect_kind(ModelKind::Gae)?;
        self.expect_count(self.spec.num_layers())?;
        let layers = self
            .spec
            .layer_sizes
            .windows(2)
            .zip(&self.spec.activations)
            .zip(&self.tensors)
            .map(|((w, &activation), t)| {
                Ok(GcnLayer {
                    weights: t.to_matrix(w[0], w[1])?,
                    activation,
                })
            })
            .collect::<Result<_>>()?;
        Ok(GaeModel {
            spec: self.spec.clone(),
            layers,
        })
    }

    /// Encoder layers and the `k x z` center matrix.
    pub fn into_sca(&self) -> Result<(Vec<DenseLayer<f32>>, Array2<f32>)> {
        self.expect_kind(ModelKind::Sca)?;
        self.expect_count(2 * self.spec.num_layers() + 1)?;
        let mut it = self.tensors.iter();
        let encoder = dense_layers(&mut it, &self.spec.layer_sizes, &self.spec.activations)?;
        let centers = it.next().ok_or_else(missing)?;
        let k = centers.shape.first().copied().unwrap_or(0);
        let centers = centers.to_matrix(k, self.spec.latent_dim())?;
        Ok((encoder, centers))
    }
}

pub fn encode_checkpoint(c: &Checkpoint, w: &mut impl Write) -> std::io::Result<()> {
    w.write_all(&CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&[c.kind.code(), u8::from(c.spec.tied_decoder)])?;
    w.write_all(&(c.spec.layer_sizes.len() as u32).to_le_bytes())?;
    for &s in &c.spec.layer_sizes {
        w.write_all(&(s as u64).to_le_bytes())?;
    }
    w.write_all(&(c.spec.activations.len() as u32).to_le_bytes())?;
    for a in &c.spec.activations {
        w.write_all(&[a.code()])?;
    }
    w.write_all(&(c.tensors.len() as u32).to_le_bytes())?;
    for t in &c.tensors {
        w.write_all(&[t.shape.len() as u8])?;
        for &d in &t.shape {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in &t.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut cur = Cursor::new(bytes);
    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            expected: CHECKPOINT_MAGIC,
            found: magic,
        });
    }
    let version = cur.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let flags = cur.take(2, "flags")?;
    let kind = ModelKind::from_code(flags[0])?;
    let tied = flags[1] != 0;
    let n_sizes = cur.u32("layer count")? as usize;
    let layer_sizes = (0..n_sizes)
        .map(|_| cur.u64("layer size").map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let n_acts = cur.u32("activation count")? as usize;
    let activations = cur
        .take(n_acts, "activations")?
        .iter()
        .map(|&c| {
            Activation::from_code(c).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("unknown activation code {c}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spec = NetworkSpec::with_activations(layer_sizes, activations)?;
    spec.tied_decoder = tied;
    let n_tensors = cur.u32("tensor count")? as usize;
    let mut tensors = Vec::with_capacity(n_tensors.min(1024));
    for _ in 0..n_tensors {
        let rank = cur.take(1, "tensor rank")?[0] as usize;
        let shape = (0..rank)
            .map(|_| cur.u64("tensor dim").map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let count = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| Error::Truncated(format!("tensor shape {shape:?} overflows")))?;
        let data = cur
            .take(count, "tensor values")?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(Tensor { shape, data });
    }
    if !cur.is_done() {
        return Err(Error::Parse {
            line: 0,
            msg: "trailing bytes after the last tensor".into(),
        });
    }
    Ok(Checkpoint { kind, spec, tensors })
}

pub fn write_checkpoint(c: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_checkpoint(c, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
