use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{FeatureSource, PipelineConfig, PipelineKind, Reseed};
use crate::autoencoder::{train_autoencoder, AutoencoderModel, TrainConfig};
use crate::checkpoint::{write_checkpoint, Checkpoint};
use crate::corpus::{
    average_word_vectors, bow_features, load_embeddings, read_labels, write_embeddings, write_labels,
    BowWeighting, Corpus, EmbeddingMatrix, LabelVector, WordVectorTable,
};
use crate::error::{Error, Result};
use crate::gae::{train_stn_gae, GaeConfig};
use crate::graph::{knn_graph_from_features, TextGraph};
use crate::metrics::{clustering_accuracy, kmeans, nmi, KMeansConfig, MetricReport};
use crate::nn::NetworkSpec;
use crate::sca::{finetune_sca, ScaConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Feature matrix plus optional ground truth and row ids.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub x: Array2<f32>,
    pub labels: Option<LabelVector>,
    pub ids: Option<Vec<String>>,
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    let read_corpus = || -> Result<Corpus> { Corpus::read(cfg.corpus.as_ref().unwrap()) };
    let matrix: EmbeddingMatrix = match cfg.features {
        FeatureSource::Embeddings => load_embeddings(cfg.embeddings.as_ref().unwrap())?,
        FeatureSource::BowTfidf => bow_features(&read_corpus()?, BowWeighting::Tfidf)?,
        FeatureSource::BowBinary => bow_features(&read_corpus()?, BowWeighting::Binary)?,
        FeatureSource::WordVectors => {
            let table = WordVectorTable::read(cfg.word_vectors.as_ref().unwrap())?;
            let avg = average_word_vectors(&read_corpus()?, &table, cfg.oov_seed)?;
            if avg.oov_tokens > 0 || avg.empty_texts > 0 {
                log::info!(
                    "word-vector features: {} out-of-vocabulary tokens, {} empty texts",
                    avg.oov_tokens,
                    avg.empty_texts
                );
            }
            avg.matrix
        }
    };
    let labels = cfg.labels.as_ref().map(read_labels).transpose()?;
    if let Some(l) = &labels {
        if l.len() != matrix.n() {
            return Err(Error::Config(format!("{} labels for {} samples", l.len(), matrix.n())));
        }
    }
    Ok(Inputs {
        x: matrix.to_array(),
        ids: matrix.ids().map(<[String]>::to_vec),
        labels,
    })
}

/// Per-run outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    /// K-means objective on the final representation, when K-means produced the labels.
    pub inertia: Option<f64>,
    /// Last training loss of the representation network.
    pub final_loss: Option<f64>,
    pub sca_epochs: Option<usize>,
    pub sca_converged: Option<bool>,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub pipeline: PipelineKind,
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub latent_dim: usize,
    pub metrics: Option<MetricReport>,
    pub runs: Vec<RunRecord>,
    pub config: PipelineConfig,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone)]
struct Trained {
    latent: Array2<f32>,
    labels: Option<Vec<usize>>,
    log: Vec<Value>,
    checkpoint: Option<Checkpoint>,
    final_loss: Option<f64>,
    sca: Option<(usize, bool)>,
}

fn phase_lines(phase: &str, losses: &[f64]) -> Vec<Value> {
    losses
        .iter()
        .enumerate()
        .map(|(epoch, loss)| serde_json::json!({"phase": phase, "epoch": epoch, "loss": loss}))
        .collect()
}

fn network_spec(layers: &str, d: usize, tied: bool) -> Result<NetworkSpec> {
    let mut spec = NetworkSpec::parse(layers, d).map_err(|e| Error::Config(e.to_string()))?;
    spec.tied_decoder = tied;
    Ok(spec)
}

fn pretrain(
    cfg: &PipelineConfig,
    x: ArrayView2<'_, f32>,
    layers: &str,
    epochs: usize,
    seed: u64,
) -> Result<(AutoencoderModel<f32>, Vec<f64>)> {
    let spec = network_spec(layers, x.ncols(), cfg.tied_decoder)?;
    let train = TrainConfig {
        epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.ae_lr,
        seed,
    };
    train_autoencoder(x, &spec, &train)
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    inputs: &'a Inputs,
    k: usize,
    graph: Option<TextGraph>,
    pretrained: Option<(u64, AutoencoderModel<f32>, Vec<f64>)>,
    cached: Option<(u64, Trained)>,
}

impl Runner<'_> {
    fn train(&mut self, train_seed: u64, run_seed: u64) -> Result<Trained> {
        let cfg = self.cfg;
        let x = self.inputs.x.view();
        match cfg.pipeline {
            PipelineKind::Baseline => Ok(Trained {
                latent: self.inputs.x.clone(),
                labels: None,
                log: Vec::new(),
                checkpoint: None,
                final_loss: None,
                sca: None,
            }),
            PipelineKind::Ae => {
                if let Some((s, t)) = &self.cached {
                    if *s == train_seed {
                        return Ok(t.clone());
                    }
                }
                let (model, history) = pretrain(cfg, x, &cfg.ae_layers, cfg.ae_epochs, train_seed)?;
                let trained = Trained {
                    latent: model.encode(x)?,
                    labels: None,
                    log: phase_lines("pretrain", &history),
                    checkpoint: Some(Checkpoint::from_autoencoder(&model)),
                    final_loss: history.last().copied(),
                    sca: None,
                };
                self.cached = Some((train_seed, trained.clone()));
                Ok(trained)
            }
            PipelineKind::StnGae => {
                if let Some((s, t)) = &self.cached {
                    if *s == train_seed {
                        return Ok(t.clone());
                    }
                }
                if self.graph.is_none() {
                    let g = knn_graph_from_features(x, cfg.knn_k.min(x.nrows().saturating_sub(1)).max(1))?;
                    log::info!("text graph: {} nodes, {} edges", g.n(), g.num_edges());
                    self.graph = Some(g);
                }
                let spec = network_spec(&cfg.gae_layers, x.ncols(), false)?;
                let gcfg = GaeConfig {
                    epochs: cfg.gae_epochs,
                    learning_rate: cfg.gae_lr,
                    neg_ratio: cfg.neg_ratio,
                    seed: train_seed,
                };
                let out = train_stn_gae(x, self.graph.as_ref().unwrap(), &spec, &gcfg)?;
                let trained = Trained {
                    latent: out.latent,
                    labels: None,
                    log: phase_lines("gae", &out.history),
                    checkpoint: Some(Checkpoint::from_gae(&out.model)),
                    final_loss: out.history.last().copied(),
                    sca: None,
                };
                self.cached = Some((train_seed, trained.clone()));
                Ok(trained)
            }
            PipelineKind::ScaAe => {
                let reuse = matches!(&self.pretrained, Some((s, _, _)) if *s == train_seed);
                if !reuse {
                    let (model, history) =
                        pretrain(cfg, x, &cfg.sca_layers, cfg.sca_pretrain_epochs, train_seed)?;
                    self.pretrained = Some((train_seed, model, history));
                }
                let (_, model, history) = self.pretrained.as_ref().unwrap();
                let scfg = ScaConfig {
                    learning_rate: cfg.sca_lr,
                    momentum: cfg.sca_momentum,
                    batch_size: cfg.batch_size,
                    max_epochs: cfg.sca_max_epochs,
                    tol: cfg.sca_tol,
                    kmeans_restarts: cfg.kmeans_restarts,
                    seed: run_seed,
                };
                let out = finetune_sca(model, x, self.k, &scfg, self.inputs.labels.as_ref())?;
                let mut log = phase_lines("pretrain", history);
                for e in &out.history {
                    let mut v = serde_json::to_value(e).expect("epoch serializes");
                    v.as_object_mut().unwrap().insert("phase".into(), "sca".into());
                    log.push(v);
                }
                Ok(Trained {
                    checkpoint: Some(Checkpoint::from_sca(&model.spec, &out.encoder, &out.centers)),
                    latent: out.latent,
                    labels: Some(out.labels),
                    log,
                    final_loss: history.last().copied(),
                    sca: Some((out.history.len(), out.converged)),
                })
            }
        }
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_log(path: &Path, lines: &[Value]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        serde_json::to_writer(&mut w, line).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads the configured inputs and runs the pipeline, writing artifacts
/// under `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<PipelineReport> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    run_with_inputs(cfg, &inputs, Some(out))
}

/// Runs the pipeline on in-memory inputs. Artifacts are written only when
/// `out` is given; file-path settings in `cfg` are ignored.
pub fn run_with_inputs(cfg: &PipelineConfig, inputs: &Inputs, out: Option<&Path>) -> Result<PipelineReport> {
    let n = inputs.x.nrows();
    let k = match (cfg.clusters, &inputs.labels) {
        (Some(k), _) => k,
        (None, Some(l)) => l.k(),
        (None, None) => return Err(Error::Config("set clusters or provide labels".into())),
    };
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot form {k} clusters from {n} samples")));
    }
    if let Some(l) = &inputs.labels {
        if l.len() != n {
            return Err(Error::Config(format!("{} labels for {n} samples", l.len())));
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir.join("runs")).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("config.toml"), cfg.to_toml()?.as_bytes())?;
    }
    let km_cfg = KMeansConfig {
        restarts: cfg.kmeans_restarts,
        max_iters: cfg.kmeans_max_iters,
        tol: cfg.kmeans_tol,
    };
    let mut runner = Runner {
        cfg,
        inputs,
        k,
        graph: None,
        pretrained: None,
        cached: None,
    };
    let mut records = Vec::with_capacity(cfg.runs);
    let mut latent_dim = inputs.x.ncols();
    for r in 0..cfg.runs {
        let seed = cfg.base_seed + r as u64;
        let train_seed = match cfg.reseed {
            Reseed::Full => seed,
            Reseed::KmeansOnly => cfg.base_seed,
        };
        log::info!("{} run {r} (seed {seed})", cfg.pipeline.name());
        let trained = runner.train(train_seed, seed)?;
        latent_dim = trained.latent.ncols();
        let (pred, inertia) = match &trained.labels {
            Some(l) => (l.clone(), None),
            None => {
                let km = kmeans(trained.latent.view(), k, &km_cfg, seed)?;
                (km.labels, Some(km.inertia))
            }
        };
        let (acc, score) = match &inputs.labels {
            Some(t) => {
                let p = LabelVector::new(&pred);
                (Some(clustering_accuracy(t, &p)?), Some(nmi(t, &p, cfg.nmi_norm)?))
            }
            None => (None, None),
        };
        if let Some(dir) = out {
            let run_dir = dir.join("runs").join(format!("run_{r}"));
            fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
            write_log(&run_dir.join("log.jsonl"), &trained.log)?;
            write_labels(&pred, run_dir.join("labels.txt"))?;
            if cfg.save_latent {
                let m = EmbeddingMatrix::with_ids(
                    n,
                    latent_dim,
                    trained.latent.iter().copied().collect(),
                    inputs.ids.clone(),
                )?;
                write_embeddings(&m, run_dir.join("latent.stce"))?;
            }
            if let (true, Some(ck)) = (cfg.save_checkpoints, &trained.checkpoint) {
                write_checkpoint(ck, run_dir.join("model.stck"))?;
            }
        }
        records.push(RunRecord {
            run: r,
            seed,
            acc,
            nmi: score,
            inertia,
            final_loss: trained.final_loss,
            sca_epochs: trained.sca.map(|s| s.0),
            sca_converged: trained.sca.map(|s| s.1),
        });
    }
    let metrics = match &inputs.labels {
        Some(_) => Some(MetricReport::from_scores(
            records.iter().map(|r| r.seed).collect(),
            records.iter().map(|r| r.acc.unwrap()).collect(),
            records.iter().map(|r| r.nmi.unwrap()).collect(),
        )?),
        None => None,
    };
    let report = PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        pipeline: cfg.pipeline,
        n,
        d: inputs.x.ncols(),
        clusters: k,
        latent_dim,
        metrics,
        runs: records,
        config: cfg.clone(),
    };
    if let Some(dir) = out {
        write_file(&dir.join("report.json"), report.to_json().as_bytes())?;
    }
    Ok(report)
}
