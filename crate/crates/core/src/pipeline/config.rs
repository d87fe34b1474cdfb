use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::NmiNormalization;
use crate::nn::NetworkSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    /// K-means directly on the input features.
    Baseline,
    Ae,
    StnGae,
    ScaAe,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Baseline => "baseline",
            PipelineKind::Ae => "ae",
            PipelineKind::StnGae => "stn_gae",
            PipelineKind::ScaAe => "sca_ae",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSource {
    /// A precomputed matrix (`.stce` or `.tsv`).
    Embeddings,
    BowTfidf,
    BowBinary,
    /// Averaged word vectors over the corpus tokens.
    WordVectors,
}

/// Which parts of a pipeline a repeated run re-seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reseed {
    /// Every run retrains its networks with its own seed.
    Full,
    /// Networks are trained once with `base_seed`; only clustering varies.
    KmeansOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub pipeline: PipelineKind,
    pub features: FeatureSource,
    pub embeddings: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub word_vectors: Option<PathBuf>,
    /// Number of clusters; defaults to the number of distinct labels.
    pub clusters: Option<usize>,

    pub ae_layers: String,
    pub ae_epochs: usize,
    pub ae_lr: f64,
    pub batch_size: usize,
    pub tied_decoder: bool,

    pub sca_layers: String,
    pub sca_pretrain_epochs: usize,
    pub sca_lr: f64,
    pub sca_momentum: f64,
    pub sca_max_epochs: usize,
    pub sca_tol: f64,

    pub gae_layers: String,
    pub gae_epochs: usize,
    pub gae_lr: f64,
    pub knn_k: usize,
    pub neg_ratio: f64,

    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
    pub runs: usize,
    pub base_seed: u64,
    pub reseed: Reseed,
    pub nmi_norm: NmiNormalization,
    pub oov_seed: u64,
    pub save_latent: bool,
    pub save_checkpoints: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineKind::ScaAe,
            features: FeatureSource::Embeddings,
            embeddings: None,
            corpus: None,
            labels: None,
            word_vectors: None,
            clusters: None,
            ae_layers: "d:500:500:2000:10".into(),
            ae_epochs: 15,
            ae_lr: 0.001,
            batch_size: 64,
            tied_decoder: false,
            sca_layers: "d:500:500:2000:20".into(),
            sca_pretrain_epochs: 15,
            sca_lr: 0.01,
            sca_momentum: 0.9,
            sca_max_epochs: 100,
            sca_tol: 0.001,
            gae_layers: "d:64:32".into(),
            gae_epochs: 300,
            gae_lr: 0.002,
            knn_k: 10,
            neg_ratio: 1.0,
            kmeans_restarts: 10,
            kmeans_max_iters: 300,
            kmeans_tol: 1e-4,
            runs: 5,
            base_seed: 0,
            reseed: Reseed::Full,
            nmi_norm: NmiNormalization::Geometric,
            oov_seed: 0,
            save_latent: true,
            save_checkpoints: true,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Interprets the right-hand side of `key=value`: a TOML literal when it
/// parses as one, a bare string otherwise.
fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

impl PipelineConfig {
    /// Defaults, overlaid with an optional file (TOML, or JSON by extension)
    /// and then with `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                if p.extension().is_some_and(|e| e == "json") {
                    let cfg: PipelineConfig = serde_json::from_str(&text)
                        .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
                    cfg.to_table()?
                } else {
                    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?
                }
            }
        };
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| config_err(format!("override {o:?} is not key=value")))?;
            table.insert(key.trim().to_owned(), parse_value(value));
        }
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.message().to_owned()))
    }

    pub fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| config_err(e.to_string()))
    }

    /// The effective configuration as a loadable TOML document.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = self.to_table()?;
        table.insert(key.to_owned(), parse_value(value));
        *self = Self::from_table(table)?;
        Ok(())
    }

    /// Range checks and presence of the inputs the pipeline needs.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ae_epochs", self.ae_epochs),
            ("batch_size", self.batch_size),
            ("sca_pretrain_epochs", self.sca_pretrain_epochs),
            ("sca_max_epochs", self.sca_max_epochs),
            ("gae_epochs", self.gae_epochs),
            ("knn_k", self.knn_k),
            ("kmeans_restarts", self.kmeans_restarts),
            ("kmeans_max_iters", self.kmeans_max_iters),
            ("runs", self.runs),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(config_err(format!("{name} must be at least 1")));
            }
        }
        for (name, v) in [
            ("ae_lr", self.ae_lr),
            ("sca_lr", self.sca_lr),
            ("gae_lr", self.gae_lr),
            ("neg_ratio", self.neg_ratio),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_err(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.sca_momentum) {
            return Err(config_err(format!("sca_momentum must lie in [0, 1), got {}", self.sca_momentum)));
        }
        for (name, v) in [("sca_tol", self.sca_tol), ("kmeans_tol", self.kmeans_tol)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.clusters.is_some_and(|k| k == 0) {
            return Err(config_err("clusters must be at least 1"));
        }
        if self.labels.is_none() && self.clusters.is_none() {
            return Err(config_err("set clusters or provide labels"));
        }
        let layer_key = match self.pipeline {
            PipelineKind::Baseline => None,
            PipelineKind::Ae => Some(("ae_layers", &self.ae_layers)),
            PipelineKind::StnGae => Some(("gae_layers", &self.gae_layers)),
            PipelineKind::ScaAe => Some(("sca_layers", &self.sca_layers)),
        };
        if let Some((name, spec)) = layer_key {
            NetworkSpec::parse(spec, 1).map_err(|e| config_err(format!("{name}: {e}")))?;
        }

        let need = |name: &str, p: &Option<PathBuf>| -> Result<()> {
            match p {
                None => Err(config_err(format!("features = {:?} requires {name}", self.features))),
                Some(p) if !p.exists() => Err(config_err(format!("{name} file {} does not exist", p.display()))),
                Some(_) => Ok(()),
            }
        };
        match self.features {
            FeatureSource::Embeddings => need("embeddings", &self.embeddings)?,
            FeatureSource::BowTfidf | FeatureSource::BowBinary => need("corpus", &self.corpus)?,
            FeatureSource::WordVectors => {
                need("corpus", &self.corpus)?;
                need("word_vectors", &self.word_vectors)?;
            }
        }
        if let Some(p) = &self.labels {
            if !p.exists() {
                return Err(config_err(format!("labels file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_reference_settings() {
        let c = PipelineConfig::default();
        assert_eq!(c.ae_layers, "d:500:500:2000:10");
        assert_eq!(c.sca_layers, "d:500:500:2000:20");
        assert_eq!(c.gae_layers, "d:64:32");
        assert_eq!((c.gae_epochs, c.gae_lr), (300, 0.002));
        assert_eq!((c.sca_lr, c.sca_momentum, c.batch_size), (0.01, 0.9, 64));
        assert_eq!((c.sca_pretrain_epochs, c.knn_k, c.runs), (15, 10, 5));
    }

    #[test]
    fn overrides_and_round_trip() {
        let c = PipelineConfig::load(
            None,
            &[
                "pipeline=ae".into(),
                "ae_epochs=3".into(),
                "ae_layers=d:8:2".into(),
                "clusters=4".into(),
                "reseed=kmeans_only".into(),
                "ae_lr=0.5".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.pipeline, PipelineKind::Ae);
        assert_eq!(c.ae_epochs, 3);
        assert_eq!(c.ae_layers, "d:8:2");
        assert_eq!(c.clusters, Some(4));
        assert_eq!(c.reseed, Reseed::KmeansOnly);
        let back: PipelineConfig = toml::from_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(PipelineConfig::load(None, &["nope=1".into()]), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::load(None, &["runs=x".into()]), Err(Error::Config(_))));
        assert!(matches!(PipelineConfig::load(None, &["runs".into()]), Err(Error::Config(_))));
        let mut c = PipelineConfig::default();
        c.clusters = Some(2);
        c.set("runs", "0").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn missing_inputs_fail_validation() {
        let mut c = PipelineConfig::default();
        c.clusters = Some(2);
        assert!(c.validate().is_err());
        c.embeddings = Some("/definitely/not/here.stce".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_and_toml_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = PipelineConfig::default();
        c.runs = 2;
        let t = dir.path().join("c.toml");
        fs::write(&t, c.to_toml().unwrap()).unwrap();
        assert_eq!(PipelineConfig::load(Some(&t), &[]).unwrap(), c);
        let j = dir.path().join("c.json");
        fs::write(&j, serde_json::to_string(&c).unwrap()).unwrap();
        let loaded = PipelineConfig::load(Some(&j), &["runs=3".into()]).unwrap();
        assert_eq!(loaded.runs, 3);
    }
}
