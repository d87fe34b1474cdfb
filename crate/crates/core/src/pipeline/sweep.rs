use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, PipelineKind};
use super::run::{load_inputs, run_with_inputs};
use crate::error::{Error, Result};

/// The hyperparameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Training epochs of the pipeline's representation network.
    Epochs,
    /// Layer sizes of the pipeline's representation network.
    LayerSpec,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epochs" => Ok(SweepAxis::Epochs),
            "layer_spec" => Ok(SweepAxis::LayerSpec),
            other => Err(Error::Config(format!("unknown sweep axis {other:?} (epochs | layer_spec)"))),
        }
    }
}

impl SweepAxis {
    /// The config key this axis sets for `pipeline`.
    pub fn key(self, pipeline: PipelineKind) -> Result<&'static str> {
        match (self, pipeline) {
            (_, PipelineKind::Baseline) => Err(Error::Config("the baseline pipeline has nothing to sweep".into())),
            (SweepAxis::Epochs, PipelineKind::Ae) => Ok("ae_epochs"),
            (SweepAxis::Epochs, PipelineKind::ScaAe) => Ok("sca_pretrain_epochs"),
            (SweepAxis::Epochs, PipelineKind::StnGae) => Ok("gae_epochs"),
            (SweepAxis::LayerSpec, PipelineKind::Ae) => Ok("ae_layers"),
            (SweepAxis::LayerSpec, PipelineKind::ScaAe) => Ok("sca_layers"),
            (SweepAxis::LayerSpec, PipelineKind::StnGae) => Ok("gae_layers"),
        }
    }
}

/// One sweep cell. Failed cells carry NaN metrics and the error text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

fn cell_config(cfg: &PipelineConfig, key: &str, axis: SweepAxis, value: &str) -> Result<PipelineConfig> {
    let mut cell = cfg.clone();
    match axis {
        SweepAxis::Epochs => cell.set(key, value)?,
        // Layer specs stay strings even when they look numeric.
        SweepAxis::LayerSpec => cell.set(key, &format!("{value:?}"))?,
    }
    cell.validate()?;
    Ok(cell)
}

/// Runs the pipeline once per value, writing each cell to `out/cells/NN`
/// and the table to `out/sweep.csv`. Cell failures are recorded, not raised.
pub fn run_sweep(cfg: &PipelineConfig, axis: SweepAxis, values: &[String], out: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("a sweep needs at least one value".into()));
    }
    let key = axis.key(cfg.pipeline)?;
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    if inputs.labels.is_none() {
        return Err(Error::Config("a sweep needs labels to score its cells".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for (i, value) in values.iter().enumerate() {
        let dir = out.join("cells").join(format!("{i:02}"));
        let result = cell_config(cfg, key, axis, value).and_then(|cell| {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            run_with_inputs(&cell, &inputs, Some(&dir))
        });
        let row = match result {
            Ok(report) => {
                let m = report.metrics.expect("labels are present");
                SweepRow {
                    value: value.clone(),
                    acc_mean: m.acc_mean,
                    acc_std: m.acc_std,
                    nmi_mean: m.nmi_mean,
                    nmi_std: m.nmi_std,
                    error: None,
                }
            }
            Err(e) => {
                log::error!("sweep cell {key} = {value} failed: {e}");
                SweepRow {
                    value: value.clone(),
                    acc_mean: f64::NAN,
                    acc_std: f64::NAN,
                    nmi_mean: f64::NAN,
                    nmi_std: f64::NAN,
                    error: Some(e.to_string()),
                }
            }
        };
        rows.push(row);
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_sweep_csv(&rows, &out.join("sweep.csv"))?;
    Ok(rows)
}

/// Header `value,acc_mean,acc_std,nmi_mean,nmi_std`.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
