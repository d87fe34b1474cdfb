//! Sweep the encoder architecture and collect one score row per value.

use std::fs;

use stcluster::corpus::{write_embeddings, write_labels, EmbeddingMatrix};
use stcluster::pipeline::{run_sweep, PipelineConfig, SweepAxis};
use stcluster::synthetic::{gaussian_blobs, BlobSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let (x, labels) = gaussian_blobs(&BlobSpec::overlapping(), 2);
    write_embeddings(&EmbeddingMatrix::from_array(x.view())?, dir.path().join("x.stce"))?;
    write_labels(labels.labels(), dir.path().join("y.txt"))?;

    let cfg = PipelineConfig::load(
        None,
        &[
            "pipeline=ae".into(),
            format!("embeddings={:?}", dir.path().join("x.stce")),
            format!("labels={:?}", dir.path().join("y.txt")),
            "runs=2".into(),
        ],
    )?;
    let values: Vec<String> = ["d:16:2", "d:64:8", "d:128:64:8"].map(String::from).to_vec();
    let out = dir.path().join("sweep");
    let rows = run_sweep(&cfg, SweepAxis::LayerSpec, &values, &out)?;
    for r in &rows {
        println!("{:<12} acc {:.3}  nmi {:.3}", r.value, r.acc_mean, r.nmi_mean);
    }
    print!("{}", fs::read_to_string(out.join("sweep.csv"))?);
    Ok(())
}
