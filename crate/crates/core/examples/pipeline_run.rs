//! Run a full pipeline from a TOML config and list the artifacts it writes.

use std::fs;

use stcluster::corpus::{write_embeddings, write_labels, EmbeddingMatrix};
use stcluster::pipeline::{run_pipeline, PipelineConfig};
use stcluster::synthetic::{gaussian_blobs, BlobSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let (x, labels) = gaussian_blobs(&BlobSpec::separated(), 4);
    write_embeddings(&EmbeddingMatrix::from_array(x.view())?, dir.path().join("x.stce"))?;
    write_labels(labels.labels(), dir.path().join("y.txt"))?;

    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "pipeline = \"sca_ae\"\nembeddings = {:?}\nlabels = {:?}\nsca_layers = \"d:64:16\"\nruns = 3\n",
            dir.path().join("x.stce"),
            dir.path().join("y.txt")
        ),
    )?;
    let cfg = PipelineConfig::load(Some(&config), &["base_seed=10".into()])?;
    let out = dir.path().join("out");
    let report = run_pipeline(&cfg, &out)?;

    let m = report.metrics.as_ref().expect("labels were given");
    println!("acc {:.3} +/- {:.3}, nmi {:.3} +/- {:.3}", m.acc_mean, m.acc_std, m.nmi_mean, m.nmi_std);
    for r in &report.runs {
        println!("  run {} (seed {}): acc {:.3}", r.run, r.seed, r.acc.unwrap_or(f64::NAN));
    }
    let mut files: Vec<String> = fs::read_dir(out.join("runs/run_0"))?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<std::io::Result<_>>()?;
    files.sort();
    println!("per-run artifacts: {}", files.join(", "));
    Ok(())
}
