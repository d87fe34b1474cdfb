//! Compare K-means on raw features, on autoencoder codes, and after
//! soft-assignment fine-tuning, on the synthetic benchmark. Takes a few
//! minutes in release mode.

use stcluster::pipeline::{run_with_inputs, Inputs, PipelineConfig, PipelineKind};
use stcluster::synthetic::{subspace_blobs, SubspaceBlobSpec, BENCHMARK_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (x, labels) = subspace_blobs(&SubspaceBlobSpec::benchmark(), BENCHMARK_SEED);
    println!("{} samples, {} dims, {} clusters", x.nrows(), x.ncols(), labels.k());
    let inputs = Inputs {
        x,
        labels: Some(labels),
        ids: None,
    };
    for kind in [PipelineKind::Baseline, PipelineKind::Ae, PipelineKind::ScaAe] {
        let cfg = PipelineConfig {
            pipeline: kind,
            ..PipelineConfig::default()
        };
        let report = run_with_inputs(&cfg, &inputs, None)?;
        let m = report.metrics.expect("labels were given");
        let mut acc = m.acc.clone();
        acc.sort_by(f64::total_cmp);
        println!(
            "{:<8} median acc {:.4}  mean acc {:.4} +/- {:.4}  mean nmi {:.4}",
            kind.name(),
            acc[acc.len() / 2],
            m.acc_mean,
            m.acc_std,
            m.nmi_mean
        );
    }
    Ok(())
}
