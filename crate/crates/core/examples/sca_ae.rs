//! Pretrain an autoencoder, then fine-tune its encoder with soft cluster
//! assignments sharpened towards a self-training target.

use stcluster::autoencoder::{train_autoencoder, TrainConfig};
use stcluster::corpus::LabelVector;
use stcluster::metrics::clustering_accuracy;
use stcluster::nn::NetworkSpec;
use stcluster::sca::{finetune_sca, ScaConfig};
use stcluster::synthetic::{gaussian_blobs, BlobSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (x, truth) = gaussian_blobs(&BlobSpec::overlapping(), 3);
    let spec = NetworkSpec::parse("d:500:500:2000:10", x.ncols())?;
    let (model, _) = train_autoencoder(x.view(), &spec, &TrainConfig::default())?;

    let out = finetune_sca(&model, x.view(), truth.k(), &ScaConfig::default(), Some(&truth))?;
    for e in &out.history {
        println!(
            "epoch {:>2}: kl {:.5}, labels changed {:.3}, acc {:.3}",
            e.epoch,
            e.kl_loss,
            e.label_change_fraction,
            e.acc.unwrap_or(f64::NAN)
        );
    }
    let before = clustering_accuracy(&truth, &LabelVector::new(&out.initial_labels))?;
    let after = clustering_accuracy(&truth, &LabelVector::new(&out.labels))?;
    println!("converged {}: acc {before:.3} before fine-tuning, {after:.3} after", out.converged);
    Ok(())
}
