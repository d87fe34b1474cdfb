//! Save a trained autoencoder to a checkpoint and reload it for encoding.

use stcluster::autoencoder::{train_autoencoder, TrainConfig};
use stcluster::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use stcluster::nn::NetworkSpec;
use stcluster::synthetic::{gaussian_blobs, BlobSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (x, _) = gaussian_blobs(&BlobSpec::separated(), 6);
    let spec = NetworkSpec::parse("d:32:4", x.ncols())?;
    let cfg = TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    };
    let (model, _) = train_autoencoder(x.view(), &spec, &cfg)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.stck");
    write_checkpoint(&Checkpoint::from_autoencoder(&model), &path)?;
    let restored = read_checkpoint(&path)?.into_autoencoder()?;
    println!("restored model equals trained model: {}", restored == model);
    println!("latent codes identical: {}", restored.encode(x.view())? == model.encode(x.view())?);
    Ok(())
}
