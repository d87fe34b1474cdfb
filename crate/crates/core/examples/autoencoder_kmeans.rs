//! Train a dense autoencoder on synthetic embeddings, then cluster its
//! latent codes with K-means.

use stcluster::autoencoder::{train_autoencoder, TrainConfig};
use stcluster::corpus::LabelVector;
use stcluster::metrics::{clustering_accuracy, kmeans, nmi, KMeansConfig, NmiNormalization};
use stcluster::nn::NetworkSpec;
use stcluster::synthetic::{gaussian_blobs, BlobSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (x, truth) = gaussian_blobs(&BlobSpec::separated(), 1);
    let spec = NetworkSpec::parse("d:128:32:8", x.ncols())?;
    println!("network {}", spec.describe());

    let cfg = TrainConfig {
        epochs: 30,
        ..TrainConfig::default()
    };
    let (model, history) = train_autoencoder(x.view(), &spec, &cfg)?;
    for (epoch, loss) in history.iter().enumerate().step_by(5) {
        println!("epoch {epoch:>2}: reconstruction loss {loss:.5}");
    }

    let z = model.encode(x.view())?;
    let clusters = kmeans(z.view(), truth.k(), &KMeansConfig::default(), 0)?;
    let pred = LabelVector::new(&clusters.labels);
    println!(
        "latent {:?}: acc {:.3}, nmi {:.3}",
        z.dim(),
        clustering_accuracy(&truth, &pred)?,
        nmi(&truth, &pred, NmiNormalization::Geometric)?
    );
    Ok(())
}
