//! Train the graph autoencoder on two disconnected cliques and recover them
//! by clustering the node embeddings.

use stcluster::corpus::LabelVector;
use stcluster::gae::{train_stn_gae, GaeConfig};
use stcluster::metrics::{clustering_accuracy, kmeans, KMeansConfig};
use stcluster::nn::NetworkSpec;
use stcluster::synthetic::two_cliques;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (g, x, truth) = two_cliques(5, 16, 0)?;
    let spec = NetworkSpec::parse("d:64:32", x.ncols())?;
    let out = train_stn_gae(x.view(), &g, &spec, &GaeConfig::default())?;
    let first = out.history.first().copied().unwrap_or_default();
    let last = out.history.last().copied().unwrap_or_default();
    println!("{} epochs, link loss {first:.4} -> {last:.4}", out.history.len());

    let labels = kmeans(out.latent.view(), 2, &KMeansConfig::default(), 0)?.labels;
    println!("cluster labels {labels:?}");
    println!("acc {:.3}", clustering_accuracy(&truth, &LabelVector::new(&labels))?);
    Ok(())
}
