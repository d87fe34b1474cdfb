//! Build a cosine k-nearest-neighbour graph over short texts and apply the
//! symmetric normalization used by graph convolutions.

use stcluster::corpus::{bow_features, BowWeighting};
use stcluster::graph::{knn_graph_from_features, normalize_adjacency};
use stcluster::synthetic::tiny_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, labels) = tiny_corpus();
    let x = bow_features(&corpus, BowWeighting::Tfidf)?.to_array();
    let g = knn_graph_from_features(x.view(), 3)?;
    let same = g
        .edges()
        .iter()
        .filter(|&&(i, j)| labels.labels()[i] == labels.labels()[j])
        .count();
    println!("{} nodes, {} undirected edges, {same} within one topic", g.n(), g.num_edges());

    let adj = normalize_adjacency(&g);
    println!("normalized adjacency: {} stored entries", adj.nnz());
    for i in 0..3 {
        let row: Vec<String> = adj.row(i).map(|(j, v)| format!("{j}:{v:.3}")).collect();
        println!("  row {i}: {}", row.join(" "));
    }
    print!("{}", g.to_edge_list().lines().take(5).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
