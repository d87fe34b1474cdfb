//! Write an embedding matrix in the binary format, read it back, and import
//! the same data from a tab-separated file.

use std::fs;

use stcluster::corpus::{load_embeddings, read_embeddings, write_embeddings, EmbeddingMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let ids = vec!["q1".to_string(), "q2".to_string(), "q3".to_string()];
    let m = EmbeddingMatrix::with_ids(3, 2, vec![0.5, -1.0, 2.25, 0.0, 1e-3, 7.0], Some(ids))?;

    let path = dir.path().join("vectors.stce");
    write_embeddings(&m, &path)?;
    let back = read_embeddings(&path)?;
    println!("binary: {} rows x {} dims, {} bytes", back.n(), back.d(), fs::metadata(&path)?.len());
    println!("bitwise equal: {}", back == m);

    let tsv = dir.path().join("vectors.tsv");
    fs::write(&tsv, "q1\t0.5\t-1\nq2\t2.25\t0\nq3\t0.001\t7\n")?;
    let imported = load_embeddings(&tsv)?;
    println!("tsv ids: {:?}", imported.ids().unwrap_or_default());
    for i in 0..imported.n() {
        println!("  row {i}: {:?}", imported.row(i));
    }
    Ok(())
}
