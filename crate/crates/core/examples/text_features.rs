//! Turn raw short texts into feature vectors: TF-IDF bag of words and
//! averaged word vectors with deterministic out-of-vocabulary vectors.

use std::fs;

use stcluster::corpus::{average_word_vectors, bow_features, BowWeighting, WordVectorTable};
use stcluster::synthetic::tiny_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (corpus, labels) = tiny_corpus();
    let bow = bow_features(&corpus, BowWeighting::Tfidf)?;
    println!("{} texts, {} vocabulary terms, {} topics", bow.n(), bow.d(), labels.k());

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("vectors.txt");
    fs::write(
        &path,
        "10 2\ngoal 1.0 0.0\nmatch 0.9 0.1\nfootball 1.0 0.1\nstriker 0.8 0.0\nleague 0.9 0.2\n\
         sauce 0.0 1.0\nbread 0.1 0.9\nsoup 0.0 0.8\nflour 0.2 1.0\nthe 0.5 0.5\n",
    )?;
    let table = WordVectorTable::read(&path)?;
    let avg = average_word_vectors(&corpus, &table, 42)?;
    println!(
        "averaged vectors: {} x {}, {} out-of-vocabulary tokens, {} empty texts",
        avg.matrix.n(),
        avg.matrix.d(),
        avg.oov_tokens,
        avg.empty_texts
    );
    for i in [0, 10] {
        println!("  {:?} -> {:?}", corpus.texts()[i], avg.matrix.row(i));
    }
    Ok(())
}
