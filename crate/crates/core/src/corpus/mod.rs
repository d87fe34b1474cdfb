//! Loading and persisting embeddings, labels and raw text, plus the
//! bag-of-words and averaged word-vector baseline features.

mod embeddings;
mod labels;
mod text;
mod wordvec;

pub use embeddings::{
    decode_stce, encode_stce, load_embeddings, read_embeddings, read_embeddings_tsv,
    write_embeddings, EmbeddingMatrix, STCE_MAGIC, STCE_VERSION,
};
pub(crate) use embeddings::Cursor;
pub use labels::{parse_labels, read_labels, write_labels, LabelVector};
pub use text::{bow_features, tokenize, vocabulary, BowWeighting, Corpus};
pub use wordvec::{average_word_vectors, oov_vector, AveragedVectors, WordVectorTable, OOV_RANGE};
