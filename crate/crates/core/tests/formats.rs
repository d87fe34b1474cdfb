use std::fs;

use proptest::prelude::*;

use stcluster::checkpoint::{decode_checkpoint, encode_checkpoint, Checkpoint};
use stcluster::autoencoder::AutoencoderModel;
use stcluster::corpus::{
    average_word_vectors, bow_features, decode_stce, encode_stce, load_embeddings, read_embeddings, write_embeddings,
    BowWeighting, Corpus, EmbeddingMatrix, WordVectorTable,
};
use stcluster::nn::NetworkSpec;
use stcluster::Error;

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |v| v.is_finite())
}

fn matrix() -> impl Strategy<Value = EmbeddingMatrix> {
    (1usize..8, 1usize..8, any::<bool>()).prop_flat_map(|(n, d, with_ids)| {
        (
            prop::collection::vec(finite_f32(), n * d),
            prop::collection::vec("[a-z0-9 \u{e9}\u{4e2d}]{0,6}", n),
        )
            .prop_map(move |(data, ids)| {
                let ids = with_ids.then(|| ids.iter().enumerate().map(|(i, s)| format!("{i}:{s}")).collect());
                EmbeddingMatrix::with_ids(n, d, data, ids).unwrap()
            })
    })
}

fn bits(m: &EmbeddingMatrix) -> Vec<u32> {
    m.data().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #[test]
    fn stce_round_trip_is_bitwise(m in matrix()) {
        let mut buf = Vec::new();
        encode_stce(&m, &mut buf).unwrap();
        let back = decode_stce(&buf).unwrap();
        prop_assert_eq!((back.n(), back.d()), (m.n(), m.d()));
        prop_assert_eq!(bits(&back), bits(&m));
        prop_assert_eq!(back.ids(), m.ids());
        let mut again = Vec::new();
        encode_stce(&back, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn truncated_stce_is_rejected(m in matrix(), cut in any::<prop::sample::Index>()) {
        let mut buf = Vec::new();
        encode_stce(&m, &mut buf).unwrap();
        let cut = cut.index(buf.len());
        prop_assert!(decode_stce(&buf[..cut]).is_err());
    }

    #[test]
    fn word_order_does_not_change_averages(words in prop::collection::vec("[a-d]{1,2}", 1..10), seed in any::<u64>()) {
        let table = WordVectorTable::new(
            vec!["a".into(), "b".into(), "cc".into()],
            vec![1.0, 0.0, 0.0, 1.0, 0.5, -0.5],
            2,
        ).unwrap();
        let mut reversed = words.clone();
        reversed.reverse();
        let corpus = Corpus::new(vec![words.join(" "), reversed.join(" ")]).unwrap();
        let avg = average_word_vectors(&corpus, &table, seed).unwrap();
        for (a, b) in avg.matrix.row(0).iter().zip(avg.matrix.row(1)) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }
}

#[test]
fn files_round_trip_and_corruption_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let m = EmbeddingMatrix::with_ids(2, 3, vec![1.0, -0.0, 3.5, 1e-40, f32::MAX, -7.25], Some(vec!["a".into(), "b".into()]))
        .unwrap();
    let path = dir.path().join("m.stce");
    write_embeddings(&m, &path).unwrap();
    let back = read_embeddings(&path).unwrap();
    assert_eq!(bits(&back), bits(&m));

    let bytes = fs::read(&path).unwrap();
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(decode_stce(&bad), Err(Error::BadMagic { .. })));
    let mut future = bytes.clone();
    future[4] = 2;
    assert!(matches!(decode_stce(&future), Err(Error::UnsupportedVersion(2))));
    assert!(matches!(decode_stce(&bytes[..bytes.len() - 1]), Err(Error::Truncated(_))));
    let mut nan = bytes.clone();
    nan[24..28].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(decode_stce(&nan).is_err());
    for e in [decode_stce(&bad).unwrap_err(), decode_stce(&bytes[..10]).unwrap_err()] {
        assert_eq!(e.exit_code(), 4);
    }
}

#[test]
fn tsv_import_with_and_without_ids() {
    let dir = tempfile::tempdir().unwrap();
    let with_ids = dir.path().join("a.tsv");
    fs::write(&with_ids, "t1\t1\t2\nt2\t3\t4.5\n").unwrap();
    let m = load_embeddings(&with_ids).unwrap();
    assert_eq!((m.n(), m.d()), (2, 2));
    assert_eq!(m.data(), &[1.0, 2.0, 3.0, 4.5]);
    assert_eq!(m.ids().unwrap(), ["t1", "t2"]);

    let plain = dir.path().join("b.tsv");
    fs::write(&plain, "1\t2\n3\t4\n").unwrap();
    let m = load_embeddings(&plain).unwrap();
    assert!(m.ids().is_none());
    assert_eq!(m.data(), &[1.0, 2.0, 3.0, 4.0]);

    let ragged = dir.path().join("c.tsv");
    fs::write(&ragged, "1\t2\n3\n").unwrap();
    assert!(load_embeddings(&ragged).is_err());
}

#[test]
fn word_vector_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wv.txt");
    fs::write(&path, "3 2\nball 1 0\ngoal 0 1\nsoup -1 -1\n").unwrap();
    let table = WordVectorTable::read(&path).unwrap();
    assert_eq!((table.len(), table.dim()), (3, 2));
    assert_eq!(table.get("goal").unwrap(), &[0.0, 1.0]);
    let corpus = Corpus::new(vec!["Ball GOAL".into(), "".into(), "soup zzz".into()]).unwrap();
    let avg = average_word_vectors(&corpus, &table, 4).unwrap();
    assert_eq!(avg.matrix.row(0), &[0.5, 0.5]);
    assert_eq!(avg.matrix.row(1), &[0.0, 0.0]);
    assert_eq!((avg.empty_texts, avg.oov_tokens), (1, 1));
    let again = average_word_vectors(&corpus, &table, 4).unwrap();
    assert_eq!(avg.matrix, again.matrix);

    fs::write(&path, "2 2\nball 1 0\n").unwrap();
    assert!(WordVectorTable::read(&path).is_err());
}

#[test]
fn bag_of_words_rows_are_finite_and_normalized() {
    let corpus = Corpus::new(vec!["a b".into(), "b c".into(), "".into(), "a a a".into()]).unwrap();
    let m = bow_features(&corpus, BowWeighting::Tfidf).unwrap();
    for i in 0..m.n() {
        let row = m.row(i);
        assert!(row.iter().all(|v| v.is_finite()));
        let norm: f32 = row.iter().map(|v| v * v).sum::<f32>().sqrt();
        assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-6);
    }
    let two = Corpus::new(vec!["a b".into(), "b c".into()]).unwrap();
    let m = bow_features(&two, BowWeighting::Tfidf).unwrap();
    // Smoothed idf: ln((1 + n) / (1 + df)) + 1, then L2 row normalization.
    let rare = (1.5f64).ln() + 1.0;
    let norm = (rare * rare + 1.0).sqrt();
    let want = [rare / norm, 1.0 / norm, 0.0, 0.0, 1.0 / norm, rare / norm];
    for (got, want) in m.data().iter().zip(want) {
        assert!((f64::from(*got) - want).abs() < 1e-6);
    }
}

#[test]
fn checkpoint_bytes_are_stable() {
    let spec = NetworkSpec::parse("d:4:2", 6).unwrap();
    let model = AutoencoderModel::<f32>::init(&spec, 3).unwrap();
    let ck = Checkpoint::from_autoencoder(&model);
    let mut a = Vec::new();
    encode_checkpoint(&ck, &mut a).unwrap();
    let back = decode_checkpoint(&a).unwrap();
    assert_eq!(back.into_autoencoder().unwrap(), model);
    let mut b = Vec::new();
    encode_checkpoint(&back, &mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(&a[..4], b"STCK");
}
