use std::collections::BTreeSet;

use curatr_core::{
    build_index, ingest_corpus, most_similar, rank_by_terms, train_cbow, MetadataFilter,
};
use curatr_testkit::mini_corpus_dir;
use curatr_web_demo::{bundled_corpus, demo_training, Demo};
use serde_json::Value;

#[test]
fn bundled_corpus_equals_ingested_directory() {
    let on_disk = ingest_corpus(mini_corpus_dir()).unwrap().corpus;
    let bundled = bundled_corpus();
    let a: Vec<_> = on_disk.documents().collect();
    let b: Vec<_> = bundled.documents().collect();
    assert_eq!(a, b);
}

#[test]
fn operations_match_the_engine() {
    let demo = Demo::build().unwrap();
    assert_eq!(demo.documents(), 12);
    let corpus = bundled_corpus();
    let index = build_index(&corpus);
    let model = train_cbow(&corpus, &demo_training()).unwrap();
    assert_eq!(demo.vocabulary_size(), model.len());

    let series: Value =
        serde_json::from_str(&demo.try_ngram_series("scarlet fever").unwrap()).unwrap();
    let want = index.ngram_series("scarlet fever", 1854, 1899).unwrap();
    assert_eq!(series, serde_json::to_value(&want.points).unwrap());

    let similar: Value =
        serde_json::from_str(&demo.try_similar("Fever, cholera", 5).unwrap()).unwrap();
    let want = most_similar(&model, &["fever", "cholera"], 5, &BTreeSet::new()).unwrap();
    assert_eq!(similar, serde_json::to_value(&want).unwrap());

    let ranked: Value =
        serde_json::from_str(&demo.try_rank("infect, epidemic, contagion", 3).unwrap()).unwrap();
    let want = rank_by_terms(
        &index,
        ["infect", "epidemic", "contagion"],
        &MetadataFilter::default(),
        3,
    )
    .unwrap();
    let rows = ranked.as_array().unwrap();
    assert_eq!(rows.len(), want.len());
    for (row, w) in rows.iter().zip(&want) {
        assert_eq!(row["doc_id"], w.doc_id.as_str());
        assert_eq!(row["score"].as_f64().unwrap(), w.score);
    }
    assert_eq!(rows[0]["rank"], 1);
}

#[test]
fn bad_input_is_reported() {
    let demo = Demo::build().unwrap();
    assert_eq!(demo.try_similar("xyzzy", 5).unwrap_err().code(), "OOV_TERM");
    assert_eq!(demo.try_rank(" , ", 5).unwrap_err().code(), "VALIDATION");
    assert_eq!(
        demo.try_ngram_series("far too many words")
            .unwrap_err()
            .code(),
        "VALIDATION"
    );
}
