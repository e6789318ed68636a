use std::collections::BTreeMap;

use curatr_core::{
    build_index, export_subcorpus, ingest_corpus, rank_by_lexicon, Corpus, Document, Lexicon,
    MetadataFilter, SubCorpus,
};
use curatr_testkit::{
    brute_force_rank, mini_corpus_dir, read_reference_corpus, recount, FixtureRng, RefDoc,
    SEED_SETS,
};

fn sample_terms(docs: &[RefDoc], rng: &mut FixtureRng) -> (Vec<String>, Vec<String>) {
    let mut unigrams: Vec<String> = docs.iter().flat_map(|d| d.tokens.clone()).collect();
    unigrams.sort();
    unigrams.dedup();
    let mut bigrams: Vec<String> = docs
        .iter()
        .flat_map(|d| d.tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])))
        .collect();
    bigrams.sort();
    bigrams.dedup();
    let mut uni: Vec<String> = (0..20)
        .map(|_| unigrams[rng.below(unigrams.len())].clone())
        .collect();
    uni.extend(["fever".into(), "plague".into(), "never-seen".into()]);
    let mut bi: Vec<String> = (0..10)
        .map(|_| bigrams[rng.below(bigrams.len())].clone())
        .collect();
    bi.push("scarlet fever".into());
    (uni, bi)
}

#[test]
fn counts_and_series_match_recount() {
    let corpus = ingest_corpus(mini_corpus_dir()).unwrap().corpus;
    let index = build_index(&corpus);
    let docs = read_reference_corpus(&mini_corpus_dir());
    let (uni, bi) = sample_terms(&docs, &mut FixtureRng::new(17));
    for term in uni.iter().chain(&bi) {
        let mut per_year: BTreeMap<i32, u64> = BTreeMap::new();
        let mut year_tokens: BTreeMap<i32, u64> = BTreeMap::new();
        for d in &docs {
            let n = recount(&d.tokens, term);
            assert_eq!(
                index.term_count(term, &d.doc_id) as u64,
                n,
                "{term} in {}",
                d.doc_id
            );
            if let Some(y) = d.year {
                *per_year.entry(y).or_default() += n;
                *year_tokens.entry(y).or_default() += d.tokens.len() as u64;
            }
        }
        let series = index.ngram_series(term, 1000, 2100).unwrap();
        let want: Vec<(i32, u64, f64)> = year_tokens
            .iter()
            .map(|(&y, &total)| (y, per_year[&y], per_year[&y] as f64 / total as f64))
            .collect();
        let got: Vec<(i32, u64, f64)> = series
            .points
            .iter()
            .map(|p| (p.year, p.count, p.relative_frequency))
            .collect();
        assert_eq!(got, want, "{term}");
    }
    assert_eq!(index.term_count("fever", "m03"), 1);
}

#[test]
fn keyword_search_matches_brute_force() {
    let index = build_index(&ingest_corpus(mini_corpus_dir()).unwrap().corpus);
    let docs = read_reference_corpus(&mini_corpus_dir());
    let filter = MetadataFilter {
        year_from: Some(1880),
        year_to: Some(1890),
        ..Default::default()
    };
    let got: Vec<(String, f64)> = index
        .keyword_search("fever", &filter, None)
        .unwrap()
        .into_iter()
        .map(|h| (h.doc_id, h.score))
        .collect();
    let want = brute_force_rank(
        &docs,
        &["fever"],
        |d| d.year.is_some_and(|y| (1880..=1890).contains(&y)),
        usize::MAX,
    );
    assert_eq!(got, want);
    assert!(!got.is_empty());
}

#[test]
fn lexicon_ranking_matches_brute_force_for_every_seed_set() {
    let index = build_index(&ingest_corpus(mini_corpus_dir()).unwrap().corpus);
    let docs = read_reference_corpus(&mini_corpus_dir());
    for (name, seeds) in SEED_SETS {
        let lex = Lexicon::create(name, seeds, "none").unwrap();
        let got = rank_by_lexicon(&index, &lex, &MetadataFilter::default(), 100).unwrap();
        let want = brute_force_rank(&docs, seeds, |_| true, 100);
        assert_eq!(got.len(), want.len(), "{name}");
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.doc_id, w.0, "{name}");
            assert!((g.score - w.1).abs() <= 1e-9, "{name}");
        }
        assert!(!got.is_empty(), "{name} finds nothing");
    }
}

#[test]
fn category_and_author_filters_match_brute_force() {
    let index = build_index(&ingest_corpus(mini_corpus_dir()).unwrap().corpus);
    let docs = read_reference_corpus(&mini_corpus_dir());
    let lex = Lexicon::create("disease", SEED_SETS[3].1, "none").unwrap();
    let f = MetadataFilter {
        category: Some("fiction".into()),
        ..Default::default()
    };
    let got: Vec<_> = rank_by_lexicon(&index, &lex, &f, 100)
        .unwrap()
        .into_iter()
        .map(|r| r.doc_id)
        .collect();
    let want: Vec<_> = brute_force_rank(&docs, SEED_SETS[3].1, |d| d.category == "fiction", 100)
        .into_iter()
        .map(|r| r.0)
        .collect();
    assert_eq!(got, want);

    let f = MetadataFilter {
        author: Some("ashby".into()),
        ..Default::default()
    };
    let got: Vec<_> = rank_by_lexicon(&index, &lex, &f, 100).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].doc_id, "m02");
}

#[test]
fn snapshots_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.snap");
    let b = dir.path().join("b.snap");
    build_index(&ingest_corpus(mini_corpus_dir()).unwrap().corpus)
        .save_snapshot(&a)
        .unwrap();
    build_index(&ingest_corpus(mini_corpus_dir()).unwrap().corpus)
        .save_snapshot(&b)
        .unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn export_round_trip_and_manifest_scores() {
    let corpus = ingest_corpus(mini_corpus_dir()).unwrap().corpus;
    let index = build_index(&corpus);
    let lex = Lexicon::create("contagion", SEED_SETS[2].1, "none").unwrap();
    let ranking = rank_by_lexicon(&index, &lex, &MetadataFilter::default(), 100).unwrap();
    assert!(ranking.len() >= 3);
    let mut sub = SubCorpus::new(
        "contagion-set",
        "contagion",
        ranking,
        MetadataFilter::default(),
    )
    .unwrap();
    let dropped = sub.ranking()[0].doc_id.clone();
    sub.exclude_document(&dropped).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let manifest = export_subcorpus(&sub, &corpus, dir.path()).unwrap();
    assert!(manifest.errors.is_empty());
    let members: Vec<_> = sub
        .effective_members()
        .map(|(_, r)| r.doc_id.clone())
        .collect();
    assert_eq!(manifest.entries.len(), members.len());
    assert_eq!(manifest.entries[0].rank, 2);

    let again = ingest_corpus(dir.path()).unwrap();
    assert!(again.issues.is_empty());
    let mut ids: Vec<_> = again
        .corpus
        .documents()
        .map(|d| d.id().to_owned())
        .collect();
    let mut want = members.clone();
    ids.sort();
    want.sort();
    assert_eq!(ids, want);
    for d in again.corpus.documents() {
        let orig = corpus.get(d.id()).unwrap();
        assert_eq!(d.meta, orig.meta);
        assert_eq!(d.tokens, orig.tokens);
    }

    let brute = brute_force_rank(
        &read_reference_corpus(&mini_corpus_dir()),
        SEED_SETS[2].1,
        |_| true,
        100,
    );
    let csv_text = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
    for line in csv_text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (_, score) = brute.iter().find(|(id, _)| id == cols[0]).unwrap();
        assert_eq!(cols[2], format!("{score:.6}"));
    }
}

#[test]
fn saved_subcorpus_is_a_snapshot() {
    let corpus = ingest_corpus(mini_corpus_dir()).unwrap().corpus;
    let lex = Lexicon::create("disease", SEED_SETS[3].1, "none").unwrap();
    let ranking =
        rank_by_lexicon(&build_index(&corpus), &lex, &MetadataFilter::default(), 10).unwrap();
    let sub = SubCorpus::new("s", "disease", ranking, MetadataFilter::default()).unwrap();
    let before = sub.clone();

    let mut docs: Vec<Document> = corpus.documents().cloned().collect();
    docs.push(Document::new(
        curatr_core::DocumentMeta {
            doc_id: "z99".into(),
            title: "All Fever".into(),
            author: "X".into(),
            year: Some(1890),
            category: "fiction".into(),
        },
        "fever fever fever",
    ));
    let bigger = Corpus::from_documents(docs).unwrap();
    let reranked =
        rank_by_lexicon(&build_index(&bigger), &lex, &MetadataFilter::default(), 10).unwrap();
    assert_eq!(reranked[0].doc_id, "z99");
    assert_eq!(sub, before);
    assert_eq!(sub.effective_members().count(), sub.ranking().len());
}
