//! Browser demo: the bundled mini corpus is compiled in, a small model is trained on
//! construction, and three read-only operations are exposed to JavaScript. Results
//! cross the boundary as JSON strings so the same API runs natively in tests.

use std::collections::BTreeSet;

use curatr_core::corpus::read_metadata;
use curatr_core::{
    build_index, most_similar, rank_by_terms, tokenize, train_cbow, Corpus, Document,
    EmbeddingModel, InvertedIndex, MetadataFilter, TrainingConfig,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const METADATA: &str = include_str!("../../../data/mini_corpus/metadata.csv");

macro_rules! texts {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../../../data/mini_corpus/texts/", $id, ".txt")))),*]
    };
}

const TEXTS: &[(&str, &str)] =
    texts!("m01", "m02", "m03", "m04", "m05", "m06", "m07", "m08", "m09", "m10", "m11", "m12");

/// Small enough to train in well under a second in the browser.
pub fn demo_training() -> TrainingConfig {
    TrainingConfig {
        dimension: 32,
        min_count: 2,
        epochs: 10,
        seed: 7,
        ..TrainingConfig::default()
    }
}

pub fn bundled_corpus() -> Corpus {
    let (metas, issues) =
        read_metadata(METADATA.as_bytes(), "metadata.csv").expect("bundled metadata parses");
    debug_assert!(issues.is_empty());
    let docs = metas.into_iter().map(|meta| {
        let text = TEXTS
            .iter()
            .find(|(id, _)| *id == meta.doc_id)
            .map(|(_, t)| *t)
            .expect("every bundled row has a text");
        Document::new(meta, text)
    });
    Corpus::from_documents(docs).expect("bundled ids are unique")
}

#[derive(Serialize)]
struct RankRow<'a> {
    rank: usize,
    doc_id: &'a str,
    title: &'a str,
    author: &'a str,
    year: Option<i32>,
    score: f64,
    matched_terms: &'a std::collections::BTreeMap<String, u32>,
}

fn to_js(err: curatr_core::Error) -> JsError {
    JsError::new(&format!("{}: {}", err.code(), err))
}

fn terms_of(input: &str) -> Vec<String> {
    input
        .split(',')
        .map(|t| tokenize(t).join(" "))
        .filter(|t| !t.is_empty())
        .collect()
}

#[wasm_bindgen]
pub struct Demo {
    corpus: Corpus,
    index: InvertedIndex,
    model: EmbeddingModel,
}

impl Demo {
    pub fn build() -> curatr_core::Result<Demo> {
        let corpus = bundled_corpus();
        let index = build_index(&corpus);
        let model = train_cbow(&corpus, &demo_training())?;
        Ok(Demo {
            corpus,
            index,
            model,
        })
    }

    pub fn try_ngram_series(&self, term: &str) -> curatr_core::Result<String> {
        let years = self.index.year_totals();
        let (Some(&from), Some(&to)) = (years.keys().next(), years.keys().next_back()) else {
            return Ok("[]".into());
        };
        let series = self.index.ngram_series(term, from, to)?;
        Ok(serde_json::to_string(&series.points).expect("points serialize"))
    }

    pub fn try_similar(&self, terms: &str, k: usize) -> curatr_core::Result<String> {
        let hits = most_similar(&self.model, &terms_of(terms), k, &BTreeSet::new())?;
        Ok(serde_json::to_string(&hits).expect("results serialize"))
    }

    pub fn try_rank(&self, terms: &str, limit: usize) -> curatr_core::Result<String> {
        let ranking = rank_by_terms(
            &self.index,
            terms_of(terms),
            &MetadataFilter::default(),
            limit,
        )?;
        let rows: Vec<RankRow> = ranking
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let meta = &self
                    .index
                    .doc(&r.doc_id)
                    .expect("ranked docs are indexed")
                    .meta;
                RankRow {
                    rank: i + 1,
                    doc_id: &r.doc_id,
                    title: &meta.title,
                    author: &meta.author,
                    year: meta.year,
                    score: r.score,
                    matched_terms: &r.matched_terms,
                }
            })
            .collect();
        Ok(serde_json::to_string(&rows).expect("rows serialize"))
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<Demo, JsError> {
        Demo::build().map_err(to_js)
    }

    pub fn documents(&self) -> usize {
        self.corpus.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.model.len()
    }

    /// `[{year, count, relative_frequency}, ...]` over every year in the corpus.
    pub fn ngram_series(&self, term: &str) -> Result<String, JsError> {
        self.try_ngram_series(term).map_err(to_js)
    }

    /// Comma-separated query terms; `[{term, score}, ...]`.
    pub fn similar(&self, terms: &str, k: usize) -> Result<String, JsError> {
        self.try_similar(terms, k).map_err(to_js)
    }

    /// Comma-separated lexicon terms; ranked documents with metadata.
    pub fn rank(&self, terms: &str, limit: usize) -> Result<String, JsError> {
        self.try_rank(terms, limit).map_err(to_js)
    }
}
