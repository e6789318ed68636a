//! Corpus curation engine.
//!
//! The pipeline mirrors a researcher's workflow over a historical text collection:
//!
//! 1. [`corpus`] ingests `metadata.csv` plus `texts/<doc_id>.txt` into tokenized documents.
//! 2. [`embedding`] trains a CBOW word2vec model with negative sampling and answers
//!    top-k cosine similarity queries.
//! 3. [`lexicon`] grows a thematic lexicon from seed terms, one recommend/decide round at
//!    a time, keeping the full audit trail of accepted and rejected terms.
//! 4. [`index`] provides keyword search, metadata filters, term counts and per-year n-gram
//!    series.
//! 5. [`curation`] ranks documents by lexicon term frequency relative to document length,
//!    and saves, amends and exports sub-corpora.
//!
//! [`store`] persists lexicons and sub-corpora under a state directory with optimistic
//! versioning; both the CLI and the HTTP service go through it.

pub mod corpus;
pub mod curation;
pub mod embedding;
mod error;
pub mod index;
pub mod lexicon;
pub mod store;

pub use corpus::{ingest_corpus, tokenize, Corpus, Document, DocumentMeta, Ingest, IngestIssue};
pub use curation::{
    build_export, export_subcorpus, rank_by_lexicon, rank_by_terms, ExportManifest, RankedResult,
    SubCorpus,
};
pub use embedding::{
    build_vocabulary, cosine_similarity, load_model, most_similar, save_model, train_cbow,
    EmbeddingModel, SimilarityResult, TrainingConfig, Vocabulary,
};
pub use error::{Error, Result};
pub use index::{build_index, InvertedIndex, MetadataFilter, NgramPoint, NgramSeries, SearchHit};
pub use lexicon::{ExpansionRound, Lexicon, PendingRound};
pub use store::Store;
