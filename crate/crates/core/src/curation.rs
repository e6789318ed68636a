//! Lexicon-driven document ranking and curated sub-corpora.
//!
//! A document's score is the number of occurrences of accepted lexicon terms divided by
//! its length in tokens. Counts are raw; there is no IDF and no damping.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{write_metadata, Corpus, DocumentMeta, METADATA_FILE, TEXTS_DIR};
use crate::error::{Error, Result};
use crate::index::{normalize_term, InvertedIndex, MetadataFilter};
use crate::lexicon::{validate_name, Lexicon};

pub const DEFAULT_RANK_LIMIT: usize = 100;
pub const MANIFEST_FILE: &str = "manifest.csv";
pub const EXPORT_ERRORS_FILE: &str = "export_errors.csv";
pub const MANIFEST_HEADER: [&str; 4] = ["doc_id", "rank", "score", "matched_term_count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub doc_id: String,
    pub score: f64,
    pub matched_terms: BTreeMap<String, u32>,
}

/// Ranks documents passing `filters` by the relative frequency of `terms`.
/// Terms may be unigrams or two-token phrases; zero-score documents are omitted.
pub fn rank_by_terms<S: AsRef<str>>(
    index: &InvertedIndex,
    terms: impl IntoIterator<Item = S>,
    filters: &MetadataFilter,
    limit: usize,
) -> Result<Vec<RankedResult>> {
    filters.validate()?;
    if limit == 0 {
        return Err(Error::validation("limit must be at least 1"));
    }
    let mut normalized = BTreeSet::new();
    for t in terms {
        let n = normalize_term(t.as_ref()).ok_or_else(|| {
            Error::validation(format!("'{}' is not a unigram or bigram", t.as_ref()))
        })?;
        normalized.insert(n);
    }
    if normalized.is_empty() {
        return Err(Error::validation("cannot rank with an empty term set"));
    }
    let terms: Vec<String> = normalized.into_iter().collect();
    Ok(index
        .score_terms(&terms, filters)
        .into_iter()
        .take(limit)
        .map(|(doc, score, matched_terms)| RankedResult {
            doc_id: index.doc_by_ordinal(doc).meta.doc_id.clone(),
            score,
            matched_terms,
        })
        .collect())
}

/// Ranks by the lexicon's accepted terms. Rejected terms never contribute.
pub fn rank_by_lexicon(
    index: &InvertedIndex,
    lexicon: &Lexicon,
    filters: &MetadataFilter,
    limit: usize,
) -> Result<Vec<RankedResult>> {
    rank_by_terms(index, lexicon.accepted(), filters, limit)
}

/// A saved ranking. The ranking is a snapshot: later index rebuilds do not touch it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCorpus {
    name: String,
    lexicon_name: String,
    ranking: Vec<RankedResult>,
    excluded: BTreeSet<String>,
    created_at: DateTime<Utc>,
    filters: MetadataFilter,
    version: u64,
}

impl SubCorpus {
    pub fn new(
        name: &str,
        lexicon_name: &str,
        ranking: Vec<RankedResult>,
        filters: MetadataFilter,
    ) -> Result<Self> {
        validate_name("sub-corpus", name)?;
        if ranking.is_empty() {
            return Err(Error::validation("cannot save an empty ranking"));
        }
        let sub = SubCorpus {
            name: name.to_owned(),
            lexicon_name: lexicon_name.to_owned(),
            ranking,
            excluded: BTreeSet::new(),
            created_at: Utc::now(),
            filters,
            version: 0,
        };
        sub.validate()?;
        Ok(sub)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lexicon_name(&self) -> &str {
        &self.lexicon_name
    }

    pub fn ranking(&self) -> &[RankedResult] {
        &self.ranking
    }

    pub fn excluded(&self) -> &BTreeSet<String> {
        &self.excluded
    }

    pub fn created_at(&self) -> DateTime<Utc> {
        self.created_at
    }

    pub fn filters(&self) -> &MetadataFilter {
        &self.filters
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn check_version(&self, expected: u64) -> Result<()> {
        if expected != self.version {
            return Err(Error::VersionConflict {
                kind: "sub-corpus",
                name: self.name.clone(),
                expected,
                current: self.version,
            });
        }
        Ok(())
    }

    /// Ranking minus exclusions, with each member's 1-based rank in the original ranking.
    pub fn effective_members(&self) -> impl Iterator<Item = (usize, &RankedResult)> {
        self.ranking
            .iter()
            .enumerate()
            .filter(|(_, r)| !self.excluded.contains(&r.doc_id))
            .map(|(i, r)| (i + 1, r))
    }

    fn require_member(&self, doc_id: &str) -> Result<()> {
        if self.ranking.iter().any(|r| r.doc_id == doc_id) {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "'{doc_id}' is not in sub-corpus '{}'",
                self.name
            )))
        }
    }

    /// Removes a document from the effective members. Returns whether anything changed.
    pub fn exclude_document(&mut self, doc_id: &str) -> Result<bool> {
        self.require_member(doc_id)?;
        let changed = self.excluded.insert(doc_id.to_owned());
        if changed {
            self.version += 1;
        }
        Ok(changed)
    }

    pub fn include_document(&mut self, doc_id: &str) -> Result<bool> {
        self.require_member(doc_id)?;
        let changed = self.excluded.remove(doc_id);
        if changed {
            self.version += 1;
        }
        Ok(changed)
    }

    pub fn validate(&self) -> Result<()> {
        validate_name("sub-corpus", &self.name)?;
        let mut ids = BTreeSet::new();
        for r in &self.ranking {
            if !ids.insert(r.doc_id.as_str()) {
                return Err(Error::validation(format!(
                    "'{}' appears twice in the ranking",
                    r.doc_id
                )));
            }
        }
        if let Some(x) = self.excluded.iter().find(|x| !ids.contains(x.as_str())) {
            return Err(Error::validation(format!(
                "excluded '{x}' is not in the ranking"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sub-corpus serializes")
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let sub: SubCorpus = serde_json::from_str(text)
            .map_err(|e| Error::parse(source, e.line(), e.to_string()))?;
        sub.validate()?;
        Ok(sub)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub doc_id: String,
    /// Rank in the saved ranking, 1-based; exclusions do not renumber.
    pub rank: usize,
    pub score: f64,
    /// Number of distinct lexicon terms found in the document.
    pub matched_term_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportError {
    pub doc_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ExportManifest {
    pub entries: Vec<ManifestEntry>,
    pub errors: Vec<ExportError>,
}

impl ExportManifest {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(MANIFEST_HEADER).expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.doc_id.clone(),
                e.rank.to_string(),
                format!("{:.6}", e.score),
                e.matched_term_count.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }

    fn errors_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["doc_id", "error"])
            .expect("in-memory write");
        for e in &self.errors {
            w.write_record([&e.doc_id, &e.message])
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }
}

/// The files of an export, relative to the export root, plus the manifest.
#[derive(Debug, Clone)]
pub struct ExportBundle {
    pub files: Vec<(String, Vec<u8>)>,
    pub manifest: ExportManifest,
}

/// Collects the export layout in memory: `texts/<doc_id>.txt` per effective member,
/// `metadata.csv` in the ingest schema, and `manifest.csv`. Members whose text cannot be
/// read are left out of all three and listed in `export_errors.csv`.
pub fn build_export(subcorpus: &SubCorpus, corpus: &Corpus) -> Result<ExportBundle> {
    let mut files = Vec::new();
    let mut manifest = ExportManifest::default();
    let mut metas: Vec<&DocumentMeta> = Vec::new();
    for (rank, member) in subcorpus.effective_members() {
        let Some(doc) = corpus.get(&member.doc_id) else {
            manifest.errors.push(ExportError {
                doc_id: member.doc_id.clone(),
                message: "document is not in the corpus".into(),
            });
            continue;
        };
        match corpus.raw_text(&member.doc_id) {
            Ok(text) => {
                files.push((
                    format!("{TEXTS_DIR}/{}.txt", member.doc_id),
                    text.into_bytes(),
                ));
                metas.push(&doc.meta);
                manifest.entries.push(ManifestEntry {
                    doc_id: member.doc_id.clone(),
                    rank,
                    score: member.score,
                    matched_term_count: member.matched_terms.len(),
                });
            }
            Err(e) => manifest.errors.push(ExportError {
                doc_id: member.doc_id.clone(),
                message: e.to_string(),
            }),
        }
    }
    let mut meta_csv = Vec::new();
    write_metadata(&mut meta_csv, metas).map_err(|e| Error::validation(e.to_string()))?;
    files.push((METADATA_FILE.to_owned(), meta_csv));
    files.push((MANIFEST_FILE.to_owned(), manifest.to_csv()));
    if !manifest.errors.is_empty() {
        files.push((EXPORT_ERRORS_FILE.to_owned(), manifest.errors_csv()));
    }
    Ok(ExportBundle { files, manifest })
}

/// Writes the export layout under `dest_dir`. The result is re-ingestable with
/// [`crate::ingest_corpus`].
pub fn export_subcorpus(
    subcorpus: &SubCorpus,
    corpus: &Corpus,
    dest_dir: impl AsRef<Path>,
) -> Result<ExportManifest> {
    let dest = dest_dir.as_ref();
    let bundle = build_export(subcorpus, corpus)?;
    let texts = dest.join(TEXTS_DIR);
    fs::create_dir_all(&texts).map_err(|e| Error::io(&texts, e))?;
    for (rel, bytes) in &bundle.files {
        let path = dest.join(rel);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(bundle.manifest)
}
