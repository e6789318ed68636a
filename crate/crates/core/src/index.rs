//! Inverted index: unigram and adjacent-bigram postings, document lengths and per-year
//! token totals.
//!
//! A term containing a single space (`"scarlet fever"`) is looked up in the bigram
//! postings; anything else in the unigram postings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, Document, DocumentMeta};
use crate::error::{Error, Result};

pub const SNAPSHOT_FORMAT: &str = "curatr-index";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNIPPET_RADIUS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    /// Position of the document in the index's doc_id-sorted document table.
    pub doc: u32,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub meta: DocumentMeta,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetadataFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_from: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year_to: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Case-insensitive substring of the author field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author: Option<String>,
}

impl MetadataFilter {
    pub fn validate(&self) -> Result<()> {
        if let (Some(from), Some(to)) = (self.year_from, self.year_to) {
            if from > to {
                return Err(Error::validation(format!(
                    "year_from {from} is after year_to {to}"
                )));
            }
        }
        Ok(())
    }

    /// Documents without a year fail any active year bound.
    pub fn matches(&self, meta: &DocumentMeta) -> bool {
        if self.year_from.is_some() || self.year_to.is_some() {
            let Some(year) = meta.year else {
                return false;
            };
            if self.year_from.is_some_and(|f| year < f) || self.year_to.is_some_and(|t| year > t) {
                return false;
            }
        }
        if let Some(cat) = &self.category {
            if &meta.category != cat {
                return false;
            }
        }
        if let Some(author) = &self.author {
            if !meta.author.to_lowercase().contains(&author.to_lowercase()) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub doc_id: String,
    pub title: String,
    pub author: String,
    pub year: Option<i32>,
    pub category: String,
    pub length: u64,
    pub score: f64,
    pub matched_terms: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramPoint {
    pub year: i32,
    pub count: u64,
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramSeries {
    pub term: String,
    pub points: Vec<NgramPoint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    /// Token offset of the first token shown.
    pub start: usize,
    /// Token offset of the first match.
    pub match_position: usize,
    pub tokens: Vec<String>,
}

/// Normalizes a unigram or bigram term with the corpus tokenizer. Returns `None` when
/// the term tokenizes to nothing or to more than two tokens.
pub fn normalize_term(term: &str) -> Option<String> {
    let toks = tokenize(term);
    match toks.len() {
        1 | 2 => Some(toks.join(" ")),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedIndex {
    format: String,
    format_version: u32,
    docs: Vec<IndexedDoc>,
    postings: BTreeMap<String, Vec<Posting>>,
    bigram_postings: BTreeMap<String, Vec<Posting>>,
    year_totals: BTreeMap<i32, u64>,
    #[serde(skip)]
    lookup: HashMap<String, u32>,
}

impl PartialEq for InvertedIndex {
    fn eq(&self, other: &Self) -> bool {
        self.format_version == other.format_version
            && self.docs == other.docs
            && self.postings == other.postings
            && self.bigram_postings == other.bigram_postings
            && self.year_totals == other.year_totals
    }
}

fn add_counts(target: &mut BTreeMap<String, Vec<Posting>>, doc: u32, counts: HashMap<String, u32>) {
    for (term, count) in counts {
        target.entry(term).or_default().push(Posting { doc, count });
    }
}

pub fn build_index(corpus: &Corpus) -> InvertedIndex {
    let mut docs = Vec::with_capacity(corpus.len());
    let mut postings = BTreeMap::new();
    let mut bigram_postings = BTreeMap::new();
    // Documents come in ascending doc_id order, so posting lists are born sorted.
    for (ordinal, doc) in corpus.documents().enumerate() {
        let ordinal = ordinal as u32;
        let mut uni: HashMap<String, u32> = HashMap::new();
        for t in &doc.tokens {
            *uni.entry(t.clone()).or_default() += 1;
        }
        let mut bi: HashMap<String, u32> = HashMap::new();
        for pair in doc.tokens.windows(2) {
            *bi.entry(format!("{} {}", pair[0], pair[1])).or_default() += 1;
        }
        add_counts(&mut postings, ordinal, uni);
        add_counts(&mut bigram_postings, ordinal, bi);
        docs.push(IndexedDoc {
            meta: doc.meta.clone(),
            length: doc.length() as u64,
        });
    }
    let mut index = InvertedIndex {
        format: SNAPSHOT_FORMAT.to_owned(),
        format_version: SNAPSHOT_VERSION,
        docs,
        postings,
        bigram_postings,
        year_totals: corpus.total_tokens_by_year().clone(),
        lookup: HashMap::new(),
    };
    index.rebuild_lookup();
    index
}

impl InvertedIndex {
    fn rebuild_lookup(&mut self) {
        self.lookup = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.meta.doc_id.clone(), i as u32))
            .collect();
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    /// Indexed documents in ascending doc_id order.
    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn doc(&self, doc_id: &str) -> Option<&IndexedDoc> {
        self.lookup.get(doc_id).map(|&i| &self.docs[i as usize])
    }

    pub fn doc_by_ordinal(&self, ordinal: u32) -> &IndexedDoc {
        &self.docs[ordinal as usize]
    }

    pub fn doc_length(&self, doc_id: &str) -> Option<u64> {
        self.doc(doc_id).map(|d| d.length)
    }

    pub fn year_totals(&self) -> &BTreeMap<i32, u64> {
        &self.year_totals
    }

    pub fn unigrams(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings
            .iter()
            .map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn bigrams(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.bigram_postings
            .iter()
            .map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    /// Posting list of a unigram, or of a bigram when the term contains one space.
    /// The term is used verbatim; see [`normalize_term`].
    pub fn postings(&self, term: &str) -> &[Posting] {
        let map = if term.contains(' ') {
            &self.bigram_postings
        } else {
            &self.postings
        };
        map.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Occurrences of `term` in `doc_id`; 0 for unknown terms or documents.
    pub fn term_count(&self, term: &str, doc_id: &str) -> u32 {
        let Some(&ordinal) = self.lookup.get(doc_id) else {
            return 0;
        };
        let Some(term) = normalize_term(term) else {
            return 0;
        };
        let list = self.postings(&term);
        list.binary_search_by_key(&ordinal, |p| p.doc)
            .map(|i| list[i].count)
            .unwrap_or(0)
    }

    /// Total corpus frequency of a term.
    pub fn corpus_frequency(&self, term: &str) -> u64 {
        self.postings(term).iter().map(|p| p.count as u64).sum()
    }

    /// Relative-frequency scoring shared by keyword search and lexicon ranking: for each
    /// document passing `filter`, the summed occurrences of `terms` divided by the
    /// document length. Zero-score documents are left out. Sorted by descending score,
    /// ties by ascending doc_id.
    pub(crate) fn score_terms(
        &self,
        terms: &[String],
        filter: &MetadataFilter,
    ) -> Vec<(u32, f64, BTreeMap<String, u32>)> {
        let mut matched: BTreeMap<u32, BTreeMap<String, u32>> = BTreeMap::new();
        for term in terms {
            for p in self.postings(term) {
                matched
                    .entry(p.doc)
                    .or_default()
                    .insert(term.clone(), p.count);
            }
        }
        let mut scored: Vec<_> = matched
            .into_iter()
            .filter(|(doc, _)| filter.matches(&self.docs[*doc as usize].meta))
            .map(|(doc, terms)| {
                let total: u64 = terms.values().map(|&c| c as u64).sum();
                let score = total as f64 / self.docs[doc as usize].length as f64;
                (doc, score, terms)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1).then_with(|| {
                self.docs[a.0 as usize]
                    .meta
                    .doc_id
                    .cmp(&self.docs[b.0 as usize].meta.doc_id)
            })
        });
        scored
    }

    /// Keyword search over unigram query tokens. The query is tokenized and de-duplicated;
    /// documents need at least one query token and must pass every filter.
    pub fn keyword_search(
        &self,
        query: &str,
        filter: &MetadataFilter,
        limit: Option<usize>,
    ) -> Result<Vec<SearchHit>> {
        filter.validate()?;
        let mut seen = BTreeSet::new();
        let terms: Vec<String> = tokenize(query)
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        if terms.is_empty() {
            return Err(Error::validation("query has no tokens"));
        }
        let mut hits: Vec<SearchHit> = self
            .score_terms(&terms, filter)
            .into_iter()
            .map(|(doc, score, matched_terms)| {
                let d = &self.docs[doc as usize];
                SearchHit {
                    doc_id: d.meta.doc_id.clone(),
                    title: d.meta.title.clone(),
                    author: d.meta.author.clone(),
                    year: d.meta.year,
                    category: d.meta.category.clone(),
                    length: d.length,
                    score,
                    matched_terms,
                }
            })
            .collect();
        if let Some(limit) = limit {
            hits.truncate(limit);
        }
        Ok(hits)
    }

    /// Per-year counts of a unigram or bigram over `year_from..=year_to`. Years with no
    /// corpus tokens are omitted; documents without a year never contribute.
    pub fn ngram_series(&self, term: &str, year_from: i32, year_to: i32) -> Result<NgramSeries> {
        if year_from > year_to {
            return Err(Error::validation(format!(
                "year_from {year_from} is after year_to {year_to}"
            )));
        }
        let term = normalize_term(term)
            .ok_or_else(|| Error::validation(format!("'{term}' is not a unigram or bigram")))?;
        let mut by_year: BTreeMap<i32, u64> = BTreeMap::new();
        for p in self.postings(&term) {
            if let Some(year) = self.docs[p.doc as usize].meta.year {
                *by_year.entry(year).or_default() += p.count as u64;
            }
        }
        let points = self
            .year_totals
            .range(year_from..=year_to)
            .filter(|(_, &total)| total > 0)
            .map(|(&year, &total)| {
                let count = by_year.get(&year).copied().unwrap_or(0);
                NgramPoint {
                    year,
                    count,
                    relative_frequency: count as f64 / total as f64,
                }
            })
            .collect();
        Ok(NgramSeries { term, points })
    }

    pub fn save_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let source = path.display().to_string();
        let mut index: InvertedIndex = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::parse(&source, e.line(), e.to_string()))?;
        if index.format != SNAPSHOT_FORMAT || index.format_version != SNAPSHOT_VERSION {
            return Err(Error::parse(
                &source,
                1,
                format!(
                    "unsupported snapshot {} v{} (expected {SNAPSHOT_FORMAT} v{SNAPSHOT_VERSION})",
                    index.format, index.format_version
                ),
            ));
        }
        index.rebuild_lookup();
        Ok(index)
    }
}

/// Close-reading excerpt: up to `radius` tokens either side of the first occurrence of
/// any of `terms` (unigrams or bigrams) in the document.
pub fn snippet(doc: &Document, terms: &[String], radius: usize) -> Option<Snippet> {
    let pos = doc.tokens.iter().enumerate().position(|(i, tok)| {
        terms.iter().any(|t| match t.split_once(' ') {
            Some((a, b)) => tok == a && doc.tokens.get(i + 1).is_some_and(|n| n == b),
            None => tok == t,
        })
    })?;
    let start = pos.saturating_sub(radius);
    let end = (pos + radius + 1).min(doc.tokens.len());
    Some(Snippet {
        start,
        match_position: pos,
        tokens: doc.tokens[start..end].to_vec(),
    })
}
