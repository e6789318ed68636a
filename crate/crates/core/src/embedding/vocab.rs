use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Dense term ids `0..len`, ordered by descending corpus count, ties by term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    term_to_id: HashMap<String, usize>,
    counts: Vec<u64>,
    min_count: u64,
}

impl Vocabulary {
    /// Builds a vocabulary from `(term, count)` pairs, keeping the given order.
    /// Counts of 0 mean "unknown" (vectors imported without frequency data).
    pub fn from_entries(entries: Vec<(String, u64)>, min_count: u64) -> Result<Self> {
        let mut term_to_id = HashMap::with_capacity(entries.len());
        let mut terms = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (id, (term, count)) in entries.into_iter().enumerate() {
            if term.is_empty() || term.chars().any(char::is_whitespace) {
                return Err(Error::validation(format!(
                    "invalid vocabulary term {term:?}"
                )));
            }
            if term_to_id.insert(term.clone(), id).is_some() {
                return Err(Error::validation(format!(
                    "duplicate vocabulary term '{term}'"
                )));
            }
            terms.push(term);
            counts.push(count);
        }
        Ok(Vocabulary {
            terms,
            term_to_id,
            counts,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

pub fn build_vocabulary(corpus: &Corpus, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::validation("min_count must be at least 1"));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in corpus.documents() {
        for tok in &doc.tokens {
            *freq.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut entries: Vec<(String, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| (t.to_owned(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary::from_entries(entries, min_count)
}
