//! Thematic lexicons grown from seed terms by repeated recommend/decide rounds.
//!
//! A round is opened by [`Lexicon::open_round`] with candidates from [`Lexicon::recommend`],
//! and closed by [`Lexicon::record_decisions`]. Only terms explicitly rejected are kept
//! out of later rounds; undecided candidates may come back. Every mutation bumps
//! `version`, which callers use for optimistic concurrency.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::embedding::{most_similar, EmbeddingModel, SimilarityResult};
use crate::error::{Error, Result};
use crate::index::normalize_term;

pub const DEFAULT_RECOMMENDATIONS: usize = 20;

/// Candidates offered to the user that have not been decided on yet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingRound {
    pub query_terms: Vec<String>,
    pub candidates: Vec<SimilarityResult>,
    pub opened_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRound {
    pub query_terms: Vec<String>,
    pub candidates: Vec<SimilarityResult>,
    pub accepted_now: Vec<String>,
    pub rejected_now: Vec<String>,
    pub timestamp: DateTime<Utc>,
}

impl ExpansionRound {
    fn validate(&self, ordinal: usize) -> Result<()> {
        let candidates: BTreeSet<&str> = self.candidates.iter().map(|c| c.term.as_str()).collect();
        for t in self.accepted_now.iter().chain(&self.rejected_now) {
            if !candidates.contains(t.as_str()) {
                return Err(Error::validation(format!(
                    "round {ordinal}: decided term '{t}' was not a candidate"
                )));
            }
        }
        if let Some(t) = self
            .accepted_now
            .iter()
            .find(|t| self.rejected_now.contains(t))
        {
            return Err(Error::validation(format!(
                "round {ordinal}: '{t}' both accepted and rejected"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    name: String,
    model_ref: String,
    seeds: Vec<String>,
    accepted: BTreeSet<String>,
    rejected: BTreeSet<String>,
    rounds: Vec<ExpansionRound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pending: Option<PendingRound>,
    version: u64,
}

/// Names double as file names in the state directory.
pub(crate) fn validate_name(kind: &str, name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "{kind} name '{name}' must be 1-128 letters, digits, '-', '_' or '.', not starting with '.'"
        )))
    }
}

fn dedup_terms(kind: &str, list: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for t in list {
        if !seen.insert(t) {
            return Err(Error::validation(format!("'{t}' listed twice in {kind}")));
        }
    }
    Ok(())
}

impl Lexicon {
    /// Seeds are normalized with the corpus tokenizer and must be one or two tokens each.
    pub fn create<S: AsRef<str>>(name: &str, seeds: &[S], model_ref: &str) -> Result<Self> {
        validate_name("lexicon", name)?;
        if seeds.is_empty() {
            return Err(Error::validation("a lexicon needs at least one seed term"));
        }
        let mut normalized = Vec::with_capacity(seeds.len());
        for s in seeds {
            let term = normalize_term(s.as_ref()).ok_or_else(|| {
                Error::validation(format!(
                    "seed '{}' must be a single token or a two-token phrase",
                    s.as_ref()
                ))
            })?;
            if !normalized.contains(&term) {
                normalized.push(term);
            }
        }
        Ok(Lexicon {
            name: name.to_owned(),
            model_ref: model_ref.to_owned(),
            accepted: normalized.iter().cloned().collect(),
            seeds: normalized,
            rejected: BTreeSet::new(),
            rounds: Vec::new(),
            pending: None,
            version: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model_ref(&self) -> &str {
        &self.model_ref
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    pub fn accepted(&self) -> &BTreeSet<String> {
        &self.accepted
    }

    pub fn rejected(&self) -> &BTreeSet<String> {
        &self.rejected
    }

    pub fn rounds(&self) -> &[ExpansionRound] {
        &self.rounds
    }

    pub fn pending(&self) -> Option<&PendingRound> {
        self.pending.as_ref()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn check_version(&self, expected: u64) -> Result<()> {
        if expected != self.version {
            return Err(Error::VersionConflict {
                kind: "lexicon",
                name: self.name.clone(),
                expected,
                current: self.version,
            });
        }
        Ok(())
    }

    /// Up to `k` embedding neighbours of the mean vector of every accepted single-token
    /// term the model knows. Accepted and rejected terms are never offered. Does not
    /// modify the lexicon.
    pub fn recommend(&self, model: &EmbeddingModel, k: usize) -> Result<PendingRound> {
        let unigrams: Vec<&String> = self.accepted.iter().filter(|t| !t.contains(' ')).collect();
        let query_terms: Vec<String> = unigrams
            .iter()
            .filter(|t| model.contains(t))
            .map(|t| t.to_string())
            .collect();
        if query_terms.is_empty() {
            return Err(Error::OutOfVocabulary {
                terms: self.accepted.iter().cloned().collect(),
            });
        }
        let exclude: BTreeSet<String> = self.accepted.union(&self.rejected).cloned().collect();
        let candidates = most_similar(model, &query_terms, k, &exclude)?;
        Ok(PendingRound {
            query_terms,
            candidates,
            opened_at: Utc::now(),
        })
    }

    /// Makes `round` the latest candidate list, replacing any undecided one.
    pub fn open_round(&mut self, round: PendingRound) {
        self.pending = Some(round);
        self.version += 1;
    }

    /// Closes the open round with the user's decisions. Candidates in neither list stay
    /// undecided.
    pub fn record_decisions(
        &mut self,
        accepted_now: &[String],
        rejected_now: &[String],
    ) -> Result<&ExpansionRound> {
        self.record_decisions_at(accepted_now, rejected_now, Utc::now())
    }

    pub fn record_decisions_at(
        &mut self,
        accepted_now: &[String],
        rejected_now: &[String],
        timestamp: DateTime<Utc>,
    ) -> Result<&ExpansionRound> {
        let Some(pending) = &self.pending else {
            return Err(Error::validation(format!(
                "lexicon '{}' has no open round; request recommendations first",
                self.name
            )));
        };
        dedup_terms("accept", accepted_now)?;
        dedup_terms("reject", rejected_now)?;
        let round = ExpansionRound {
            query_terms: pending.query_terms.clone(),
            candidates: pending.candidates.clone(),
            accepted_now: accepted_now.to_vec(),
            rejected_now: rejected_now.to_vec(),
            timestamp,
        };
        round.validate(self.rounds.len() + 1)?;

        self.accepted.extend(round.accepted_now.iter().cloned());
        self.rejected.extend(round.rejected_now.iter().cloned());
        self.rounds.push(round);
        self.pending = None;
        self.version += 1;
        Ok(self.rounds.last().expect("just pushed"))
    }

    /// Accepted and rejected sets rebuilt from the seeds and round history alone.
    pub fn replay(&self) -> (BTreeSet<String>, BTreeSet<String>) {
        let mut accepted: BTreeSet<String> = self.seeds.iter().cloned().collect();
        let mut rejected = BTreeSet::new();
        for r in &self.rounds {
            accepted.extend(r.accepted_now.iter().cloned());
            rejected.extend(r.rejected_now.iter().cloned());
        }
        (accepted, rejected)
    }

    pub fn validate(&self) -> Result<()> {
        validate_name("lexicon", &self.name)?;
        if self.seeds.is_empty() {
            return Err(Error::validation(format!(
                "lexicon '{}' has no seeds",
                self.name
            )));
        }
        if let Some(s) = self.seeds.iter().find(|s| !self.accepted.contains(*s)) {
            return Err(Error::validation(format!("seed '{s}' is not accepted")));
        }
        if let Some(t) = self.accepted.intersection(&self.rejected).next() {
            return Err(Error::validation(format!(
                "'{t}' is both accepted and rejected"
            )));
        }
        for (i, r) in self.rounds.iter().enumerate() {
            r.validate(i + 1)?;
        }
        let (accepted, rejected) = self.replay();
        if accepted != self.accepted || rejected != self.rejected {
            return Err(Error::validation(
                "accepted/rejected sets disagree with the round history",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lexicon serializes")
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let lex: Lexicon = serde_json::from_str(text)
            .map_err(|e| Error::parse(source, e.line(), e.to_string()))?;
        lex.validate()?;
        Ok(lex)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }
}
