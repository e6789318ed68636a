//! Corpus ingestion: `metadata.csv` + `texts/<doc_id>.txt` into tokenized documents.
//!
//! Tokenizer rules, applied character by character:
//!
//! * a token character is a letter, a digit, an apostrophe (`'`) or a hyphen (`-`);
//!   every other character separates tokens;
//! * token characters are lowercased with the Unicode lowercase mapping;
//! * leading and trailing apostrophes/hyphens are stripped and tokens left empty are dropped.
//!
//! There is no stemming and no stopword removal. Numbers are kept as tokens.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const METADATA_FILE: &str = "metadata.csv";
pub const TEXTS_DIR: &str = "texts";
pub const METADATA_HEADER: [&str; 5] = ["doc_id", "title", "author", "year", "category"];
pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 2100;

/// Human-readable statement of the tokenizer rules, surfaced by the service's config endpoint.
pub const TOKENIZER_RULES: &str = "Unicode lowercase; split on any character that is not a \
letter, digit, apostrophe or hyphen; strip leading/trailing apostrophes and hyphens; drop empty \
tokens; no stemming; no stopword removal; numeric tokens kept";

fn is_token_char(ch: char) -> bool {
    ch.is_alphanumeric() || ch == '\'' || ch == '-'
}

fn is_edge_char(ch: char) -> bool {
    ch == '\'' || ch == '-'
}

pub fn tokenize(raw_text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut flush = |current: &mut String| {
        let trimmed = current.trim_matches(is_edge_char);
        if !trimmed.is_empty() {
            tokens.push(trimmed.to_owned());
        }
        current.clear();
    };
    for ch in raw_text.chars() {
        if is_token_char(ch) {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            flush(&mut current);
        }
    }
    flush(&mut current);
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: String,
    pub title: String,
    pub author: String,
    /// CE year; `None` when the metadata left it blank.
    pub year: Option<i32>,
    pub category: String,
}

impl DocumentMeta {
    pub fn validate(&self) -> Result<()> {
        if self.doc_id.trim().is_empty() {
            return Err(Error::validation("doc_id must not be empty"));
        }
        if let Some(year) = self.year {
            if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
                return Err(Error::validation(format!(
                    "year {year} outside {MIN_YEAR}..={MAX_YEAR}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub meta: DocumentMeta,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(meta: DocumentMeta, raw_text: &str) -> Self {
        Document {
            meta,
            tokens: tokenize(raw_text),
        }
    }

    pub fn id(&self) -> &str {
        &self.meta.doc_id
    }

    pub fn length(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: BTreeMap<String, Document>,
    total_tokens_by_year: BTreeMap<i32, u64>,
    /// Directory the corpus was ingested from, used to locate raw texts on export.
    root: Option<PathBuf>,
}

impl Corpus {
    /// Builds a corpus from in-memory documents. Fails on an invalid or duplicate doc_id.
    pub fn from_documents(documents: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for doc in documents {
            corpus.insert(doc)?;
        }
        Ok(corpus)
    }

    fn insert(&mut self, doc: Document) -> Result<()> {
        doc.meta.validate()?;
        if self.documents.contains_key(doc.id()) {
            return Err(Error::validation(format!(
                "duplicate doc_id '{}'",
                doc.id()
            )));
        }
        if let Some(year) = doc.meta.year {
            *self.total_tokens_by_year.entry(year).or_default() += doc.length() as u64;
        }
        self.documents.insert(doc.meta.doc_id.clone(), doc);
        Ok(())
    }

    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.root = Some(root.into());
        self
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Documents in ascending doc_id order.
    pub fn documents(&self) -> impl Iterator<Item = &Document> {
        self.documents.values()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.documents.get(doc_id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_tokens_by_year(&self) -> &BTreeMap<i32, u64> {
        &self.total_tokens_by_year
    }

    pub fn total_tokens(&self) -> u64 {
        self.documents.values().map(|d| d.length() as u64).sum()
    }

    /// Path of the raw text for `doc_id`, if the corpus came from disk.
    pub fn text_path(&self, doc_id: &str) -> Option<PathBuf> {
        self.root
            .as_ref()
            .map(|root| root.join(TEXTS_DIR).join(format!("{doc_id}.txt")))
    }

    /// Reads the raw (untokenized) text of a document from the corpus directory.
    pub fn raw_text(&self, doc_id: &str) -> Result<String> {
        let path = self.text_path(doc_id).ok_or_else(|| Error::NotFound {
            kind: "text",
            name: doc_id.to_owned(),
        })?;
        fs::read_to_string(&path).map_err(|e| Error::io(path, e))
    }
}

/// A non-fatal problem found during ingest. The offending row is skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IngestIssue {
    MalformedRow { line: u64, message: String },
    MissingText { doc_id: String, path: PathBuf },
    UnreadableText { doc_id: String, message: String },
}

impl std::fmt::Display for IngestIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IngestIssue::MalformedRow { line, message } => {
                write!(f, "metadata.csv line {line}: {message}")
            }
            IngestIssue::MissingText { doc_id, path } => {
                write!(f, "skipped '{doc_id}': missing {}", path.display())
            }
            IngestIssue::UnreadableText { doc_id, message } => {
                write!(f, "skipped '{doc_id}': {message}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingest {
    pub corpus: Corpus,
    pub issues: Vec<IngestIssue>,
}

/// Parses metadata rows. Malformed rows become [`IngestIssue::MalformedRow`]; a wrong header,
/// an I/O failure or a duplicate doc_id is fatal.
pub fn read_metadata<R: Read>(
    reader: R,
    source: &str,
) -> Result<(Vec<DocumentMeta>, Vec<IngestIssue>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    // An entirely empty file has no header row; treat it as zero documents.
    if !header.is_empty() && header.iter().ne(METADATA_HEADER) {
        return Err(Error::parse(
            source,
            1,
            format!(
                "header must be exactly `{}`, found `{}`",
                METADATA_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut metas = Vec::new();
    let mut issues = Vec::new();
    let mut seen: BTreeMap<String, u64> = BTreeMap::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if e.is_io_error() {
                    return Err(Error::parse(source, line as usize, e.to_string()));
                }
                issues.push(IngestIssue::MalformedRow {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let year = match record[3].trim() {
            "" => None,
            y => match y.parse::<i32>() {
                Ok(y) => Some(y),
                Err(_) => {
                    issues.push(IngestIssue::MalformedRow {
                        line,
                        message: format!("year '{y}' is not an integer"),
                    });
                    continue;
                }
            },
        };
        let meta = DocumentMeta {
            doc_id: record[0].trim().to_owned(),
            title: record[1].to_owned(),
            author: record[2].to_owned(),
            year,
            category: record[4].to_owned(),
        };
        if let Err(e) = meta.validate() {
            issues.push(IngestIssue::MalformedRow {
                line,
                message: e.to_string(),
            });
            continue;
        }
        if let Some(first) = seen.insert(meta.doc_id.clone(), line) {
            return Err(Error::parse(
                source,
                line as usize,
                format!("duplicate doc_id '{}' (first at line {first})", meta.doc_id),
            ));
        }
        metas.push(meta);
    }
    Ok((metas, issues))
}

pub fn write_metadata<'a, W: Write>(
    writer: W,
    metas: impl IntoIterator<Item = &'a DocumentMeta>,
) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(METADATA_HEADER)?;
    for m in metas {
        let year = m.year.map(|y| y.to_string()).unwrap_or_default();
        wtr.write_record([
            m.doc_id.as_str(),
            m.title.as_str(),
            m.author.as_str(),
            year.as_str(),
            m.category.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn ingest_corpus(corpus_dir: impl AsRef<Path>) -> Result<Ingest> {
    let dir = corpus_dir.as_ref();
    let meta_path = dir.join(METADATA_FILE);
    let file = fs::File::open(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let (metas, mut issues) = read_metadata(file, &meta_path.display().to_string())?;

    let mut corpus = Corpus::default().with_root(dir);
    for meta in metas {
        let path = dir.join(TEXTS_DIR).join(format!("{}.txt", meta.doc_id));
        match fs::read_to_string(&path) {
            Ok(text) => corpus.insert(Document::new(meta, &text))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                issues.push(IngestIssue::MissingText {
                    doc_id: meta.doc_id,
                    path,
                });
            }
            Err(e) => issues.push(IngestIssue::UnreadableText {
                doc_id: meta.doc_id,
                message: e.to_string(),
            }),
        }
    }
    Ok(Ingest { corpus, issues })
}
