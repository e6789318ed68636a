//! Reference oracles for the test suites.
//!
//! Nothing here depends on `curatr-core`: each oracle is a deliberately naive
//! reimplementation (character-level tokenizer, raw token rescans, exhaustive cosine
//! scans) so the engine can be checked against code that shares none of its paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

/// Seed terms of the four example lexicons (ethnic identity, migration, contagion, disease).
pub const SEED_SETS: [(&str, &[&str]); 4] = [
    (
        "ethnic-identity",
        &["irish", "fenian", "papist", "jewish", "jew"],
    ),
    (
        "migration",
        &["immigrant", "alien", "interloper", "migrant"],
    ),
    (
        "contagion",
        &[
            "infect",
            "epidemic",
            "inoculate",
            "contagion",
            "contaminate",
            "vaccinate",
        ],
    ),
    (
        "disease",
        &["disease", "smallpox", "cholera", "fever", "pestilence"],
    ),
];

pub fn mini_corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini_corpus")
}

/// Lowercase the whole string, then walk it one character at a time.
pub fn reference_tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in lower.chars() {
        let keep = ch.is_alphabetic() || ch.is_numeric() || ch == '\'' || ch == '-';
        if keep {
            cur.push(ch);
        } else {
            push_trimmed(&mut out, &cur);
            cur.clear();
        }
    }
    push_trimmed(&mut out, &cur);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let mut chars: Vec<char> = s.chars().collect();
    while chars.first().is_some_and(|c| *c == '\'' || *c == '-') {
        chars.remove(0);
    }
    while chars.last().is_some_and(|c| *c == '\'' || *c == '-') {
        chars.pop();
    }
    if !chars.is_empty() {
        out.push(chars.into_iter().collect());
    }
}

#[derive(Debug, Clone)]
pub struct RefDoc {
    pub doc_id: String,
    pub title: String,
    pub author: String,
    pub year: Option<i32>,
    pub category: String,
    pub tokens: Vec<String>,
}

/// Reads a corpus directory with the reference tokenizer. Rows without a text are skipped.
pub fn read_reference_corpus(dir: &Path) -> Vec<RefDoc> {
    let mut rdr = csv::Reader::from_path(dir.join("metadata.csv")).expect("metadata.csv");
    let mut docs: Vec<RefDoc> = rdr
        .records()
        .filter_map(|r| {
            let r = r.expect("well-formed row");
            let text = fs::read_to_string(dir.join("texts").join(format!("{}.txt", &r[0]))).ok()?;
            Some(RefDoc {
                doc_id: r[0].to_string(),
                title: r[1].to_string(),
                author: r[2].to_string(),
                year: if r[3].is_empty() {
                    None
                } else {
                    Some(r[3].parse().unwrap())
                },
                category: r[4].to_string(),
                tokens: reference_tokenize(&text),
            })
        })
        .collect();
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    docs
}

/// Occurrences of a unigram, or of a space-separated bigram as an adjacent pair.
pub fn recount(tokens: &[String], term: &str) -> u64 {
    let parts: Vec<&str> = term.split(' ').collect();
    if tokens.len() < parts.len() {
        return 0;
    }
    (0..=tokens.len() - parts.len())
        .filter(|&i| parts.iter().enumerate().all(|(j, p)| tokens[i + j] == *p))
        .count() as u64
}

/// Word-count style frequency table over all documents.
pub fn frequency_table(docs: &[RefDoc]) -> BTreeMap<String, u64> {
    let mut freq = BTreeMap::new();
    for d in docs {
        for t in &d.tokens {
            *freq.entry(t.clone()).or_insert(0) += 1;
        }
    }
    freq
}

/// Rescans every document's raw tokens; score = summed term occurrences / length.
/// Descending score, ties by doc_id, zero scores dropped.
pub fn brute_force_rank(
    docs: &[RefDoc],
    terms: &[&str],
    keep: impl Fn(&RefDoc) -> bool,
    limit: usize,
) -> Vec<(String, f64)> {
    let terms: BTreeSet<&str> = terms.iter().copied().collect();
    let mut out: Vec<(String, f64)> = docs
        .iter()
        .filter(|d| keep(d))
        .filter_map(|d| {
            let hits: u64 = terms.iter().map(|t| recount(&d.tokens, t)).sum();
            (hits > 0).then(|| (d.doc_id.clone(), hits as f64 / d.tokens.len() as f64))
        })
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out.truncate(limit);
    out
}

/// Exhaustive cosine scan: mean of the query rows against every other row, sorted by
/// descending score then ascending term.
pub fn brute_force_top_k(
    terms: &[String],
    vectors: &[Vec<f32>],
    query: &[usize],
    k: usize,
    exclude: &BTreeSet<String>,
) -> Vec<(String, f64)> {
    let dim = vectors[0].len();
    let mut q = vec![0.0f64; dim];
    for &i in query {
        for d in 0..dim {
            q[d] += vectors[i][d] as f64;
        }
    }
    for x in q.iter_mut() {
        *x /= query.len() as f64;
    }
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut all = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if query.contains(&i) || exclude.contains(&terms[i]) {
            continue;
        }
        let vn = v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        let mut dot = 0.0f64;
        for d in 0..dim {
            dot += q[d] * v[d] as f64;
        }
        all.push((terms[i].clone(), dot / (qn * vn)));
    }
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// splitmix64, enough for reproducible fixtures.
pub struct FixtureRng(u64);

impl FixtureRng {
    pub fn new(seed: u64) -> Self {
        FixtureRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn pick<'a>(&mut self, items: &[&'a str]) -> &'a str {
        items[self.below(items.len())]
    }

    pub fn unit_f32(&mut self) -> f32 {
        (self.next_u64() >> 40) as f32 / (1u64 << 24) as f32
    }
}

/// Planted pair in the generated corpus. The tokenizer lowercases `docA`/`docB`.
pub const PLANTED_PAIR: (&str, &str) = ("doca", "docb");
pub const PLANTED_SEED: u64 = 2024;
pub const PLANTED_SENTENCES: usize = 2000;

/// Template sentences in which `docA` and `docB` fill the same slot with equal
/// probability, so their contexts are identically distributed. Other templates give the
/// rest of the vocabulary distinct contexts.
pub fn planted_synonym_sentences(seed: u64, count: usize) -> Vec<String> {
    let mut rng = FixtureRng::new(seed);
    let twins = ["docA", "docB"];
    let clerks = ["clerk", "judge", "bailiff"];
    let paper_verbs = ["signs", "files", "stamps", "reads", "copies"];
    let papers = ["letter", "ledger", "report", "deed", "warrant"];
    let rooms = ["office", "archive", "registry", "chamber"];
    let animals = ["horse", "sheep", "goat", "heron"];
    let moves = ["grazes", "wanders", "rests", "drinks"];
    let waters = ["river", "pond", "meadow", "stream"];
    let weathers = ["rain", "snow", "fog", "wind"];
    let falls = ["falls", "drifts", "settles", "lingers"];
    let towns = ["harbour", "valley", "market", "hillside"];
    (0..count)
        .map(|_| match rng.below(4) {
            0 | 1 => format!(
                "the {} {} the {} in the {}",
                rng.pick(&twins),
                rng.pick(&paper_verbs),
                rng.pick(&papers),
                rng.pick(&rooms)
            ),
            2 => format!(
                "a {} {} by the {} while the {} waits",
                rng.pick(&animals),
                rng.pick(&moves),
                rng.pick(&waters),
                rng.pick(&clerks)
            ),
            _ => format!(
                "cold {} {} over the {} at dawn",
                rng.pick(&weathers),
                rng.pick(&falls),
                rng.pick(&towns)
            ),
        })
        .collect()
}

/// Writes a corpus directory (`metadata.csv` + `texts/`) for `(doc_id, year, text)` rows.
pub fn write_corpus_dir(dir: &Path, docs: &[(String, Option<i32>, String)]) {
    fs::create_dir_all(dir.join("texts")).unwrap();
    let mut w = csv::Writer::from_path(dir.join("metadata.csv")).unwrap();
    w.write_record(["doc_id", "title", "author", "year", "category"])
        .unwrap();
    for (id, year, text) in docs {
        let year = year.map(|y| y.to_string()).unwrap_or_default();
        w.write_record([
            id.as_str(),
            id.as_str(),
            "Generator",
            year.as_str(),
            "synthetic",
        ])
        .unwrap();
        fs::write(dir.join("texts").join(format!("{id}.txt")), text).unwrap();
    }
    w.flush().unwrap();
}
