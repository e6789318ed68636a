use std::path::Path;
use std::process::{Command, Output};

use curatr_testkit::{
    mini_corpus_dir, planted_synonym_sentences, write_corpus_dir, PLANTED_SEED, PLANTED_SENTENCES,
};

fn curatr(state: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curatr"))
        .arg("--state")
        .arg(state)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn failure(out: &Output) -> (i32, String) {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "expected one line, got {err:?}");
    (out.status.code().unwrap(), err.trim_end().to_owned())
}

#[test]
fn similar_on_planted_corpus_prints_partner_first() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("planted");
    let docs: Vec<(String, Option<i32>, String)> =
        planted_synonym_sentences(PLANTED_SEED, PLANTED_SENTENCES)
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    format!("s{i:05}"),
                    Some(1850),
                    s.replace("docA", "fever").replace("docB", "plague"),
                )
            })
            .collect();
    write_corpus_dir(&corpus, &docs);
    let model = dir.path().join("model.txt");
    let state = dir.path().join("state");
    stdout(&curatr(
        &state,
        &[
            "train",
            corpus.to_str().unwrap(),
            "--seed",
            "1",
            "-o",
            model.to_str().unwrap(),
        ],
    ));

    let out = stdout(&curatr(
        &state,
        &["similar", model.to_str().unwrap(), "Fever", "-k", "3"],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    let rows: Vec<(&str, f64)> = lines
        .iter()
        .map(|l| {
            let (term, score) = l.split_once('\t').unwrap();
            (term, score.parse().unwrap())
        })
        .collect();
    assert_eq!(rows[0].0, "plague");
    assert!(rows.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn exit_codes_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    let corpus = mini_corpus_dir();
    let corpus = corpus.to_str().unwrap();
    let model = dir.path().join("m.txt");
    let model = model.to_str().unwrap();
    let index = dir.path().join("i.snap");
    let index = index.to_str().unwrap();

    let (code, line) = failure(&curatr(
        &state,
        &["lexicon", "create", "empty", "--model", model],
    ));
    assert_eq!(code, 1);
    assert!(line.starts_with("VALIDATION: "), "{line}");

    let (code, line) = failure(&curatr(&state, &["train", "/definitely/not/here"]));
    assert_eq!(code, 2);
    assert!(line.starts_with("IO: "), "{line}");

    let (code, line) = failure(&curatr(&state, &["train", corpus, "--dim", "0"]));
    assert_eq!(code, 1);
    assert!(line.starts_with("VALIDATION: "), "{line}");

    let (code, line) = failure(&curatr(&state, &["frobnicate"]));
    assert_eq!(code, 1);
    assert!(line.starts_with("VALIDATION: "), "{line}");
    assert!(curatr(&state, &["--help"]).status.success());

    stdout(&curatr(
        &state,
        &[
            "train",
            corpus,
            "--dim",
            "16",
            "--min-count",
            "2",
            "-o",
            model,
        ],
    ));
    stdout(&curatr(&state, &["index", corpus, "-o", index]));
    let (code, line) = failure(&curatr(&state, &["rank", "ghost", "--index", index]));
    assert_eq!(
        (code, line.as_str()),
        (1, "NOT_FOUND: lexicon 'ghost' not found")
    );

    let (code, line) = failure(&curatr(&state, &["similar", model, "xyzzy"]));
    assert_eq!(code, 1);
    assert!(line.starts_with("OOV_TERM: "), "{line}");

    stdout(&curatr(
        &state,
        &[
            "lexicon", "create", "d", "fever", "cholera", "--model", model,
        ],
    ));
    let (code, line) = failure(&curatr(
        &state,
        &["lexicon", "create", "d", "fever", "--model", model],
    ));
    assert_eq!(code, 1);
    assert!(line.starts_with("CONFLICT: "), "{line}");
    stdout(&curatr(
        &state,
        &["lexicon", "recommend", "d", "--model", model, "-k", "4"],
    ));
    let (code, line) = failure(&curatr(
        &state,
        &["lexicon", "decide", "d", "--version", "0"],
    ));
    assert_eq!(code, 1);
    assert!(line.starts_with("VERSION_CONFLICT: "), "{line}");
    let (code, line) = failure(&curatr(
        &state,
        &["lexicon", "decide", "d", "--accept", "not-offered"],
    ));
    assert_eq!(code, 1);
    assert!(line.starts_with("VALIDATION: "), "{line}");

    let (code, line) = failure(&curatr(
        &state,
        &["ngram", "three word phrase", "--index", index],
    ));
    assert_eq!(code, 1);
    assert!(line.starts_with("VALIDATION: "), "{line}");
}

#[test]
fn record_formats_are_tab_separated() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    let corpus = mini_corpus_dir();
    let corpus = corpus.to_str().unwrap();
    let index = dir.path().join("i.snap");
    let index = index.to_str().unwrap();

    assert_eq!(
        stdout(&curatr(&state, &["ingest", corpus])),
        "documents\t12\ntokens\t2620\nissues\t0\n"
    );
    stdout(&curatr(&state, &["index", corpus, "-o", index]));

    let series = stdout(&curatr(
        &state,
        &[
            "ngram", "plague", "--index", index, "--from", "1890", "--to", "1899",
        ],
    ));
    assert_eq!(series, "1893\t0\t0\n1899\t1\t0.004878048780487805\n");

    let hits = stdout(&curatr(
        &state,
        &[
            "search",
            "fever",
            "--index",
            index,
            "--year-from",
            "1880",
            "--year-to",
            "1890",
        ],
    ));
    for line in hits.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 6, "{line}");
        let year: i32 = cols[5].parse().unwrap();
        assert!((1880..=1890).contains(&year));
    }

    let model = dir.path().join("unused.txt");
    stdout(&curatr(
        &state,
        &[
            "lexicon",
            "create",
            "dis",
            "disease",
            "smallpox",
            "cholera",
            "fever",
            "pestilence",
            "--model",
            model.to_str().unwrap(),
        ],
    ));
    let ranked = stdout(&curatr(&state, &["rank", "dis", "--index", index]));
    let rows: Vec<Vec<&str>> = ranked.lines().map(|l| l.split('\t').collect()).collect();
    assert!(!rows.is_empty() && rows.len() <= 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 6);
        assert_eq!(r[0], (i + 1).to_string());
    }
    let limited = stdout(&curatr(
        &state,
        &[
            "rank",
            "dis",
            "--index",
            index,
            "--limit",
            "2",
            "--category",
            "medicine",
        ],
    ));
    assert!(limited.lines().count() <= 2);

    let shown = stdout(&curatr(&state, &["lexicon", "show", "dis"]));
    assert!(
        shown.starts_with("name\tdis\nversion\t0\nmodel\tunused.txt\nrounds\t0\n"),
        "{shown}"
    );
    let json: serde_json::Value = serde_json::from_str(&stdout(&curatr(
        &state,
        &["lexicon", "show", "dis", "--json"],
    )))
    .unwrap();
    assert_eq!(json["name"], "dis");
}
