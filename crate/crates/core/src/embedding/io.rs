//! Word-vector text format.
//!
//! ```text
//! <vocab_size> <dimension>
//! <term> <v1> ... <vd>
//! ...
//! # dimension=100
//! # window=5
//! # ...
//! # counts=<c0> <c1> ...
//! ```
//!
//! Components use Rust's shortest round-trip float formatting, so a save/load cycle is exact.
//! The trailing `# key=value` block records the training configuration; it is optional on
//! load, in which case defaults are assumed and counts are recorded as 0.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{EmbeddingModel, TrainingConfig, Vocabulary};
use crate::error::{Error, Result};

pub fn write_model<W: Write>(model: &EmbeddingModel, mut w: W) -> std::io::Result<()> {
    let cfg = model.config();
    let vocab = model.vocabulary();
    writeln!(w, "{} {}", vocab.len(), model.dimension())?;
    for id in 0..vocab.len() {
        w.write_all(vocab.term(id).as_bytes())?;
        for v in model.vector_by_id(id) {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    writeln!(w, "# dimension={}", cfg.dimension)?;
    writeln!(w, "# window={}", cfg.window)?;
    writeln!(w, "# min_count={}", cfg.min_count)?;
    writeln!(w, "# negative_samples={}", cfg.negative_samples)?;
    writeln!(w, "# epochs={}", cfg.epochs)?;
    writeln!(w, "# initial_learning_rate={}", cfg.initial_learning_rate)?;
    writeln!(w, "# subsample={}", cfg.subsample)?;
    writeln!(w, "# seed={}", cfg.seed)?;
    writeln!(w, "# architecture=cbow-negative-sampling")?;
    writeln!(w, "# threads=1")?;
    write!(w, "# counts=")?;
    for (i, c) in vocab.counts().iter().enumerate() {
        if i > 0 {
            w.write_all(b" ")?;
        }
        write!(w, "{c}")?;
    }
    w.write_all(b"\n")?;
    w.flush()
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(model, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file), &path.display().to_string())
}

fn parse_field<T: std::str::FromStr>(
    source: &str,
    line: usize,
    key: &str,
    value: &str,
) -> Result<T> {
    value.trim().parse().map_err(|_| {
        Error::parse(
            source,
            line,
            format!("invalid value for '{key}': '{value}'"),
        )
    })
}

pub fn read_model<R: BufRead>(reader: R, source: &str) -> Result<EmbeddingModel> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((n, Ok(l))) => Ok(Some((n, l))),
            Some((n, Err(e))) => Err(Error::parse(source, n, e.to_string())),
        }
    };

    let (_, header) = next_line()?.ok_or_else(|| Error::parse(source, 1, "empty model file"))?;
    let mut parts = header.split_whitespace();
    let (size, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => (
            parse_field::<usize>(source, 1, "vocab_size", a)?,
            parse_field::<usize>(source, 1, "dimension", b)?,
        ),
        _ => {
            return Err(Error::parse(
                source,
                1,
                "header must be `<vocab_size> <dimension>`",
            ))
        }
    };
    if dim == 0 {
        return Err(Error::parse(source, 1, "dimension must be at least 1"));
    }

    let mut terms = Vec::with_capacity(size);
    let mut vectors = Vec::with_capacity(size * dim);
    for row in 1..=size {
        let (line_no, line) = match next_line()? {
            Some((n, l)) if !l.starts_with('#') => (n, l),
            _ => {
                return Err(Error::parse(
                    source,
                    row + 1,
                    format!("vector row {row} of {size} missing"),
                ))
            }
        };
        let mut fields = line.split_whitespace();
        let term = fields
            .next()
            .ok_or_else(|| Error::parse(source, line_no, format!("vector row {row} is empty")))?;
        let before = vectors.len();
        for f in fields {
            let v: f32 = f.parse().map_err(|_| {
                Error::parse(
                    source,
                    line_no,
                    format!("vector row {row}: bad component '{f}'"),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("vector row {row}: non-finite component '{f}'"),
                ));
            }
            vectors.push(v);
        }
        let got = vectors.len() - before;
        if got != dim {
            return Err(Error::parse(
                source,
                line_no,
                format!("vector row {row}: expected {dim} components, found {got}"),
            ));
        }
        terms.push(term.to_owned());
    }

    let mut config = TrainingConfig {
        dimension: dim,
        ..TrainingConfig::default()
    };
    let mut counts: Option<Vec<u64>> = None;
    while let Some((n, line)) = next_line()? {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some(comment) = trimmed.strip_prefix('#') else {
            return Err(Error::parse(
                source,
                n,
                format!("unexpected content after {size} vector rows"),
            ));
        };
        let Some((key, value)) = comment.trim().split_once('=') else {
            continue;
        };
        let key = key.trim();
        match key {
            "dimension" => {
                let d: usize = parse_field(source, n, key, value)?;
                if d != dim {
                    return Err(Error::parse(
                        source,
                        n,
                        format!("dimension={d} disagrees with header dimension {dim}"),
                    ));
                }
            }
            "window" => config.window = parse_field(source, n, key, value)?,
            "min_count" => config.min_count = parse_field(source, n, key, value)?,
            "negative_samples" => config.negative_samples = parse_field(source, n, key, value)?,
            "epochs" => config.epochs = parse_field(source, n, key, value)?,
            "initial_learning_rate" => {
                config.initial_learning_rate = parse_field(source, n, key, value)?
            }
            "subsample" => config.subsample = parse_field(source, n, key, value)?,
            "seed" => config.seed = parse_field(source, n, key, value)?,
            "counts" => {
                let parsed = value
                    .split_whitespace()
                    .map(|c| parse_field::<u64>(source, n, key, c))
                    .collect::<Result<Vec<_>>>()?;
                if parsed.len() != size {
                    return Err(Error::parse(
                        source,
                        n,
                        format!("counts has {} entries for {size} terms", parsed.len()),
                    ));
                }
                counts = Some(parsed);
            }
            _ => {}
        }
    }

    let counts = counts.unwrap_or_else(|| vec![0; size]);
    let vocab = Vocabulary::from_entries(terms.into_iter().zip(counts).collect(), config.min_count)
        .map_err(|e| Error::parse(source, 0, e.to_string()))?;
    EmbeddingModel::new(vocab, vectors, config).map_err(|e| Error::parse(source, 0, e.to_string()))
}
