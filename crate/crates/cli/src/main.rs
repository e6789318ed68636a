//! `curatr`: the whole pipeline from the shell. Records go to stdout as tab-separated
//! lines; failures go to stderr as one `CODE: message` line.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curatr_core::curation::DEFAULT_RANK_LIMIT;
use curatr_core::lexicon::DEFAULT_RECOMMENDATIONS;
use curatr_core::{
    build_index, export_subcorpus, ingest_corpus, load_model, most_similar, rank_by_lexicon,
    save_model, train_cbow, InvertedIndex, Lexicon, MetadataFilter, RankedResult, Store, SubCorpus,
    TrainingConfig,
};
use curatr_server::{model_ref_for, ServeConfig};

const DISPLAY_LIMIT: usize = 10;

#[derive(Parser)]
#[command(name = "curatr", version, about = "Lexicon-driven corpus curation")]
struct Cli {
    /// Directory holding saved lexicons and sub-corpora.
    #[arg(long, global = true, default_value = "curatr-state")]
    state: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a corpus directory and report documents, tokens and problems.
    Ingest { corpus_dir: PathBuf },
    /// Train a CBOW embedding model and write it in word2vec text format.
    Train {
        corpus_dir: PathBuf,
        #[command(flatten)]
        training: TrainingArgs,
        #[arg(short, long, default_value = "model.txt")]
        output: PathBuf,
    },
    /// Build the inverted index and write its snapshot.
    Index {
        corpus_dir: PathBuf,
        #[arg(short, long, default_value = "index.snap")]
        output: PathBuf,
    },
    /// Nearest neighbours of the mean vector of the given terms.
    Similar {
        model: PathBuf,
        #[arg(required = true)]
        terms: Vec<String>,
        #[arg(short, default_value_t = DEFAULT_RECOMMENDATIONS)]
        k: usize,
    },
    /// Keyword search over the index.
    Search {
        query: String,
        #[arg(long, default_value = "index.snap")]
        index: PathBuf,
        #[command(flatten)]
        filters: FilterArgs,
        #[arg(long, default_value_t = DISPLAY_LIMIT)]
        limit: usize,
    },
    #[command(subcommand)]
    Lexicon(LexiconCommand),
    /// Rank documents by a lexicon's accepted terms.
    Rank {
        lexicon: String,
        #[arg(long, default_value = "index.snap")]
        index: PathBuf,
        #[command(flatten)]
        filters: FilterArgs,
        #[arg(long, default_value_t = DISPLAY_LIMIT)]
        limit: usize,
        /// Save the ranking (up to --save-limit documents) as a named sub-corpus.
        #[arg(long, value_name = "NAME")]
        save: Option<String>,
        #[arg(long, default_value_t = DEFAULT_RANK_LIMIT)]
        save_limit: usize,
    },
    #[command(subcommand)]
    Subcorpus(SubcorpusCommand),
    /// Yearly counts and relative frequencies of a unigram or bigram.
    Ngram {
        term: String,
        #[arg(long, default_value = "index.snap")]
        index: PathBuf,
        #[arg(long)]
        from: Option<i32>,
        #[arg(long)]
        to: Option<i32>,
    },
    /// Write a sub-corpus as a re-ingestable corpus directory.
    Export {
        subcorpus: String,
        dest: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Start a lexicon from seed terms.
    Create {
        name: String,
        seeds: Vec<String>,
        #[arg(long)]
        model: PathBuf,
    },
    /// Open a round of candidate terms.
    Recommend {
        name: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(short, default_value_t = DEFAULT_RECOMMENDATIONS)]
        k: usize,
        #[arg(long)]
        version: Option<u64>,
    },
    /// Close the open round with accepted and rejected candidates.
    Decide {
        name: String,
        #[arg(long, value_delimiter = ',')]
        accept: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        reject: Vec<String>,
        #[arg(long)]
        version: Option<u64>,
    },
    Show {
        name: String,
        /// Print the stored JSON document instead of records.
        #[arg(long)]
        json: bool,
    },
    List,
}

#[derive(Subcommand)]
enum SubcorpusCommand {
    Show {
        name: String,
    },
    Exclude {
        name: String,
        doc_id: String,
        #[arg(long)]
        version: Option<u64>,
    },
    Include {
        name: String,
        doc_id: String,
        #[arg(long)]
        version: Option<u64>,
    },
    List,
}

#[derive(Args)]
struct TrainingArgs {
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    min_count: u64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 5)]
    negative: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = 0.0)]
    subsample: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl TrainingArgs {
    fn config(&self) -> TrainingConfig {
        TrainingConfig {
            dimension: self.dim,
            window: self.window,
            min_count: self.min_count,
            negative_samples: self.negative,
            epochs: self.epochs,
            initial_learning_rate: self.lr,
            subsample: self.subsample,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long)]
    year_from: Option<i32>,
    #[arg(long)]
    year_to: Option<i32>,
    #[arg(long)]
    category: Option<String>,
    #[arg(long)]
    author: Option<String>,
}

impl FilterArgs {
    fn filter(&self) -> MetadataFilter {
        MetadataFilter {
            year_from: self.year_from,
            year_to: self.year_to,
            category: self.category.clone(),
            author: self.author.clone(),
        }
    }
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Train and save the model if the model file does not exist.
    #[arg(long)]
    train: bool,
    #[command(flatten)]
    training: TrainingArgs,
    /// Enable POST /api/admin/reload.
    #[arg(long)]
    allow_admin: bool,
    /// Serve this directory (the browser client) at `/`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

struct Failure {
    code: String,
    message: String,
    exit: u8,
}

impl From<curatr_core::Error> for Failure {
    fn from(e: curatr_core::Error) -> Self {
        let exit = if matches!(e, curatr_core::Error::Io { .. }) {
            2
        } else {
            1
        };
        Failure {
            code: e.code().to_owned(),
            message: e.to_string(),
            exit,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: "IO".into(),
            message: e.to_string(),
            exit: 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let e = match e.downcast::<curatr_core::Error>() {
            Ok(core) => return core.into(),
            Err(e) => e,
        };
        let io = e.chain().any(|c| c.is::<io::Error>());
        Failure {
            code: if io { "IO" } else { "STARTUP" }.into(),
            message: format!("{e:#}"),
            exit: if io { 2 } else { 1 },
        }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure {
            code: "VALIDATION".into(),
            message,
            exit: 1,
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            fail(&Failure::from(
                line.trim_start_matches("error: ").to_owned(),
            ));
            return ExitCode::from(1);
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            drop(out);
            fail(&f);
            ExitCode::from(f.exit)
        }
    }
}

fn fail(f: &Failure) {
    let message = f.message.replace(['\n', '\r'], " ");
    eprintln!("{}: {}", f.code, message);
}

fn store(cli_state: &Path) -> Result<Store, Failure> {
    Ok(Store::open(cli_state)?)
}

fn run(cli: Cli, out: &mut impl Write) -> CliResult {
    match cli.command {
        Command::Ingest { corpus_dir } => {
            let ingest = ingest_corpus(&corpus_dir)?;
            for issue in &ingest.issues {
                eprintln!("warning: {issue}");
            }
            writeln!(out, "documents\t{}", ingest.corpus.len())?;
            writeln!(out, "tokens\t{}", ingest.corpus.total_tokens())?;
            writeln!(out, "issues\t{}", ingest.issues.len())?;
        }
        Command::Train {
            corpus_dir,
            training,
            output,
        } => {
            let corpus = ingest_corpus(&corpus_dir)?.corpus;
            let model = train_cbow(&corpus, &training.config())?;
            save_model(&model, &output)?;
            writeln!(out, "vocabulary\t{}", model.len())?;
            writeln!(out, "dimension\t{}", model.dimension())?;
            writeln!(out, "model\t{}", output.display())?;
        }
        Command::Index { corpus_dir, output } => {
            let corpus = ingest_corpus(&corpus_dir)?.corpus;
            let index = build_index(&corpus);
            index.save_snapshot(&output)?;
            writeln!(out, "documents\t{}", index.num_docs())?;
            writeln!(out, "unigrams\t{}", index.unigrams().count())?;
            writeln!(out, "bigrams\t{}", index.bigrams().count())?;
            writeln!(out, "index\t{}", output.display())?;
        }
        Command::Similar { model, terms, k } => {
            let model = load_model(&model)?;
            let query: Vec<String> = terms
                .iter()
                .map(|t| curatr_core::tokenize(t).join(" "))
                .filter(|t| !t.is_empty())
                .collect();
            for r in most_similar(&model, &query, k, &Default::default())? {
                writeln!(out, "{}\t{}", r.term, r.score)?;
            }
        }
        Command::Search {
            query,
            index,
            filters,
            limit,
        } => {
            let index = InvertedIndex::load_snapshot(&index)?;
            for (i, hit) in index
                .keyword_search(&query, &filters.filter(), Some(limit))?
                .iter()
                .enumerate()
            {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    hit.doc_id,
                    hit.score,
                    hit.title,
                    hit.author,
                    year_text(hit.year)
                )?;
            }
        }
        Command::Lexicon(cmd) => lexicon(cmd, &store(&cli.state)?, out)?,
        Command::Rank {
            lexicon,
            index,
            filters,
            limit,
            save,
            save_limit,
        } => {
            let store = store(&cli.state)?;
            let lex = store.lexicon(&lexicon)?;
            let index = InvertedIndex::load_snapshot(&index)?;
            let filter = filters.filter();
            let shown = rank_by_lexicon(&index, &lex, &filter, limit)?;
            write_ranking(
                out,
                &index,
                shown.iter().enumerate().map(|(i, r)| (i + 1, r)),
            )?;
            if let Some(name) = save {
                let ranking = rank_by_lexicon(&index, &lex, &filter, save_limit)?;
                let sub =
                    store.create_subcorpus(SubCorpus::new(&name, lex.name(), ranking, filter)?)?;
                eprintln!(
                    "saved sub-corpus '{}' with {} documents",
                    sub.name(),
                    sub.ranking().len()
                );
            }
        }
        Command::Subcorpus(cmd) => subcorpus(cmd, &store(&cli.state)?, out)?,
        Command::Ngram {
            term,
            index,
            from,
            to,
        } => {
            let index = InvertedIndex::load_snapshot(&index)?;
            let years = index.year_totals();
            let from = from
                .or_else(|| years.keys().next().copied())
                .unwrap_or(curatr_core::corpus::MIN_YEAR);
            let to = to
                .or_else(|| years.keys().next_back().copied())
                .unwrap_or(curatr_core::corpus::MAX_YEAR);
            for p in index.ngram_series(&term, from, to)?.points {
                writeln!(out, "{}\t{}\t{}", p.year, p.count, p.relative_frequency)?;
            }
        }
        Command::Export {
            subcorpus,
            dest,
            corpus,
        } => {
            let sub = store(&cli.state)?.subcorpus(&subcorpus)?;
            let corpus = ingest_corpus(&corpus)?.corpus;
            let manifest = export_subcorpus(&sub, &corpus, &dest)?;
            for e in &manifest.errors {
                eprintln!("warning: {}: {}", e.doc_id, e.message);
            }
            writeln!(out, "exported\t{}", manifest.entries.len())?;
            writeln!(out, "errors\t{}", manifest.errors.len())?;
            writeln!(out, "destination\t{}", dest.display())?;
        }
        Command::Serve(args) => serve(args, cli.state)?,
    }
    Ok(())
}

fn lexicon(cmd: LexiconCommand, store: &Store, out: &mut impl Write) -> CliResult {
    match cmd {
        LexiconCommand::Create { name, seeds, model } => {
            let lex =
                store.create_lexicon(Lexicon::create(&name, &seeds, &model_ref_for(&model))?)?;
            write_lexicon(out, &lex)?;
        }
        LexiconCommand::Recommend {
            name,
            model,
            k,
            version,
        } => {
            let model = load_model(&model)?;
            let (lex, round) = store.update_lexicon(&name, version, |lex| {
                let round = lex.recommend(&model, k)?;
                lex.open_round(round.clone());
                Ok(round)
            })?;
            for c in &round.candidates {
                writeln!(out, "{}\t{}", c.term, c.score)?;
            }
            eprintln!("lexicon '{}' now at version {}", lex.name(), lex.version());
        }
        LexiconCommand::Decide {
            name,
            accept,
            reject,
            version,
        } => {
            let (lex, ()) = store.update_lexicon(&name, version, |lex| {
                lex.record_decisions(&accept, &reject).map(|_| ())
            })?;
            write_lexicon(out, &lex)?;
        }
        LexiconCommand::Show { name, json } => {
            let lex = store.lexicon(&name)?;
            if json {
                writeln!(out, "{}", lex.to_json())?;
            } else {
                write_lexicon(out, &lex)?;
            }
        }
        LexiconCommand::List => {
            for lex in store.lexicons()? {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    lex.name(),
                    lex.version(),
                    lex.accepted().len(),
                    lex.rounds().len()
                )?;
            }
        }
    }
    Ok(())
}

fn write_lexicon(out: &mut impl Write, lex: &Lexicon) -> io::Result<()> {
    writeln!(out, "name\t{}", lex.name())?;
    writeln!(out, "version\t{}", lex.version())?;
    writeln!(out, "model\t{}", lex.model_ref())?;
    writeln!(out, "rounds\t{}", lex.rounds().len())?;
    for t in lex.accepted() {
        writeln!(out, "accepted\t{t}")?;
    }
    for t in lex.rejected() {
        writeln!(out, "rejected\t{t}")?;
    }
    if let Some(p) = lex.pending() {
        for c in &p.candidates {
            writeln!(out, "pending\t{}\t{}", c.term, c.score)?;
        }
    }
    Ok(())
}

fn subcorpus(cmd: SubcorpusCommand, store: &Store, out: &mut impl Write) -> CliResult {
    let sub = match cmd {
        SubcorpusCommand::Show { name } => store.subcorpus(&name)?,
        SubcorpusCommand::Exclude {
            name,
            doc_id,
            version,
        } => {
            store
                .update_subcorpus(&name, version, |s| s.exclude_document(&doc_id))?
                .0
        }
        SubcorpusCommand::Include {
            name,
            doc_id,
            version,
        } => {
            store
                .update_subcorpus(&name, version, |s| s.include_document(&doc_id))?
                .0
        }
        SubcorpusCommand::List => {
            for s in store.subcorpora()? {
                let members = s.effective_members().count();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    s.name(),
                    s.version(),
                    s.lexicon_name(),
                    members
                )?;
            }
            return Ok(());
        }
    };
    writeln!(out, "name\t{}", sub.name())?;
    writeln!(out, "version\t{}", sub.version())?;
    writeln!(out, "lexicon\t{}", sub.lexicon_name())?;
    for r in sub.ranking() {
        writeln!(
            out,
            "{}\t{}\t{}",
            if sub.excluded().contains(&r.doc_id) {
                "excluded"
            } else {
                "member"
            },
            r.doc_id,
            r.score
        )?;
    }
    Ok(())
}

fn write_ranking<'a>(
    out: &mut impl Write,
    index: &InvertedIndex,
    rows: impl Iterator<Item = (usize, &'a RankedResult)>,
) -> io::Result<()> {
    for (rank, r) in rows {
        let meta = index.doc(&r.doc_id).map(|d| &d.meta);
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            rank,
            r.doc_id,
            r.score,
            meta.map_or("", |m| m.title.as_str()),
            meta.map_or("", |m| m.author.as_str()),
            year_text(meta.and_then(|m| m.year))
        )?;
    }
    Ok(())
}

fn year_text(year: Option<i32>) -> String {
    year.map(|y| y.to_string()).unwrap_or_default()
}

fn serve(args: ServeArgs, state_dir: PathBuf) -> CliResult {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .init();
    let training = args.training.config();
    training.validate()?;
    let config = ServeConfig {
        host: args.host,
        port: args.port,
        corpus_dir: args.corpus,
        model_path: args.model,
        state_dir,
        train_if_missing: args.train,
        training,
        allow_admin: args.allow_admin,
        static_dir: args.static_dir,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(curatr_server::serve(config))?;
    Ok(())
}
