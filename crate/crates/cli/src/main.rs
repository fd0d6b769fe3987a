use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use iduqa::answerer::{predict, AnswererRegistry};
use iduqa::chunker::TokenizerRegistry;
use iduqa::config::RunConfig;
use iduqa::corpus::{
    corpus_stats, drop_length_outliers, filter_by_keywords, read_corpus, read_manifest,
    write_corpus,
};
use iduqa::dataset::{
    build_dataset, group_histogram, read_dataset, split_by_patient, write_dataset, write_split,
    SplitRatios,
};
use iduqa::eval::{
    bootstrap_ci, read_predictions, render_report, score_predictions_with, score_samples,
    write_predictions, Aggregates, AnalysisRegistry, EvalInput, ReportFormat,
};
use iduqa::extract::Annotator;
use iduqa::lexicon::Lexicon;
use iduqa::pipeline::{annotation_records, chunk_dataset, run_all, write_json, write_jsonl};
use iduqa::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "iduqa", version)]
#[command(
    about = "Gold-standard QA datasets and evaluation for injection drug use in clinical notes"
)]
struct Cli {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for randomized stages; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// error, warn, info, debug or trace; overrides the config
    #[arg(long, global = true)]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lexicon checks
    #[command(subcommand)]
    Lexicon(LexiconCmd),
    /// Note cleaning, filtering and statistics
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Extract gold-standard answer spans to JSONL
    Annotate {
        /// Corpus JSON or note manifest (CSV/TSV)
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// QA dataset construction, splitting and statistics
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Cut contexts into overlapping token windows
    Chunk {
        #[arg(long)]
        dataset: PathBuf,
        /// JSONL output, one record per window
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        max_seq: Option<usize>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        max_q: Option<usize>,
        #[arg(long)]
        tokenizer: Option<String>,
    },
    /// Answer one question against one note
    Query {
        #[arg(long)]
        note_file: PathBuf,
        #[arg(long)]
        question: String,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Run a built-in answerer over a dataset
    Predict {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// rule_based, keyword_sentence or empty
        #[arg(long)]
        answerer: Option<String>,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Scoring and error analysis
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Multi-stage runs
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Args, Debug)]
struct LexiconArg {
    /// Lexicon file; the config's or the bundled one by default
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LexiconCmd {
    /// Load, validate and summarize a lexicon
    Validate {
        #[command(flatten)]
        lexicon: LexiconArg,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusCmd {
    /// Read a note manifest and write the cleaned corpus
    Clean {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep keyword-bearing notes and drop length outliers
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write keyword-free notes
        #[arg(long)]
        rejected: Option<PathBuf>,
        /// Keep length outliers
        #[arg(long)]
        keep_outliers: bool,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Corpus statistics, optionally with dataset figures
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum DatasetCmd {
    /// Build QA samples from a corpus
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `all` or `k:<k>[:<seed>]`
        #[arg(long)]
        pairing: Option<String>,
        /// Leave out unanswerable samples from keyword-free notes
        #[arg(long)]
        no_impossible: bool,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
    /// Patient-level train/dev/test split
    Split {
        #[arg(long)]
        dataset: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// e.g. 0.8,0.1,0.1
        #[arg(long)]
        ratios: Option<SplitRatios>,
    },
    /// Sample, note and group counts
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        lexicon: LexiconArg,
    },
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    preds: PathBuf,
}

#[derive(Subcommand, Debug)]
enum EvalCmd {
    /// Per-sample scores and aggregates
    Score {
        #[command(flatten)]
        args: ScoreArgs,
        /// Output directory for scores.jsonl and aggregates.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One error-analysis table
    Analyze {
        #[command(flatten)]
        args: ScoreArgs,
        /// note_length, question_length, answer_length, group or ratio
        #[arg(long)]
        by: String,
        /// Directory for the CSV rendering
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bootstrap confidence intervals for the three metrics
    Ci {
        #[command(flatten)]
        args: ScoreArgs,
        #[arg(long)]
        level: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Full report: markdown summary, CSV tables, JSON
    Report {
        #[command(flatten)]
        args: ScoreArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',')]
        format: Vec<Format>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Markdown,
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Markdown => ReportFormat::Markdown,
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum PipelineCmd {
    /// Clean, filter, annotate, build, split, chunk, predict and report
    All {
        /// Note manifest or corpus; the config's `paths.input` by default
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output directory; the config's `paths.output_dir` by default
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Lexicon(LexiconCmd::Validate { .. }) => "lexicon validate",
            Command::Corpus(CorpusCmd::Clean { .. }) => "corpus clean",
            Command::Corpus(CorpusCmd::Filter { .. }) => "corpus filter",
            Command::Corpus(CorpusCmd::Stats { .. }) => "corpus stats",
            Command::Annotate { .. } => "annotate",
            Command::Dataset(DatasetCmd::Build { .. }) => "dataset build",
            Command::Dataset(DatasetCmd::Split { .. }) => "dataset split",
            Command::Dataset(DatasetCmd::Stats { .. }) => "dataset stats",
            Command::Chunk { .. } => "chunk",
            Command::Query { .. } => "query",
            Command::Predict { .. } => "predict",
            Command::Eval(EvalCmd::Score { .. }) => "eval score",
            Command::Eval(EvalCmd::Analyze { .. }) => "eval analyze",
            Command::Eval(EvalCmd::Ci { .. }) => "eval ci",
            Command::Eval(EvalCmd::Report { .. }) => "eval report",
            Command::Pipeline(PipelineCmd::All { .. }) => "pipeline all",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stage = cli.command.stage();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail("config", &e),
    };
    env_logger::Builder::new()
        .parse_filters(&config.log_level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(stage, &e),
    }
}

/// Prints a one-line JSON error record to stderr.
fn fail(stage: &str, e: &Error) -> ExitCode {
    let record = json!({"error": {"stage": stage, "kind": e.kind(), "message": e.to_string()}});
    eprintln!("{record}");
    ExitCode::FAILURE
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if let Some(level) = &cli.log_level {
        config.log_level = level.clone();
    }
    Ok(config)
}

fn lexicon(arg: &LexiconArg, config: &RunConfig) -> Result<Lexicon> {
    match &arg.lexicon {
        Some(p) => Lexicon::load(p),
        None => config.lexicon(),
    }
}

fn annotator(arg: &LexiconArg, config: &RunConfig) -> Result<Arc<Annotator>> {
    Ok(Arc::new(Annotator::new(lexicon(arg, config)?)?))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse("output", e))?;
    let mut out = std::io::stdout().lock();
    stdout_result(writeln!(out, "{text}"))
}

/// A reader closing the pipe early (`| head`) is not a failure.
fn stdout_result(r: std::io::Result<()>) -> Result<()> {
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn run(command: Command, config: &RunConfig) -> Result<()> {
    match command {
        Command::Lexicon(LexiconCmd::Validate { lexicon: arg }) => {
            let a = annotator(&arg, config)?;
            let lex = a.lexicon();
            let groups: serde_json::Map<String, serde_json::Value> = a
                .bank()
                .groups()
                .map(|(g, qs)| (g.to_string(), json!(qs.len())))
                .collect();
            print_json(&json!({
                "version": lex.version,
                "keyword_groups": lex.keyword_groups.len(),
                "query_groups": lex.query_groups.len(),
                "mapping_rules": lex.mapping_rules.len(),
                "questions": a.bank().len(),
                "questions_per_group": groups,
            }))
        }
        Command::Corpus(cmd) => corpus(cmd, config),
        Command::Annotate {
            input,
            out,
            lexicon: arg,
        } => {
            let a = annotator(&arg, config)?;
            let notes = read_corpus(&input)?;
            let records = annotation_records(&notes, &a);
            ensure_parent(&out)?;
            write_jsonl(&out, &records)?;
            log::info!("{} answers from {} notes", records.len(), notes.len());
            Ok(())
        }
        Command::Dataset(cmd) => dataset(cmd, config),
        Command::Chunk {
            dataset,
            out,
            max_seq,
            stride,
            max_q,
            tokenizer,
        } => {
            let mut chunk = config.chunk.clone();
            if let Some(v) = max_seq {
                chunk.max_sequence_tokens = v;
            }
            if let Some(v) = stride {
                chunk.document_stride_tokens = v;
            }
            if let Some(v) = max_q {
                chunk.max_question_tokens = v;
            }
            if let Some(t) = tokenizer {
                chunk.tokenizer = t;
            }
            let d = read_dataset(&dataset)?;
            let registry = TokenizerRegistry::default();
            let chunks = chunk_dataset(&d, &chunk.policy(), registry.get(&chunk.tokenizer)?)?;
            ensure_parent(&out)?;
            write_jsonl(&out, &chunks)?;
            log::info!("{} windows for {} samples", chunks.len(), d.sample_count());
            Ok(())
        }
        Command::Query {
            note_file,
            question,
            lexicon: arg,
        } => {
            let a = annotator(&arg, config)?;
            let raw = std::fs::read_to_string(&note_file).map_err(|e| Error::io(&note_file, e))?;
            let cleaned = iduqa::corpus::clean_note(&raw);
            let result = a.answer_question(&cleaned, &question);
            let answers: Vec<serde_json::Value> = result
                .answers
                .iter()
                .map(|ans| {
                    json!({
                        "text": ans.text,
                        "start": iduqa::char_offset(&cleaned, ans.start),
                        "end": iduqa::char_offset(&cleaned, ans.end),
                        "groups": ans.query_group_ids,
                    })
                })
                .collect();
            print_json(&json!({
                "question": question,
                "classification": result.classification,
                "answers": answers,
                "empty_reason": result.empty_reason,
            }))
        }
        Command::Predict {
            dataset,
            out,
            answerer,
            lexicon: arg,
        } => {
            let a = annotator(&arg, config)?;
            let d = read_dataset(&dataset)?;
            let registry = AnswererRegistry::with_builtins(a);
            let name = answerer.unwrap_or_else(|| config.eval.answerer.clone());
            let preds = predict(&d, registry.get(&name)?);
            ensure_parent(&out)?;
            write_predictions(&out, &preds)
        }
        Command::Eval(cmd) => eval(cmd, config),
        Command::Pipeline(PipelineCmd::All { input, out }) => {
            let input = input
                .or_else(|| config.paths.input.clone())
                .ok_or_else(|| {
                    Error::InvalidInput("no input: pass --input or set paths.input".into())
                })?;
            let out = out
                .or_else(|| config.paths.output_dir.clone())
                .ok_or_else(|| {
                    Error::InvalidInput(
                        "no output directory: pass --out or set paths.output_dir".into(),
                    )
                })?;
            let summary = run_all(config, &input, &out)?;
            print_json(&summary)
        }
    }
}

fn corpus(cmd: CorpusCmd, config: &RunConfig) -> Result<()> {
    match cmd {
        CorpusCmd::Clean { input, out } => {
            let notes = read_manifest(&input)?;
            ensure_parent(&out)?;
            write_corpus(&out, &notes)?;
            log::info!("cleaned {} notes", notes.len());
            Ok(())
        }
        CorpusCmd::Filter {
            input,
            out,
            rejected,
            keep_outliers,
            lexicon: arg,
        } => {
            let a = annotator(&arg, config)?;
            let notes = read_corpus(&input)?;
            let (kept, dropped) = filter_by_keywords(notes, a.matchers());
            let (kept, outliers) = if keep_outliers || !config.corpus.drop_outliers {
                (kept, Vec::new())
            } else {
                drop_length_outliers(kept)
            };
            log::info!(
                "kept {}, {} without keywords, {} length outliers",
                kept.len(),
                dropped.len(),
                outliers.len()
            );
            ensure_parent(&out)?;
            write_corpus(&out, &kept)?;
            if let Some(path) = rejected {
                ensure_parent(&path)?;
                write_corpus(&path, &dropped)?;
            }
            Ok(())
        }
        CorpusCmd::Stats { input, dataset } => {
            let notes = read_corpus(&input)?;
            let d = dataset.map(read_dataset).transpose()?;
            print_json(&corpus_stats(&notes, d.as_ref()))
        }
    }
}

fn dataset(cmd: DatasetCmd, config: &RunConfig) -> Result<()> {
    match cmd {
        DatasetCmd::Build {
            input,
            out,
            pairing,
            no_impossible,
            lexicon: arg,
        } => {
            let a = annotator(&arg, config)?;
            let pairing = match pairing {
                Some(p) => p.parse()?,
                None => config.dataset.pairing()?,
            };
            let (notes, no_keyword) = filter_by_keywords(read_corpus(&input)?, a.matchers());
            let impossible = if no_impossible || !config.corpus.include_no_answer {
                Vec::new()
            } else {
                no_keyword
            };
            let d = build_dataset(&notes, &impossible, &a, pairing)?;
            ensure_parent(&out)?;
            write_dataset(&out, &d)?;
            log::info!(
                "{} samples from {} notes",
                d.sample_count(),
                d.entries.len()
            );
            Ok(())
        }
        DatasetCmd::Split {
            dataset,
            out,
            ratios,
        } => {
            let seed = config.require_seed()?;
            let d = read_dataset(&dataset)?;
            let split = split_by_patient(&d, ratios.unwrap_or(config.split), seed)?;
            for path in write_split(&out, &split)? {
                log::info!("wrote {}", path.display());
            }
            Ok(())
        }
        DatasetCmd::Stats {
            dataset,
            lexicon: arg,
        } => {
            let lex = lexicon(&arg, config)?;
            let d = read_dataset(&dataset)?;
            print_json(&json!({
                "notes": d.entries.len(),
                "patients": d.patients().len(),
                "samples": d.sample_count(),
                "impossible": d.samples().filter(|(_, s)| s.is_impossible).count(),
                "groups": group_histogram(&d, &lex.query_group_ids()),
            }))
        }
    }
}

fn eval(cmd: EvalCmd, config: &RunConfig) -> Result<()> {
    match cmd {
        EvalCmd::Score { args, out } => {
            let d = read_dataset(&args.dataset)?;
            let preds = read_predictions(&args.preds)?;
            let (scores, _) = score_samples(&d, &preds)?;
            let aggregates = Aggregates::of(&scores)
                .ok_or_else(|| Error::InvalidInput("the dataset has no samples to score".into()))?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                write_jsonl(&dir.join("scores.jsonl"), &scores)?;
                write_json(&dir.join("aggregates.json"), &aggregates)?;
            }
            print_json(&aggregates)
        }
        EvalCmd::Analyze { args, by, out } => {
            let d = read_dataset(&args.dataset)?;
            let preds = read_predictions(&args.preds)?;
            let (scores, _) = score_samples(&d, &preds)?;
            let registry = AnalysisRegistry::default();
            let input = EvalInput {
                dataset: &d,
                preds: &preds,
                scores: &scores,
            };
            let tables = registry.get(&by)?.run(&input)?;
            let mut stdout = std::io::stdout().lock();
            for t in &tables {
                stdout_result(writeln!(stdout, "{}", t.to_markdown()))?;
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                for t in &tables {
                    let path = dir.join(format!("{}.csv", t.name));
                    std::fs::write(&path, t.to_csv()?).map_err(|e| Error::io(&path, e))?;
                }
            }
            Ok(())
        }
        EvalCmd::Ci { args, level, reps } => {
            let seed = config.require_seed()?;
            let d = read_dataset(&args.dataset)?;
            let preds = read_predictions(&args.preds)?;
            let (scores, _) = score_samples(&d, &preds)?;
            let mut boot = config.eval.bootstrap(seed);
            if let Some(l) = level {
                boot.level = l;
            }
            if let Some(r) = reps {
                boot.replicates = r;
            }
            let column = |f: fn(&iduqa::eval::SampleScore) -> f64| -> Vec<f64> {
                scores.iter().map(f).collect()
            };
            let ci = |v: Vec<f64>| bootstrap_ci(&v, &boot).map(|c| c.scaled(100.0));
            print_json(&json!({
                "exact_match": ci(column(|s| f64::from(s.em)))?,
                "perfect_recall": ci(column(|s| f64::from(s.perfect_recall)))?,
                "f1": ci(column(|s| s.f1))?,
            }))
        }
        EvalCmd::Report { args, out, format } => {
            let seed = config.require_seed()?;
            let d = read_dataset(&args.dataset)?;
            let preds = read_predictions(&args.preds)?;
            let report = score_predictions_with(&d, &preds, &config.eval.bootstrap(seed))?;
            let formats: Vec<ReportFormat> = if format.is_empty() {
                config.eval.formats.clone()
            } else {
                format.into_iter().map(Into::into).collect()
            };
            for path in render_report(&report, &out, &formats)? {
                log::info!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}
