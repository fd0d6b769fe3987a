//! Stage compositions shared by the CLI, including the full run from a note
//! manifest to an evaluation report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::answerer::{predict, AnswererRegistry};
use crate::chunker::{chunk_sample, Chunk, ChunkPolicy, Tokenizer, TokenizerRegistry};
use crate::config::RunConfig;
use crate::corpus::{
    corpus_stats, drop_length_outliers, filter_by_keywords, read_corpus, write_corpus, Note,
};
use crate::dataset::{
    build_dataset, split_by_patient, write_dataset, write_split, Dataset, Pairing,
};
use crate::error::{Error, Result};
use crate::eval::{render_report, score_predictions_with, write_predictions};
use crate::extract::{AnnotationRecord, Annotator};

/// Notes sorted into the pools the dataset is built from.
#[derive(Debug, Clone, Default)]
pub struct PreparedCorpus {
    /// Keyword-bearing notes within the length fence.
    pub notes: Vec<Note>,
    /// Keyword-free notes within their length fence.
    pub no_keyword: Vec<Note>,
    pub outliers: Vec<Note>,
}

/// Keyword filter, then length-outlier removal on each pool.
pub fn prepare_corpus(
    notes: Vec<Note>,
    annotator: &Annotator,
    drop_outliers: bool,
) -> PreparedCorpus {
    let (kept, no_keyword) = filter_by_keywords(notes, annotator.matchers());
    if !drop_outliers {
        return PreparedCorpus {
            notes: kept,
            no_keyword,
            outliers: Vec::new(),
        };
    }
    let (notes, mut outliers) = drop_length_outliers(kept);
    let (no_keyword, more) = drop_length_outliers(no_keyword);
    outliers.extend(more);
    PreparedCorpus {
        notes,
        no_keyword,
        outliers,
    }
}

pub fn annotation_records(notes: &[Note], annotator: &Annotator) -> Vec<AnnotationRecord> {
    notes
        .iter()
        .flat_map(|n| {
            annotator
                .extract_note(n)
                .into_iter()
                .map(move |a| AnnotationRecord::new(n, &a))
        })
        .collect()
}

/// Chunks every sample of the dataset, in file order.
pub fn chunk_dataset(
    dataset: &Dataset,
    policy: &ChunkPolicy,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Chunk>> {
    let mut chunks = Vec::new();
    for (entry, sample) in dataset.samples() {
        chunks.extend(chunk_sample(entry, sample, policy, tokenizer)?.chunks);
    }
    Ok(chunks)
}

/// One JSON record per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::parse("jsonl record", e))?;
        out.push(b'\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json =
        serde_json::to_string_pretty(value).map_err(|e| Error::parse("json output", e))?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Counts from a full run; contains nothing run-specific beyond the inputs,
/// so identical inputs give an identical file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub seed: u64,
    pub input_notes: usize,
    pub keyword_notes: usize,
    pub no_keyword_notes: usize,
    pub outlier_notes: usize,
    pub annotations: usize,
    pub samples: usize,
    pub impossible_samples: usize,
    pub chunks: usize,
    pub split_samples: [usize; 3],
    pub split_patients: [usize; 3],
    pub eval_split: String,
    pub answerer: String,
    pub exact_match: f64,
    pub perfect_recall: f64,
    pub f1: f64,
    pub files: Vec<String>,
}

/// Runs every stage and writes the artifacts under `out_dir`:
/// `corpus.json`, `annotations.jsonl`, `dataset.json`, `stats.json`,
/// `split/`, `chunks.jsonl`, `predictions.json`, `report/`, `summary.json`.
pub fn run_all(config: &RunConfig, input: &Path, out_dir: &Path) -> Result<PipelineSummary> {
    config.validate()?;
    let seed = config.require_seed()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let annotator = Arc::new(Annotator::new(config.lexicon()?)?);
    let mut files: Vec<PathBuf> = Vec::new();

    let raw = read_corpus(input)?;
    let input_notes = raw.len();
    log::info!("read {input_notes} notes from {}", input.display());
    let prepared = prepare_corpus(raw, &annotator, config.corpus.drop_outliers);
    log::info!(
        "{} keyword notes, {} keyword-free, {} length outliers dropped",
        prepared.notes.len(),
        prepared.no_keyword.len(),
        prepared.outliers.len()
    );
    let path = out_dir.join("corpus.json");
    write_corpus(&path, &prepared.notes)?;
    files.push(path);

    let records = annotation_records(&prepared.notes, &annotator);
    let path = out_dir.join("annotations.jsonl");
    write_jsonl(&path, &records)?;
    files.push(path);

    let no_answer: &[Note] = if config.corpus.include_no_answer {
        &prepared.no_keyword
    } else {
        &[]
    };
    let pairing: Pairing = config.dataset.pairing()?;
    let dataset = build_dataset(&prepared.notes, no_answer, &annotator, pairing)?;
    log::info!("built {} samples", dataset.sample_count());
    let path = out_dir.join("dataset.json");
    write_dataset(&path, &dataset)?;
    files.push(path);

    let mut all_notes = prepared.notes.clone();
    all_notes.extend(no_answer.iter().cloned());
    let path = out_dir.join("stats.json");
    write_json(&path, &corpus_stats(&all_notes, Some(&dataset)))?;
    files.push(path);

    let split = split_by_patient(&dataset, config.split, seed)?;
    files.extend(write_split(out_dir.join("split"), &split)?);

    let tokenizers = TokenizerRegistry::default();
    let tokenizer = tokenizers.get(&config.chunk.tokenizer)?;
    let chunks = chunk_dataset(&dataset, &config.chunk.policy(), tokenizer)?;
    let path = out_dir.join("chunks.jsonl");
    write_jsonl(&path, &chunks)?;
    files.push(path);

    let eval_part = match config.eval.split.as_str() {
        "train" => &split.train,
        "dev" => &split.dev,
        _ => &split.test,
    };
    let answerers = AnswererRegistry::with_builtins(annotator.clone());
    let answerer = answerers.get(&config.eval.answerer)?;
    let preds = predict(eval_part, answerer);
    let path = out_dir.join("predictions.json");
    write_predictions(&path, &preds)?;
    files.push(path);

    let report = score_predictions_with(eval_part, &preds, &config.eval.bootstrap(seed))?;
    files.extend(render_report(
        &report,
        &out_dir.join("report"),
        &config.eval.formats,
    )?);

    let summary = PipelineSummary {
        seed,
        input_notes,
        keyword_notes: prepared.notes.len(),
        no_keyword_notes: no_answer.len(),
        outlier_notes: prepared.outliers.len(),
        annotations: records.len(),
        samples: dataset.sample_count(),
        impossible_samples: dataset.samples().filter(|(_, s)| s.is_impossible).count(),
        chunks: chunks.len(),
        split_samples: [
            split.train.sample_count(),
            split.dev.sample_count(),
            split.test.sample_count(),
        ],
        split_patients: [
            split.train.patients().len(),
            split.dev.patients().len(),
            split.test.patients().len(),
        ],
        eval_split: config.eval.split.clone(),
        answerer: answerer.name().to_string(),
        exact_match: report.aggregates.em,
        perfect_recall: report.aggregates.perfect_recall,
        f1: report.aggregates.f1,
        files: files
            .iter()
            .map(|p| {
                p.strip_prefix(out_dir)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .replace('\\', "/")
            })
            .collect(),
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}
