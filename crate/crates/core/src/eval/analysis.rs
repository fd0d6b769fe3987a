use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::report::{self, Table};
use super::{aligned, em_score, Aggregates, Predictions, SampleScore};
use crate::dataset::{ContextEntry, Dataset, QASample};
use crate::error::{Error, Result};
use crate::stats::word_count;

/// Length measure used to bin samples, in words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthKey {
    NoteLength,
    QuestionLength,
    AnswerLength,
}

impl LengthKey {
    pub const ALL: [LengthKey; 3] = [
        LengthKey::NoteLength,
        LengthKey::QuestionLength,
        LengthKey::AnswerLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LengthKey::NoteLength => "note_length",
            LengthKey::QuestionLength => "question_length",
            LengthKey::AnswerLength => "answer_length",
        }
    }

    /// Gold answer length for `AnswerLength`; impossible samples count 0.
    pub fn length(self, entry: &ContextEntry, sample: &QASample) -> usize {
        match self {
            LengthKey::NoteLength => word_count(&entry.context),
            LengthKey::QuestionLength => word_count(&sample.question),
            LengthKey::AnswerLength => word_count(sample.gold_text()),
        }
    }
}

impl fmt::Display for LengthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LengthKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LengthKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown length key `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub index: usize,
    /// Smallest and largest length in the bin; `None` when ties emptied it.
    pub low: Option<usize>,
    pub high: Option<usize>,
    pub count: usize,
    pub metrics: Option<Aggregates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinTable {
    pub key: LengthKey,
    pub bins: Vec<LengthBin>,
}

/// Index ranges of four near-equal bins over ascending `lengths`. Sizes start
/// at `n / 4`, the first `n % 4` bins one larger; a boundary falling inside a
/// run of equal lengths then moves forward so the run stays in the lower bin.
pub fn quartile_bounds(lengths: &[usize]) -> [(usize, usize); 4] {
    let n = lengths.len();
    let mut cuts = [0usize; 5];
    let mut nominal = 0;
    for i in 0..4 {
        nominal += n / 4 + usize::from(i < n % 4);
        let mut b = nominal.max(cuts[i]);
        while b > 0 && b < n && lengths[b] == lengths[b - 1] {
            b += 1;
        }
        cuts[i + 1] = b;
    }
    [
        (cuts[0], cuts[1]),
        (cuts[1], cuts[2]),
        (cuts[2], cuts[3]),
        (cuts[3], cuts[4]),
    ]
}

/// Quartile bins by ascending length with per-bin metrics. Needs at least
/// four samples.
pub fn bin_metrics(dataset: &Dataset, scores: &[SampleScore], key: LengthKey) -> Result<BinTable> {
    let rows = aligned(dataset, scores)?;
    if rows.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "quartile binning needs at least 4 samples, got {}",
            rows.len()
        )));
    }
    let mut keyed: Vec<(usize, &SampleScore)> = rows
        .iter()
        .map(|(e, s, sc)| (key.length(e, s), *sc))
        .collect();
    keyed.sort_by_key(|(len, _)| *len);
    let lengths: Vec<usize> = keyed.iter().map(|(l, _)| *l).collect();
    let bins = quartile_bounds(&lengths)
        .into_iter()
        .enumerate()
        .map(|(index, (a, b))| {
            let part = &keyed[a..b];
            LengthBin {
                index,
                low: part.first().map(|(l, _)| *l),
                high: part.last().map(|(l, _)| *l),
                count: part.len(),
                metrics: Aggregates::of(part.iter().map(|(_, s)| *s)),
            }
        })
        .collect();
    Ok(BinTable { key, bins })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub group: String,
    pub metrics: Aggregates,
}

/// Metrics per query group, in order of first appearance. Groups without
/// samples have no row.
pub fn per_group_metrics(scores: &[SampleScore]) -> Vec<GroupRow> {
    let mut groups: IndexMap<&str, Vec<&SampleScore>> = IndexMap::new();
    for s in scores {
        groups.entry(s.query_group.as_str()).or_default().push(s);
    }
    groups
        .into_iter()
        .filter_map(|(g, ss)| {
            Aggregates::of(ss).map(|metrics| GroupRow {
                group: g.to_string(),
                metrics,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub sample_id: String,
    pub pred_ratio: f64,
    pub gold_ratio: f64,
}

/// For each sample whose prediction is not an exact match: answer words as a
/// percentage of context words, for the prediction and the gold answer.
pub fn answer_context_ratios(dataset: &Dataset, preds: &Predictions) -> Result<Vec<RatioSample>> {
    let mut out = Vec::new();
    for (entry, sample) in dataset.samples() {
        let pred = preds
            .get(&sample.id)
            .ok_or_else(|| Error::MissingPredictions {
                count: 1,
                ids: sample.id.clone(),
            })?;
        let gold = sample.gold_text();
        if em_score(pred, gold) == 1 {
            continue;
        }
        let context = word_count(&entry.context) as f64;
        if context == 0.0 {
            continue;
        }
        out.push(RatioSample {
            sample_id: sample.id.clone(),
            pred_ratio: 100.0 * word_count(pred) as f64 / context,
            gold_ratio: 100.0 * word_count(gold) as f64 / context,
        });
    }
    Ok(out)
}

/// Everything an analysis may look at.
#[derive(Debug, Clone, Copy)]
pub struct EvalInput<'a> {
    pub dataset: &'a Dataset,
    pub preds: &'a Predictions,
    pub scores: &'a [SampleScore],
}

/// One error-analysis view, producing one or more tables.
pub trait Analysis: Send + Sync {
    fn name(&self) -> &str;
    fn run(&self, input: &EvalInput<'_>) -> Result<Vec<Table>>;
}

struct LengthAnalysis(LengthKey);

impl Analysis for LengthAnalysis {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn run(&self, input: &EvalInput<'_>) -> Result<Vec<Table>> {
        let bins = bin_metrics(input.dataset, input.scores, self.0)?;
        Ok(vec![report::bin_table(&bins)])
    }
}

struct GroupAnalysis;

impl Analysis for GroupAnalysis {
    fn name(&self) -> &str {
        "group"
    }

    fn run(&self, input: &EvalInput<'_>) -> Result<Vec<Table>> {
        Ok(vec![report::group_table(&per_group_metrics(input.scores))])
    }
}

struct RatioAnalysis;

impl Analysis for RatioAnalysis {
    fn name(&self) -> &str {
        "ratio"
    }

    fn run(&self, input: &EvalInput<'_>) -> Result<Vec<Table>> {
        let ratios = answer_context_ratios(input.dataset, input.preds)?;
        Ok(vec![
            report::ratio_summary_table(&report::RatioSummary::of(&ratios)),
            report::ratio_table(&ratios),
        ])
    }
}

/// Analyses selectable by name.
pub struct AnalysisRegistry {
    entries: Vec<Box<dyn Analysis>>,
}

impl Default for AnalysisRegistry {
    fn default() -> Self {
        let mut r = AnalysisRegistry {
            entries: Vec::new(),
        };
        for key in LengthKey::ALL {
            r.register(Box::new(LengthAnalysis(key)));
        }
        r.register(Box::new(GroupAnalysis));
        r.register(Box::new(RatioAnalysis));
        r
    }
}

impl AnalysisRegistry {
    /// Adds an analysis, replacing any existing one with the same name.
    pub fn register(&mut self, analysis: Box<dyn Analysis>) {
        self.entries.retain(|a| a.name() != analysis.name());
        self.entries.push(analysis);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Analysis> {
        self.entries
            .iter()
            .find(|a| a.name() == name)
            .map(|a| a.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "analysis",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|a| a.name()).collect()
    }
}
