//! Scoring of predicted answers against a gold dataset: exact match, perfect
//! recall, token F1, bootstrap intervals, and the error-analysis tables
//! (length quartiles, query groups, answer/context ratios, no-answer
//! accuracy).

mod analysis;
mod bootstrap;
mod metrics;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::dataset::{ContextEntry, Dataset, QASample};
use crate::error::{Error, Result};

pub use analysis::{
    answer_context_ratios, bin_metrics, per_group_metrics, quartile_bounds, Analysis,
    AnalysisRegistry, BinTable, EvalInput, GroupRow, LengthBin, LengthKey, RatioSample,
};
pub use bootstrap::{bootstrap_ci, BootstrapConfig, ConfidenceInterval};
pub use metrics::{em_score, f1_from_counts, f1_tokens, perfect_recall_score, token_f1, TokenF1};
pub use report::{
    render_report, score_predictions, score_predictions_with, Distribution, MetricIntervals,
    MetricReport, NoAnswerAccuracy, RatioSummary, ReportFormat, Table,
};

/// Predicted answer per sample id. Serialized as a JSON object.
pub type Predictions = BTreeMap<String, String>;

struct UniqueKeys(Predictions);

impl<'de> Deserialize<'de> for UniqueKeys {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = UniqueKeys;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping sample ids to predicted strings")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<UniqueKeys, A::Error> {
                let mut out = Predictions::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    if out.contains_key(&k) {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate sample id `{k}`"
                        )));
                    }
                    out.insert(k, v);
                }
                Ok(UniqueKeys(out))
            }
        }
        d.deserialize_map(V)
    }
}

pub fn parse_predictions(json: &str) -> Result<Predictions> {
    serde_json::from_str::<UniqueKeys>(json)
        .map(|u| u.0)
        .map_err(|e| Error::parse("predictions", e))
}

pub fn read_predictions(path: &Path) -> Result<Predictions> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        e => e,
    })
}

pub fn write_predictions(path: &Path, preds: &Predictions) -> Result<()> {
    let mut json =
        serde_json::to_string_pretty(preds).map_err(|e| Error::parse("predictions", e))?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub sample_id: String,
    pub query_group: String,
    pub is_impossible: bool,
    pub em: u8,
    pub perfect_recall: u8,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl SampleScore {
    pub fn new(sample: &QASample, pred: &str) -> Self {
        let gold = sample.gold_text();
        let f = token_f1(pred, gold);
        SampleScore {
            sample_id: sample.id.clone(),
            query_group: sample.query_group.clone(),
            is_impossible: sample.is_impossible,
            em: em_score(pred, gold),
            perfect_recall: perfect_recall_score(pred, gold),
            f1: f.f1,
            tp: f.tp,
            fp: f.fp,
            fn_: f.fn_,
        }
    }
}

/// Scores every sample of the dataset in file order. Missing predictions are
/// an error listing the ids; predictions for unknown ids are returned as
/// warnings.
pub fn score_samples(
    dataset: &Dataset,
    preds: &Predictions,
) -> Result<(Vec<SampleScore>, Vec<String>)> {
    let mut missing = Vec::new();
    let mut scores = Vec::with_capacity(dataset.sample_count());
    for (_, sample) in dataset.samples() {
        match preds.get(&sample.id) {
            Some(pred) => scores.push(SampleScore::new(sample, pred)),
            None => missing.push(sample.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingPredictions {
            count: missing.len(),
            ids: missing.join(", "),
        });
    }
    let known: std::collections::HashSet<&str> =
        dataset.samples().map(|(_, s)| s.id.as_str()).collect();
    let extra: Vec<&str> = preds
        .keys()
        .map(String::as_str)
        .filter(|k| !known.contains(k))
        .collect();
    let mut warnings = Vec::new();
    if !extra.is_empty() {
        let w = format!(
            "{} prediction(s) for unknown sample ids ignored: {}",
            extra.len(),
            extra.join(", ")
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok((scores, warnings))
}

/// Mean metrics of a set of samples, each on a 0-100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    pub em: f64,
    pub perfect_recall: f64,
    pub f1: f64,
}

impl Aggregates {
    /// `None` for an empty set.
    pub fn of<'a>(scores: impl IntoIterator<Item = &'a SampleScore>) -> Option<Self> {
        let (mut n, mut em, mut pr, mut f1) = (0usize, 0.0, 0.0, 0.0);
        for s in scores {
            n += 1;
            em += f64::from(s.em);
            pr += f64::from(s.perfect_recall);
            f1 += s.f1;
        }
        (n > 0).then(|| {
            let n_f = n as f64;
            Aggregates {
                count: n,
                em: 100.0 * (em / n_f),
                perfect_recall: 100.0 * (pr / n_f),
                f1: 100.0 * (f1 / n_f),
            }
        })
    }
}

/// Pairs dataset samples with their scores, checking that both follow the
/// same order.
pub(crate) fn aligned<'a>(
    dataset: &'a Dataset,
    scores: &'a [SampleScore],
) -> Result<Vec<(&'a ContextEntry, &'a QASample, &'a SampleScore)>> {
    if dataset.sample_count() != scores.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} samples",
            scores.len(),
            dataset.sample_count()
        )));
    }
    dataset
        .samples()
        .zip(scores)
        .map(|((entry, sample), score)| {
            if sample.id == score.sample_id {
                Ok((entry, sample, score))
            } else {
                Err(Error::InvalidInput(format!(
                    "score for `{}` found where `{}` was expected",
                    score.sample_id, sample.id
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_prediction_keys_rejected() {
        assert!(parse_predictions(r#"{"a": "x", "a": "y"}"#).is_err());
        let p = parse_predictions(r#"{"b": "", "a": "x"}"#).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p["b"], "");
    }

    #[test]
    fn aggregates_are_means() {
        let s = |em: u8| SampleScore {
            sample_id: String::new(),
            query_group: String::new(),
            is_impossible: false,
            em,
            perfect_recall: em,
            f1: f64::from(em),
            tp: 0,
            fp: 0,
            fn_: 0,
        };
        let a = Aggregates::of(&[s(1), s(0)]).unwrap();
        assert_eq!(a.em, 50.0);
        assert_eq!(a.count, 2);
        assert!(Aggregates::of(&[]).is_none());
    }
}
