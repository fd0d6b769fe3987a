//! QA samples, datasets, patient-level splits, and the on-disk dataset format.
//!
//! The file layout follows the common extractive-QA interchange shape:
//! contexts with nested question/answer records and an `is_impossible` flag.
//! `answer_start` is a character (Unicode scalar) offset into the context.

mod assemble;
mod io;
mod split;

use std::collections::HashSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::clean_note;
use crate::error::{Error, Result};

pub use assemble::{assemble_samples, build_dataset, make_no_answer_samples, Pairing};
pub use io::{read_dataset, write_dataset, write_split};
pub use split::{split_by_patient, Split, SplitRatios};

pub const DATASET_FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub answer_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QASample {
    pub id: String,
    pub question: String,
    pub query_group: String,
    pub answers: Vec<Answer>,
    pub is_impossible: bool,
}

impl QASample {
    /// The reference answer; empty for impossible samples.
    pub fn gold_text(&self) -> &str {
        self.answers.first().map_or("", |a| a.text.as_str())
    }
}

/// One note (context) with its QA samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub note_id: String,
    pub patient_id: String,
    pub context: String,
    pub qas: Vec<QASample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub version: String,
    #[serde(rename = "data")]
    pub entries: Vec<ContextEntry>,
}

impl Default for Dataset {
    fn default() -> Self {
        Dataset {
            version: DATASET_FORMAT_VERSION.to_string(),
            entries: Vec::new(),
        }
    }
}

impl Dataset {
    pub fn new(entries: Vec<ContextEntry>) -> Self {
        Dataset {
            version: DATASET_FORMAT_VERSION.to_string(),
            entries,
        }
    }

    /// Every sample with its context entry, in file order.
    pub fn samples(&self) -> impl Iterator<Item = (&ContextEntry, &QASample)> {
        self.entries
            .iter()
            .flat_map(|e| e.qas.iter().map(move |s| (e, s)))
    }

    pub fn sample_count(&self) -> usize {
        self.entries.iter().map(|e| e.qas.len()).sum()
    }

    pub fn patients(&self) -> Vec<&str> {
        let mut p: Vec<&str> = self.entries.iter().map(|e| e.patient_id.as_str()).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// Checks every dataset invariant; the first violation is returned.
    pub fn validate(&self) -> Result<()> {
        if self.version.trim().is_empty() {
            return Err(Error::Validation {
                sample_id: String::new(),
                message: "empty version".into(),
            });
        }
        let mut notes = HashSet::new();
        let mut ids = HashSet::new();
        for entry in &self.entries {
            if !notes.insert(entry.note_id.as_str()) {
                return Err(Error::Validation {
                    sample_id: entry
                        .qas
                        .first()
                        .map_or_else(|| entry.note_id.clone(), |s| s.id.clone()),
                    message: format!("note `{}` appears more than once", entry.note_id),
                });
            }
            if clean_note(&entry.context) != entry.context {
                return Err(Error::Validation {
                    sample_id: entry
                        .qas
                        .first()
                        .map_or_else(|| entry.note_id.clone(), |s| s.id.clone()),
                    message: format!("context of note `{}` is not cleaned text", entry.note_id),
                });
            }
            for sample in &entry.qas {
                let fail = |message: String| Error::Validation {
                    sample_id: sample.id.clone(),
                    message,
                };
                if !ids.insert(sample.id.as_str()) {
                    return Err(fail("duplicate sample id".into()));
                }
                if sample.question.trim().is_empty() {
                    return Err(fail("empty question".into()));
                }
                if sample.is_impossible && !sample.answers.is_empty() {
                    return Err(fail("impossible sample carries answers".into()));
                }
                if !sample.is_impossible && sample.answers.is_empty() {
                    return Err(fail("answerable sample has no answers".into()));
                }
                for answer in &sample.answers {
                    let found = crate::char_slice(
                        &entry.context,
                        answer.answer_start,
                        answer.text.chars().count(),
                    );
                    if found != Some(answer.text.as_str()) {
                        return Err(fail(format!(
                            "answer `{}` not found at offset {} (context has `{}`)",
                            answer.text,
                            answer.answer_start,
                            found.unwrap_or("<out of range>")
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// A copy restricted to the given patients, preserving order.
    pub fn restrict_to_patients(&self, patients: &HashSet<&str>) -> Dataset {
        Dataset {
            version: self.version.clone(),
            entries: self
                .entries
                .iter()
                .filter(|e| patients.contains(e.patient_id.as_str()))
                .cloned()
                .collect(),
        }
    }
}

/// Sample count per query group. Groups in `group_order` come first (zero
/// when absent); unknown groups follow in order of first appearance.
pub fn group_histogram(dataset: &Dataset, group_order: &[String]) -> IndexMap<String, usize> {
    let mut counts: IndexMap<String, usize> = group_order.iter().map(|g| (g.clone(), 0)).collect();
    for (_, sample) in dataset.samples() {
        *counts.entry(sample.query_group.clone()).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny() -> Dataset {
        Dataset::new(vec![ContextEntry {
            note_id: "n1".into(),
            patient_id: "p1".into(),
            context: "lives alone. denies ivdu.".into(),
            qas: vec![QASample {
                id: "n1-a0-existence_of_idu-q0".into(),
                question: "Does the pt have a hx of IDU?".into(),
                query_group: "existence_of_idu".into(),
                answers: vec![Answer {
                    text: "denies ivdu".into(),
                    answer_start: 13,
                }],
                is_impossible: false,
            }],
        }])
    }

    #[test]
    fn valid_dataset_passes() {
        tiny().validate().unwrap();
    }

    #[test]
    fn off_by_one_names_sample() {
        let mut d = tiny();
        d.entries[0].qas[0].answers[0].answer_start = 14;
        let err = d.validate().unwrap_err().to_string();
        assert!(err.contains("n1-a0-existence_of_idu-q0"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut d = tiny();
        let dup = d.entries[0].qas[0].clone();
        d.entries[0].qas.push(dup);
        assert!(d.validate().unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn histogram() {
        let groups = vec!["drug_names".to_string(), "existence_of_idu".to_string()];
        let h = group_histogram(&tiny(), &groups);
        assert_eq!(h["drug_names"], 0);
        assert_eq!(h["existence_of_idu"], 1);
        assert_eq!(h.values().sum::<usize>(), 1);
        let empty = group_histogram(&Dataset::default(), &groups);
        assert!(empty.values().all(|&c| c == 0));
        assert_eq!(empty.len(), 2);
    }
}
