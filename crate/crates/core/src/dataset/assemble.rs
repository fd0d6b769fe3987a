use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Answer, ContextEntry, Dataset, QASample};
use crate::corpus::Note;
use crate::error::{Error, Result};
use crate::extract::{AnnotatedAnswer, Annotator};
use crate::lexicon::QuestionBank;

/// How many question variants each answer is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Pairing {
    /// Every variant of every mapped group.
    #[default]
    AllVariants,
    /// `k` variants per mapped group, drawn without replacement.
    SampleK { k: usize, seed: u64 },
}

impl FromStr for Pairing {
    type Err = Error;

    /// `all`, or `k:<k>:<seed>` / `k:<k>` (seed 0).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" || s == "all_variants" {
            return Ok(Pairing::AllVariants);
        }
        let bad =
            || Error::InvalidInput(format!("pairing `{s}`: expected `all` or `k:<k>[:<seed>]`"));
        let mut parts = s.split(':');
        if parts.next() != Some("k") {
            return Err(bad());
        }
        let k: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad)?;
        let seed: u64 = match parts.next() {
            Some(p) => p.parse().map_err(|_| bad())?,
            None => 0,
        };
        if k == 0 || parts.next().is_some() {
            return Err(bad());
        }
        Ok(Pairing::SampleK { k, seed })
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pairing::AllVariants => f.write_str("all"),
            Pairing::SampleK { k, seed } => write!(f, "k:{k}:{seed}"),
        }
    }
}

/// FNV-1a of the note id, used to give each note its own random stream.
/// Unlike std's hasher it is fixed across releases and platforms.
fn stable_hash(s: &str) -> u64 {
    let mut h = fnv::FnvHasher::default();
    h.write(s.as_bytes());
    h.finish()
}

fn selected_indices(n: usize, pairing: Pairing, rng: &mut Option<ChaCha8Rng>) -> Vec<usize> {
    match (pairing, rng) {
        (Pairing::SampleK { k, .. }, Some(rng)) if k < n => {
            let mut picked = rand::seq::index::sample(rng, n, k).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..n).collect(),
    }
}

/// QA samples for one note: each answer × each mapped group × each selected
/// question variant. Sample ids are `<note>-a<answer>-<group>-q<variant>`.
pub fn assemble_samples(
    note: &Note,
    answers: &[AnnotatedAnswer],
    bank: &QuestionBank,
    pairing: Pairing,
) -> Result<Vec<QASample>> {
    let context = &note.cleaned_text;
    let mut rng = match pairing {
        Pairing::SampleK { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stable_hash(&note.note_id));
            Some(rng)
        }
        Pairing::AllVariants => None,
    };
    let mut samples = Vec::new();
    for (ai, answer) in answers.iter().enumerate() {
        let verbatim = context.get(answer.start..answer.end);
        if verbatim != Some(answer.text.as_str()) {
            return Err(Error::Validation {
                sample_id: format!("{}-a{ai}", note.note_id),
                message: format!(
                    "annotation `{}` does not match the note at {}..{}",
                    answer.text, answer.start, answer.end
                ),
            });
        }
        let answer_start = crate::char_offset(context, answer.start);
        for group in &answer.query_group_ids {
            let questions = bank.questions(group);
            for qi in selected_indices(questions.len(), pairing, &mut rng) {
                samples.push(QASample {
                    id: format!("{}-a{ai}-{group}-q{qi}", note.note_id),
                    question: questions[qi].clone(),
                    query_group: group.clone(),
                    answers: vec![Answer {
                        text: answer.text.clone(),
                        answer_start,
                    }],
                    is_impossible: false,
                });
            }
        }
    }
    Ok(samples)
}

/// Unanswerable samples for a note without IDU keywords: one per question of
/// the default ("existence of IDU") group, with an empty answer list.
pub fn make_no_answer_samples(note: &Note, annotator: &Annotator) -> Result<Vec<QASample>> {
    if annotator.matchers().has_keyword(&note.cleaned_text) {
        return Err(Error::InvalidInput(format!(
            "note `{}` contains IDU keywords; no-answer samples need a keyword-free note",
            note.note_id
        )));
    }
    let group = annotator.lexicon().default_group();
    Ok(annotator
        .bank()
        .questions(group)
        .iter()
        .enumerate()
        .map(|(qi, question)| QASample {
            id: format!("{}-none-{group}-q{qi}", note.note_id),
            question: question.clone(),
            query_group: group.to_string(),
            answers: Vec::new(),
            is_impossible: true,
        })
        .collect())
}

/// Builds a dataset from keyword-bearing notes plus optional keyword-free
/// notes that contribute unanswerable samples. Notes yielding no samples are
/// left out.
pub fn build_dataset(
    notes: &[Note],
    no_answer_notes: &[Note],
    annotator: &Annotator,
    pairing: Pairing,
) -> Result<Dataset> {
    let mut entries = Vec::with_capacity(notes.len() + no_answer_notes.len());
    for note in notes {
        let answers = annotator.extract_note(note);
        let qas = assemble_samples(note, &answers, annotator.bank(), pairing)?;
        if qas.is_empty() {
            continue;
        }
        entries.push(ContextEntry {
            note_id: note.note_id.clone(),
            patient_id: note.patient_id.clone(),
            context: note.cleaned_text.clone(),
            qas,
        });
    }
    for note in no_answer_notes {
        let qas = make_no_answer_samples(note, annotator)?;
        entries.push(ContextEntry {
            note_id: note.note_id.clone(),
            patient_id: note.patient_id.clone(),
            context: note.cleaned_text.clone(),
            qas,
        });
    }
    let dataset = Dataset::new(entries);
    dataset.validate()?;
    Ok(dataset)
}
