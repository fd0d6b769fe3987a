//! Note ingestion, cleaning, keyword filtering, outlier removal, and corpus
//! statistics.

mod clean;
mod ingest;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::lexicon::MatcherSet;
use crate::stats::{mean, quantile_sorted, round2, word_count};

pub use clean::clean_note;
pub use ingest::{read_corpus, read_manifest, write_corpus, CorpusFile};

/// One clinical progress note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub note_id: String,
    pub patient_id: String,
    pub date: chrono::NaiveDate,
    pub raw_text: String,
    pub cleaned_text: String,
}

impl Note {
    /// Builds a note and cleans its text.
    pub fn new(
        note_id: impl Into<String>,
        patient_id: impl Into<String>,
        date: chrono::NaiveDate,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let cleaned_text = clean_note(&raw_text);
        Note {
            note_id: note_id.into(),
            patient_id: patient_id.into(),
            date,
            raw_text,
            cleaned_text,
        }
    }

    pub fn word_count(&self) -> usize {
        word_count(&self.cleaned_text)
    }
}

/// Splits notes into those with at least one keyword hit and the rest,
/// preserving order.
pub fn filter_by_keywords(notes: Vec<Note>, matchers: &MatcherSet) -> (Vec<Note>, Vec<Note>) {
    notes
        .into_iter()
        .partition(|n| matchers.has_keyword(&n.cleaned_text))
}

/// Upper Tukey fence on note length in words: `Q3 + 1.5 * IQR`.
pub fn length_fence(notes: &[Note]) -> Option<f64> {
    let mut lengths: Vec<f64> = notes.iter().map(|n| n.word_count() as f64).collect();
    lengths.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&lengths, 0.25)?;
    let q3 = quantile_sorted(&lengths, 0.75)?;
    Some(q3 + 1.5 * (q3 - q1))
}

/// Drops notes longer than the upper fence. Corpora of fewer than four notes
/// are returned unchanged.
pub fn drop_length_outliers(notes: Vec<Note>) -> (Vec<Note>, Vec<Note>) {
    if notes.len() < 4 {
        return (notes, Vec::new());
    }
    let fence = length_fence(&notes).expect("non-empty");
    notes
        .into_iter()
        .partition(|n| n.word_count() as f64 <= fence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LengthSummary {
    pub avg: f64,
    pub median: f64,
    pub max: usize,
}

impl LengthSummary {
    pub fn from_lengths(lengths: &[usize]) -> Self {
        if lengths.is_empty() {
            return LengthSummary::default();
        }
        let mut sorted: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
        sorted.sort_by(f64::total_cmp);
        LengthSummary {
            avg: round2(mean(&sorted).unwrap_or(0.0)),
            median: quantile_sorted(&sorted, 0.5).unwrap_or(0.0),
            max: lengths.iter().copied().max().unwrap_or(0),
        }
    }
}

/// Dataset statistics in the layout of the usual "dataset statistics" table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CorpusStats {
    pub patient_count: usize,
    pub note_count: usize,
    pub notes_per_patient_avg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qa_per_note_avg: Option<f64>,
    pub note_length_words: LengthSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub question_length_words: Option<LengthSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answer_length_words: Option<LengthSummary>,
    /// Set when the corpus was empty and every figure is zero.
    pub empty_corpus: bool,
}

/// Statistics over cleaned notes, optionally extended with QA-sample figures
/// from a dataset built on them.
pub fn corpus_stats(notes: &[Note], dataset: Option<&Dataset>) -> CorpusStats {
    let mut stats = CorpusStats {
        empty_corpus: notes.is_empty(),
        ..CorpusStats::default()
    };
    if notes.is_empty() {
        log::warn!("corpus statistics requested for an empty corpus");
    } else {
        let mut patients: Vec<&str> = notes.iter().map(|n| n.patient_id.as_str()).collect();
        patients.sort_unstable();
        patients.dedup();
        stats.patient_count = patients.len();
        stats.note_count = notes.len();
        stats.notes_per_patient_avg = round2(notes.len() as f64 / patients.len() as f64);
        let lengths: Vec<usize> = notes.iter().map(Note::word_count).collect();
        stats.note_length_words = LengthSummary::from_lengths(&lengths);
    }

    if let Some(ds) = dataset {
        let samples: Vec<_> = ds.samples().collect();
        stats.sample_count = Some(samples.len());
        stats.qa_per_note_avg = Some(if ds.entries.is_empty() {
            0.0
        } else {
            round2(samples.len() as f64 / ds.entries.len() as f64)
        });
        let questions: Vec<usize> = samples
            .iter()
            .map(|(_, s)| word_count(&s.question))
            .collect();
        let answers: Vec<usize> = samples
            .iter()
            .filter(|(_, s)| !s.is_impossible)
            .filter_map(|(_, s)| s.answers.first())
            .map(|a| word_count(&a.text))
            .collect();
        stats.question_length_words = Some(LengthSummary::from_lengths(&questions));
        stats.answer_length_words = Some(LengthSummary::from_lengths(&answers));
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lexicon;

    fn note(id: &str, patient: &str, text: &str) -> Note {
        Note::new(
            id,
            patient,
            chrono::NaiveDate::from_ymd_opt(2022, 1, 15).unwrap(),
            text,
        )
    }

    fn words(n: usize) -> String {
        vec!["w"; n].join(" ")
    }

    #[test]
    fn keyword_filter() {
        let matchers = MatcherSet::compile(&Lexicon::builtin()).unwrap();
        let notes = vec![
            note("1", "a", "uses speedball occasionally"),
            note("2", "a", "quit smoking 10y ago, occ etoh"),
            note("3", "b", "h/o skin popping"),
        ];
        let (kept, dropped) = filter_by_keywords(notes, &matchers);
        let ids = |v: &[Note]| v.iter().map(|n| n.note_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&kept), ["1", "3"]);
        assert_eq!(ids(&dropped), ["2"]);
    }

    #[test]
    fn identical_lengths_keep_everything() {
        let notes: Vec<Note> = (0..10)
            .map(|i| note(&i.to_string(), "p", &words(50)))
            .collect();
        let (kept, dropped) = drop_length_outliers(notes);
        assert_eq!(kept.len(), 10);
        assert!(dropped.is_empty());
    }

    #[test]
    fn one_long_note_dropped() {
        let mut notes: Vec<Note> = (0..10)
            .map(|i| note(&i.to_string(), "p", &words(100)))
            .collect();
        notes.push(note("long", "p", &words(10_000)));
        assert_eq!(length_fence(&notes), Some(100.0));
        let (kept, dropped) = drop_length_outliers(notes);
        assert_eq!(kept.len(), 10);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].note_id, "long");
    }

    #[test]
    fn small_and_empty_corpora_unchanged() {
        let (kept, dropped) = drop_length_outliers(Vec::new());
        assert!(kept.is_empty() && dropped.is_empty());
        let notes = vec![note("a", "p", "x"), note("b", "p", &words(1000))];
        let (kept, dropped) = drop_length_outliers(notes);
        assert_eq!((kept.len(), dropped.len()), (2, 0));
    }

    #[test]
    fn stats_single_note() {
        let s = corpus_stats(&[note("1", "p", &words(7))], None);
        assert_eq!(
            s.note_length_words,
            LengthSummary {
                avg: 7.0,
                median: 7.0,
                max: 7
            }
        );
        assert_eq!(s.patient_count, 1);
        assert!(s.sample_count.is_none());
    }

    #[test]
    fn stats_two_notes() {
        let s = corpus_stats(
            &[note("1", "p", &words(4)), note("2", "q", &words(8))],
            None,
        );
        assert_eq!(s.note_length_words.avg, 6.0);
        assert_eq!(s.note_length_words.median, 6.0);
        assert_eq!(s.note_length_words.max, 8);
        assert_eq!(s.notes_per_patient_avg, 1.0);
    }

    #[test]
    fn stats_empty() {
        let s = corpus_stats(&[], None);
        assert!(s.empty_corpus);
        assert_eq!(s.note_count, 0);
    }
}
