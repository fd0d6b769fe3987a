use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::lexicon::{Hit, KeywordHit, MatcherSet, PhraseClass};

/// The co-occurring phrase that set an answer's left (or right) boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub class: PhraseClass,
    pub phrase: String,
    pub start: usize,
    pub end: usize,
}

/// Byte span of a parsed answer inside its note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSpan {
    pub start: usize,
    pub end: usize,
    /// Left-boundary trigger, if any.
    pub trigger: Option<Trigger>,
    /// Additional-temporal phrase that cut the right boundary, if any.
    pub right_trigger: Option<Trigger>,
}

const TRAILING: [char; 6] = ['.', '!', '?', ',', ';', ':'];

/// Shrinks a keyword-bearing sentence to a concise answer span.
///
/// Left boundary: among phrase-book hits that end before the leftmost
/// keyword, negations win over substance-use phrases, which win over
/// temporal phrases (track-mark status phrases compete with temporal ones
/// when the keyword is "track marks"). Within the winning class the hit
/// closest to the keyword is used. Without any such hit the span starts at
/// the sentence start.
///
/// Right boundary: the end of the first additional-temporal phrase ("days
/// ago", ...) after the rightmost keyword, else the sentence end with
/// trailing punctuation removed.
///
/// `hits` must be non-empty and lie inside `sentence`; `note` is the text
/// the sentence offsets refer to.
pub fn parse_answer(
    note: &str,
    sentence: &Sentence,
    hits: &[KeywordHit],
    matchers: &MatcherSet,
) -> AnswerSpan {
    assert!(
        !hits.is_empty(),
        "parse_answer needs at least one keyword hit"
    );
    let leftmost = hits.iter().min_by_key(|h| h.start).expect("non-empty");
    let right_edge = hits.iter().map(|h| h.end).max().expect("non-empty");
    let text = &note[sentence.start..sentence.end];

    let class_hits = |class: PhraseClass| -> Vec<Hit> {
        matchers
            .class(class)
            .find_all(text)
            .into_iter()
            .map(|mut h| {
                h.start += sentence.start;
                h.end += sentence.start;
                h
            })
            .collect()
    };
    let nearest_before = |class: PhraseClass| -> Option<Trigger> {
        class_hits(class)
            .into_iter()
            .filter(|h| h.end <= leftmost.start)
            .max_by_key(|h| h.start)
            .map(|h| Trigger {
                class,
                phrase: h.phrase,
                start: h.start,
                end: h.end,
            })
    };

    let track_marks = leftmost.phrase.contains("track mark");
    let trigger = nearest_before(PhraseClass::Negation)
        .or_else(|| nearest_before(PhraseClass::Substance))
        .or_else(|| {
            let temporal = nearest_before(PhraseClass::Temporal);
            let track = if track_marks {
                nearest_before(PhraseClass::TrackMark)
            } else {
                None
            };
            match (temporal, track) {
                (Some(a), Some(b)) => Some(if b.start > a.start { b } else { a }),
                (a, b) => a.or(b),
            }
        });

    let start = trigger.as_ref().map_or(sentence.start, |t| t.start);

    let right_trigger = class_hits(PhraseClass::AdditionalTemporal)
        .into_iter()
        .find(|h| h.start >= right_edge)
        .map(|h| Trigger {
            class: PhraseClass::AdditionalTemporal,
            phrase: h.phrase,
            start: h.start,
            end: h.end,
        });
    let end = match &right_trigger {
        Some(t) => t.end,
        None => {
            let tail = note[right_edge..sentence.end]
                .trim_end_matches(|c: char| c.is_whitespace() || TRAILING.contains(&c));
            right_edge + tail.len()
        }
    };

    AnswerSpan {
        start,
        end,
        trigger,
        right_trigger,
    }
}
