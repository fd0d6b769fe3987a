//! Gold-standard answer extraction.
//!
//! A cleaned note is split into sentences; sentences without an IDU keyword
//! are discarded; each remaining sentence is shrunk to a concise answer span
//! by the co-occurring phrase rules in [`parse_answer`]; the span is routed to
//! query groups by the lexicon's mapping rules. [`Annotator::answer_question`]
//! runs the same machinery as a deterministic question answerer.

mod classify;
mod parse;
mod sentence;

use serde::{Deserialize, Serialize};

use crate::corpus::Note;
use crate::error::Result;
use crate::lexicon::{KeywordHit, Lexicon, MatcherSet, PhraseClass, QuestionBank};

pub use classify::{Classification, QuestionClassifier};
pub use parse::{parse_answer, AnswerSpan, Trigger};
pub use sentence::{sentencize, Sentence};

/// One gold-standard answer: a span of a cleaned note with the evidence that
/// produced it. Offsets are byte offsets into `Note::cleaned_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedAnswer {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub sentence_index: usize,
    pub trigger: Option<Trigger>,
    pub right_trigger: Option<Trigger>,
    pub keyword_hits: Vec<KeywordHit>,
    pub query_group_ids: Vec<String>,
}

/// Sentences holding at least one keyword, each with its hits (note-relative
/// offsets) in positional order.
pub fn find_keyword_sentences(
    sentences: &[Sentence],
    matchers: &MatcherSet,
) -> Vec<(usize, Vec<KeywordHit>)> {
    sentences
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let hits: Vec<KeywordHit> = matchers
                .find_keywords(&s.text)
                .into_iter()
                .map(|mut h| {
                    h.start += s.start;
                    h.end += s.start;
                    h
                })
                .collect();
            (!hits.is_empty()).then_some((i, hits))
        })
        .collect()
}

/// Every query group whose mapping-rule triggers occur in `answer`, in rule
/// order and duplicate-free; the default group when none do.
pub fn map_query_groups(answer: &str, lexicon: &Lexicon, matchers: &MatcherSet) -> Vec<String> {
    let mut groups: Vec<String> = Vec::new();
    for (i, rule) in lexicon.mapping_rules.iter().enumerate() {
        if rule.is_default || groups.contains(&rule.query_group_id) {
            continue;
        }
        if matchers.rule(i).is_match(answer) {
            groups.push(rule.query_group_id.clone());
        }
    }
    if groups.is_empty() {
        groups.push(lexicon.default_group().to_string());
    }
    groups
}

/// Why `answer_question` returned nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyReason {
    /// The question could not be assigned to any query group.
    UnclassifiedQuestion,
    /// The note holds no IDU keyword.
    NoKeywords,
    /// The note has answers, but none for the question's group.
    NoAnswerForGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub classification: Classification,
    pub answers: Vec<AnnotatedAnswer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empty_reason: Option<EmptyReason>,
}

/// A lexicon with every derived artifact needed for extraction. Immutable;
/// share freely across threads.
#[derive(Debug, Clone)]
pub struct Annotator {
    lexicon: Lexicon,
    matchers: MatcherSet,
    bank: QuestionBank,
    classifier: QuestionClassifier,
}

impl Annotator {
    pub fn new(lexicon: Lexicon) -> Result<Self> {
        let matchers = MatcherSet::compile(&lexicon)?;
        let bank = QuestionBank::expand(&lexicon)?;
        let classifier = QuestionClassifier::new(&lexicon, &bank);
        Ok(Annotator {
            lexicon,
            matchers,
            bank,
            classifier,
        })
    }

    pub fn builtin() -> Self {
        Annotator::new(Lexicon::builtin()).expect("bundled lexicon compiles")
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn matchers(&self) -> &MatcherSet {
        &self.matchers
    }

    pub fn bank(&self) -> &QuestionBank {
        &self.bank
    }

    pub fn sentencize(&self, text: &str) -> Vec<Sentence> {
        sentencize(text, &self.lexicon.protected_abbreviations)
    }

    pub fn map_query_groups(&self, answer: &str) -> Vec<String> {
        map_query_groups(answer, &self.lexicon, &self.matchers)
    }

    /// One answer per keyword-bearing sentence of the cleaned text, in
    /// document order.
    pub fn extract_text(&self, cleaned: &str) -> Vec<AnnotatedAnswer> {
        let sentences = self.sentencize(cleaned);
        find_keyword_sentences(&sentences, &self.matchers)
            .into_iter()
            .map(|(index, hits)| {
                let span = parse_answer(cleaned, &sentences[index], &hits, &self.matchers);
                let text = cleaned[span.start..span.end].to_string();
                let query_group_ids = self.map_query_groups(&text);
                AnnotatedAnswer {
                    start: span.start,
                    end: span.end,
                    text,
                    sentence_index: index,
                    trigger: span.trigger,
                    right_trigger: span.right_trigger,
                    keyword_hits: hits,
                    query_group_ids,
                }
            })
            .collect()
    }

    pub fn extract_note(&self, note: &Note) -> Vec<AnnotatedAnswer> {
        self.extract_text(&note.cleaned_text)
    }

    pub fn classify_question(&self, question: &str) -> Classification {
        self.classifier
            .classify(question, &self.bank, &self.matchers)
    }

    /// Answers a question against a cleaned note: the extracted spans routed
    /// to the question's group, in document order.
    pub fn answer_question(&self, cleaned: &str, question: &str) -> QueryResult {
        let classification = self.classify_question(question);
        let Some(group) = classification.group().map(str::to_string) else {
            return QueryResult {
                classification,
                answers: Vec::new(),
                empty_reason: Some(EmptyReason::UnclassifiedQuestion),
            };
        };
        let extracted = self.extract_text(cleaned);
        let had_any = !extracted.is_empty();
        let answers: Vec<AnnotatedAnswer> = extracted
            .into_iter()
            .filter(|a| a.query_group_ids.contains(&group))
            .collect();
        let empty_reason = match (answers.is_empty(), had_any) {
            (false, _) => None,
            (true, false) => Some(EmptyReason::NoKeywords),
            (true, true) => Some(EmptyReason::NoAnswerForGroup),
        };
        QueryResult {
            classification,
            answers,
            empty_reason,
        }
    }
}

/// Flat audit record for one annotated answer. Offsets are character
/// (Unicode scalar) offsets into the cleaned note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub note_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trigger_phrase: Option<String>,
    pub keywords: Vec<String>,
    pub groups: Vec<String>,
}

impl AnnotationRecord {
    pub fn new(note: &Note, answer: &AnnotatedAnswer) -> Self {
        let text = &note.cleaned_text;
        AnnotationRecord {
            note_id: note.note_id.clone(),
            start: crate::char_offset(text, answer.start),
            end: crate::char_offset(text, answer.end),
            text: answer.text.clone(),
            trigger_class: answer.trigger.as_ref().map(|t| t.class.code().to_string()),
            trigger_phrase: answer.trigger.as_ref().map(|t| t.phrase.clone()),
            keywords: answer
                .keyword_hits
                .iter()
                .map(|h| h.phrase.clone())
                .collect(),
            groups: answer.query_group_ids.clone(),
        }
    }
}

impl PhraseClass {
    /// Parses the short code used in annotation dumps.
    pub fn from_code(code: &str) -> Option<Self> {
        PhraseClass::ALL.into_iter().find(|c| c.code() == code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotator() -> Annotator {
        Annotator::builtin()
    }

    /// Parses a single-sentence text and returns the span text.
    fn parse(text: &str) -> String {
        let a = annotator();
        let answers = a.extract_text(text);
        assert_eq!(answers.len(), 1, "expected one answer in {text:?}");
        answers[0].text.clone()
    }

    #[test]
    fn keyword_sentence_selection() {
        let a = annotator();
        let s = a.sentencize("quit smoking. denies ivdu.");
        let found = find_keyword_sentences(&s, a.matchers());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].0, 1);
        assert_eq!(found[0].1[0].phrase, "ivdu");
        assert_eq!(found[0].1[0].start, 21);
    }

    #[test]
    fn two_hits_one_sentence() {
        let a = annotator();
        let s = a.sentencize("iv heroin use with track marks on both arms");
        let found = find_keyword_sentences(&s, a.matchers());
        assert_eq!(found.len(), 1);
        let phrases: Vec<&str> = found[0].1.iter().map(|h| h.phrase.as_str()).collect();
        assert_eq!(phrases, ["iv heroin", "track marks"]);
    }

    #[test]
    fn no_keywords_no_sentences() {
        let a = annotator();
        let s = a.sentencize("lives alone. quit smoking 10y ago, occ etoh.");
        assert!(find_keyword_sentences(&s, a.matchers()).is_empty());
        assert!(a.extract_text("lives alone.").is_empty());
    }

    #[test]
    fn no_trigger_keeps_whole_sentence() {
        assert_eq!(parse("iv drug user"), "iv drug user");
        assert_eq!(parse("iv drug user."), "iv drug user");
    }

    #[test]
    fn negation_beats_earlier_temporal() {
        assert_eq!(
            parse("social history: pt lives with family in town, quit smoking 10 y ago, occ etoh, denies ivdu"),
            "denies ivdu"
        );
    }

    #[test]
    fn atp_must_follow_keyword() {
        // "years ago" before the keyword does not cut the right edge.
        assert_eq!(
            parse("quit 2 years ago, hx of ivdu, on methadone"),
            "hx of ivdu, on methadone"
        );
    }

    #[test]
    fn map_groups_in_rule_order() {
        let a = annotator();
        assert_eq!(
            a.map_query_groups("recent ivdu with meth and heroin"),
            ["drug_names", "active_historical_use"]
        );
        assert_eq!(
            a.map_query_groups("denies any ivdu for many years"),
            ["existence_of_idu"]
        );
        assert_eq!(a.map_query_groups("iv drug user"), ["existence_of_idu"]);
    }

    #[test]
    fn denies_only_note() {
        let answers = annotator().extract_text("denies ivdu");
        assert_eq!(answers.len(), 1);
        assert_eq!(answers[0].text, "denies ivdu");
        assert_eq!(answers[0].query_group_ids, ["existence_of_idu"]);
        assert_eq!(
            answers[0].trigger.as_ref().unwrap().class,
            PhraseClass::Negation
        );
    }

    #[test]
    fn classify_examples() {
        let a = annotator();
        assert_eq!(
            a.classify_question("Does the pt have a history of IDU?"),
            Classification::Exact {
                group: "existence_of_idu".into()
            }
        );
        assert_eq!(
            a.classify_question("Any needle track marks on exam?")
                .group(),
            Some("visible_signs")
        );
        assert!(matches!(
            a.classify_question("Any needle track marks on exam?"),
            Classification::Fuzzy { .. }
        ));
        assert_eq!(
            a.classify_question("What is the capital of France?"),
            Classification::NoMatch
        );
    }

    #[test]
    fn answer_question_group_mismatch() {
        let a = annotator();
        let r = a.answer_question("denies ivdu", "When did the patient last use iv drugs?");
        assert!(r.answers.is_empty());
        assert_eq!(r.empty_reason, Some(EmptyReason::NoAnswerForGroup));
    }

    #[test]
    fn answer_question_no_keywords() {
        let a = annotator();
        let r = a.answer_question(
            "pt doing well. lives alone.",
            "Does the patient have a history of IDU?",
        );
        assert!(r.answers.is_empty());
        assert_eq!(r.empty_reason, Some(EmptyReason::NoKeywords));
        let r = a.answer_question("denies ivdu", "What is the capital of France?");
        assert_eq!(r.empty_reason, Some(EmptyReason::UnclassifiedQuestion));
    }
}
