//! Question answerers that produce prediction files for [`crate::eval`].

use std::sync::Arc;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::eval::Predictions;
use crate::extract::{find_keyword_sentences, Annotator};

/// Answers a question against one cleaned note. The empty string means
/// "no answer".
pub trait Answerer: Send + Sync {
    fn name(&self) -> &str;
    fn answer(&self, context: &str, question: &str) -> String;
}

/// The extraction rules run as a QA system: classify the question, extract
/// the note's spans, return the first span routed to the question's group.
#[derive(Debug, Clone)]
pub struct RuleBasedAnswerer {
    annotator: Arc<Annotator>,
}

impl RuleBasedAnswerer {
    pub fn new(annotator: Arc<Annotator>) -> Self {
        RuleBasedAnswerer { annotator }
    }
}

impl Answerer for RuleBasedAnswerer {
    fn name(&self) -> &str {
        "rule_based"
    }

    fn answer(&self, context: &str, question: &str) -> String {
        self.annotator
            .answer_question(context, question)
            .answers
            .into_iter()
            .next()
            .map(|a| a.text)
            .unwrap_or_default()
    }
}

/// Always abstains.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyAnswerer;

impl Answerer for EmptyAnswerer {
    fn name(&self) -> &str {
        "empty"
    }

    fn answer(&self, _: &str, _: &str) -> String {
        String::new()
    }
}

/// Returns the first keyword-bearing sentence untrimmed by the phrase rules;
/// a recall-heavy baseline.
#[derive(Debug, Clone)]
pub struct KeywordSentenceAnswerer {
    annotator: Arc<Annotator>,
}

impl KeywordSentenceAnswerer {
    pub fn new(annotator: Arc<Annotator>) -> Self {
        KeywordSentenceAnswerer { annotator }
    }
}

impl Answerer for KeywordSentenceAnswerer {
    fn name(&self) -> &str {
        "keyword_sentence"
    }

    fn answer(&self, context: &str, _: &str) -> String {
        let sentences = self.annotator.sentencize(context);
        find_keyword_sentences(&sentences, self.annotator.matchers())
            .first()
            .map(|(i, _)| {
                sentences[*i]
                    .text
                    .trim_end_matches(['.', '!', '?'])
                    .to_string()
            })
            .unwrap_or_default()
    }
}

/// Answerers selectable by name.
pub struct AnswererRegistry {
    entries: Vec<Box<dyn Answerer>>,
}

impl AnswererRegistry {
    /// `rule_based`, `keyword_sentence`, and `empty`, sharing one annotator.
    pub fn with_builtins(annotator: Arc<Annotator>) -> Self {
        let mut r = AnswererRegistry {
            entries: Vec::new(),
        };
        r.register(Box::new(RuleBasedAnswerer::new(annotator.clone())));
        r.register(Box::new(KeywordSentenceAnswerer::new(annotator)));
        r.register(Box::new(EmptyAnswerer));
        r
    }

    /// Adds an answerer, replacing any existing one with the same name.
    pub fn register(&mut self, answerer: Box<dyn Answerer>) {
        self.entries.retain(|a| a.name() != answerer.name());
        self.entries.push(answerer);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Answerer> {
        self.entries
            .iter()
            .find(|a| a.name() == name)
            .map(|a| a.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "answerer",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|a| a.name()).collect()
    }
}

/// One prediction per sample of the dataset.
pub fn predict(dataset: &Dataset, answerer: &dyn Answerer) -> Predictions {
    dataset
        .samples()
        .map(|(entry, sample)| {
            (
                sample.id.clone(),
                answerer.answer(&entry.context, &sample.question),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let r = AnswererRegistry::with_builtins(Arc::new(Annotator::builtin()));
        assert_eq!(r.names(), ["rule_based", "keyword_sentence", "empty"]);
        let q = "Does the patient have a history of IDU?";
        let note = "lives alone. pt denies ivdu, quit smoking.";
        assert_eq!(
            r.get("rule_based").unwrap().answer(note, q),
            "denies ivdu, quit smoking"
        );
        assert_eq!(
            r.get("keyword_sentence").unwrap().answer(note, q),
            "pt denies ivdu, quit smoking"
        );
        assert_eq!(r.get("empty").unwrap().answer(note, q), "");
        assert!(r.get("bert").is_err());
    }
}
