use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lexicon::{Lexicon, MatcherSet, QuestionBank};

/// Words that carry no query-group signal.
const STOPWORDS: &[&str] = &[
    "a", "an", "and", "any", "are", "as", "at", "be", "been", "being", "by", "did", "do", "does",
    "ever", "for", "from", "had", "has", "have", "in", "is", "it", "its", "of", "on", "or",
    "patient", "patients", "pt", "the", "there", "this", "that", "to", "was", "were", "what",
    "which", "who", "with",
];

/// Weight of a mapping-rule trigger phrase found in the question, relative
/// to one shared vocabulary word.
const TRIGGER_WEIGHT: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Classification {
    /// The normalized question is in the bank.
    Exact {
        group: String,
    },
    /// Best vocabulary overlap; heuristic.
    Fuzzy {
        group: String,
        score: usize,
    },
    NoMatch,
}

impl Classification {
    pub fn group(&self) -> Option<&str> {
        match self {
            Classification::Exact { group } | Classification::Fuzzy { group, .. } => Some(group),
            Classification::NoMatch => None,
        }
    }
}

fn content_words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty() && !STOPWORDS.contains(&w.as_str()))
}

/// Maps free-text questions to query groups.
#[derive(Debug, Clone)]
pub struct QuestionClassifier {
    /// `(group id, template vocabulary, indices of its non-default mapping rules)`
    groups: Vec<(String, BTreeSet<String>, Vec<usize>)>,
}

impl QuestionClassifier {
    pub fn new(lexicon: &Lexicon, bank: &QuestionBank) -> Self {
        let groups = lexicon
            .query_groups
            .iter()
            .map(|g| {
                let vocab = bank
                    .questions(&g.id)
                    .iter()
                    .flat_map(|q| content_words(q))
                    .collect();
                let rules = lexicon
                    .mapping_rules
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !r.is_default && r.query_group_id == g.id)
                    .map(|(i, _)| i)
                    .collect();
                (g.id.clone(), vocab, rules)
            })
            .collect();
        QuestionClassifier { groups }
    }

    /// Exact bank lookup first; otherwise the group with the highest overlap
    /// score, ties going to the earlier group in lexicon order.
    pub fn classify(
        &self,
        question: &str,
        bank: &QuestionBank,
        matchers: &MatcherSet,
    ) -> Classification {
        if let Some(group) = bank.lookup(question) {
            return Classification::Exact {
                group: group.to_string(),
            };
        }
        let words: BTreeSet<String> = content_words(question).collect();
        let mut best: Option<(usize, &str)> = None;
        for (id, vocab, rules) in &self.groups {
            let overlap = words.intersection(vocab).count();
            let triggers: BTreeSet<String> = rules
                .iter()
                .flat_map(|&i| matchers.rule(i).find_all(question))
                .map(|h| h.phrase)
                .collect();
            let score = overlap + TRIGGER_WEIGHT * triggers.len();
            if score > 0 && best.is_none_or(|(s, _)| score > s) {
                best = Some((score, id));
            }
        }
        match best {
            Some((score, group)) => Classification::Fuzzy {
                group: group.to_string(),
                score,
            },
            None => Classification::NoMatch,
        }
    }
}
