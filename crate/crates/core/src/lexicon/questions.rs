use std::collections::HashMap;

use super::{expand_template, Lexicon};
use crate::error::{Error, Result};

/// Lowercased, whitespace-collapsed form used as the bank lookup key.
pub fn normalize_question(question: &str) -> String {
    question
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Every expanded question variant per query group, plus a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionBank {
    groups: Vec<(String, Vec<String>)>,
    index: HashMap<String, String>,
}

impl QuestionBank {
    /// Expands every template in lexicon order. Variants that normalize to
    /// the same key within a group are kept once; a key shared by two groups
    /// is an error.
    pub fn expand(lexicon: &Lexicon) -> Result<Self> {
        let mut groups = Vec::with_capacity(lexicon.query_groups.len());
        let mut index: HashMap<String, String> = HashMap::new();
        for group in &lexicon.query_groups {
            let mut questions = Vec::new();
            for template in &group.question_templates {
                for question in expand_template(template)? {
                    let key = normalize_question(&question);
                    match index.get(&key) {
                        Some(owner) if owner == &group.id => continue,
                        Some(owner) => {
                            return Err(Error::schema(
                                format!("query_groups.{}.questions", group.id),
                                format!("question `{question}` is also generated by `{owner}`"),
                            ))
                        }
                        None => {
                            index.insert(key, group.id.clone());
                            questions.push(question);
                        }
                    }
                }
            }
            groups.push((group.id.clone(), questions));
        }
        Ok(QuestionBank { groups, index })
    }

    pub fn questions(&self, group_id: &str) -> &[String] {
        self.groups
            .iter()
            .find(|(id, _)| id == group_id)
            .map(|(_, q)| q.as_slice())
            .unwrap_or(&[])
    }

    /// `(group id, questions)` in lexicon order.
    pub fn groups(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.groups
            .iter()
            .map(|(id, q)| (id.as_str(), q.as_slice()))
    }

    pub fn lookup(&self, question: &str) -> Option<&str> {
        self.index
            .get(&normalize_question(question))
            .map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|(_, q)| q.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
