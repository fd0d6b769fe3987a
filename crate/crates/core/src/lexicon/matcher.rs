use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Lexicon, PhraseClass};
use crate::error::{Error, Result};

/// A phrase occurrence in some text. Offsets are byte offsets, `end`
/// exclusive. `source` names where the phrase came from: a keyword group
/// id, a phrase class name, or a query group id, depending on the matcher.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hit {
    pub start: usize,
    pub end: usize,
    pub phrase: String,
    pub source: String,
}

/// A hit from the keyword matcher; `source` is the keyword group id.
pub type KeywordHit = Hit;

/// Whole-word, case-insensitive matcher over a fixed phrase list.
///
/// Phrases are tried longest first, so at any position the longest phrase
/// wins and reported hits never overlap. Words inside a phrase may be
/// separated by any run of non-newline whitespace.
#[derive(Debug, Clone)]
pub struct PhraseMatcher {
    regex: Regex,
    /// Capture group `i + 1` corresponds to `entries[i]`.
    entries: Vec<(String, String)>,
}

impl PhraseMatcher {
    /// Builds a matcher from `(phrase, source)` pairs. A phrase listed twice
    /// keeps its first source.
    pub fn new<'a>(phrases: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (phrase, source) in phrases {
            let phrase = phrase
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase();
            validate_phrase(&phrase)?;
            if !entries.iter().any(|(p, _)| *p == phrase) {
                entries.push((phrase, source.to_string()));
            }
        }
        entries.sort_by(|a, b| {
            b.0.chars()
                .count()
                .cmp(&a.0.chars().count())
                .then_with(|| a.0.cmp(&b.0))
        });

        let pattern = if entries.is_empty() {
            // Matches nothing.
            r"[^\s\S]".to_string()
        } else {
            let alternatives: Vec<String> = entries
                .iter()
                .map(|(p, _)| {
                    let words: Vec<String> = p.split(' ').map(regex::escape).collect();
                    // Case folding a Unicode class is costly; keep it out of (?i).
                    format!("({})", words.join(r"(?-i:[^\S\n]+)"))
                })
                .collect();
            format!(r"(?i)\b(?:{})\b", alternatives.join("|"))
        };
        let regex = Regex::new(&pattern).map_err(|e| Error::Pattern {
            pattern: entries
                .iter()
                .map(|(p, _)| p.as_str())
                .collect::<Vec<_>>()
                .join("|"),
            message: e.to_string(),
        })?;
        Ok(PhraseMatcher { regex, entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_match(&self, text: &str) -> bool {
        !self.entries.is_empty() && self.regex.is_match(text)
    }

    /// All hits in positional order.
    pub fn find_all(&self, text: &str) -> Vec<Hit> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        self.regex
            .captures_iter(text)
            .map(|caps| {
                let whole = caps.get(0).expect("group 0 always participates");
                let index = (1..caps.len())
                    .find(|&i| caps.get(i).is_some())
                    .expect("one alternative matched");
                let (phrase, source) = &self.entries[index - 1];
                Hit {
                    start: whole.start(),
                    end: whole.end(),
                    phrase: phrase.clone(),
                    source: source.clone(),
                }
            })
            .collect()
    }
}

fn validate_phrase(phrase: &str) -> Result<()> {
    let err = |message: &str| Error::Pattern {
        pattern: phrase.to_string(),
        message: message.to_string(),
    };
    let first = phrase.chars().next().ok_or_else(|| err("empty phrase"))?;
    let last = phrase.chars().next_back().unwrap_or(first);
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    if !is_word(first) || !is_word(last) {
        return Err(err(
            "phrase must start and end with a letter or digit to support whole-word matching",
        ));
    }
    Ok(())
}

/// Compiled matchers for every keyword group, phrase-book class, and mapping
/// rule of a lexicon. Immutable and cheap to share.
#[derive(Debug, Clone)]
pub struct MatcherSet {
    keywords: PhraseMatcher,
    classes: Vec<(PhraseClass, PhraseMatcher)>,
    /// One matcher per mapping rule, aligned with `Lexicon::mapping_rules`
    /// (empty for the default rule).
    rules: Vec<PhraseMatcher>,
}

impl MatcherSet {
    pub fn compile(lexicon: &Lexicon) -> Result<Self> {
        let keywords = PhraseMatcher::new(
            lexicon
                .keyword_groups
                .iter()
                .flat_map(|g| g.phrases.iter().map(move |p| (p.as_str(), g.id.as_str()))),
        )?;
        let mut classes = Vec::with_capacity(PhraseClass::ALL.len());
        for class in PhraseClass::ALL {
            let name = class.name();
            let matcher = PhraseMatcher::new(
                lexicon
                    .phrase_book
                    .phrases(class)
                    .iter()
                    .map(|p| (p.as_str(), name)),
            )?;
            classes.push((class, matcher));
        }
        let rules = lexicon
            .mapping_rules
            .iter()
            .map(|r| {
                PhraseMatcher::new(
                    r.trigger_phrases
                        .iter()
                        .map(|p| (p.as_str(), r.query_group_id.as_str())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MatcherSet {
            keywords,
            classes,
            rules,
        })
    }

    pub fn keywords(&self) -> &PhraseMatcher {
        &self.keywords
    }

    pub fn class(&self, class: PhraseClass) -> &PhraseMatcher {
        &self
            .classes
            .iter()
            .find(|(c, _)| *c == class)
            .expect("every class is compiled")
            .1
    }

    /// Matcher for the `i`-th mapping rule of the lexicon.
    pub fn rule(&self, i: usize) -> &PhraseMatcher {
        &self.rules[i]
    }

    pub fn find_keywords(&self, text: &str) -> Vec<KeywordHit> {
        self.keywords.find_all(text)
    }

    pub fn has_keyword(&self, text: &str) -> bool {
        self.keywords.is_match(text)
    }
}
