//! The domain knowledge base: IDU keyword groups, the co-occurring phrase book
//! that drives answer parsing, query groups with their question templates, and
//! the rules that route answers to query groups.
//!
//! A lexicon is plain data (TOML) so that subject-matter experts can edit it
//! without rebuilding. [`Lexicon::builtin`] returns the shipped default.

mod expand;
mod matcher;
mod questions;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expand::{escape_phrase, expand_phrase, expand_template};
pub use matcher::{Hit, KeywordHit, MatcherSet, PhraseMatcher};
pub use questions::{normalize_question, QuestionBank};

const DEFAULT_LEXICON: &str = include_str!("../../assets/default_lexicon.toml");

/// Classes of co-occurring phrases used by the answer parsing rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseClass {
    Negation,
    Temporal,
    AdditionalTemporal,
    Substance,
    TrackMark,
}

impl PhraseClass {
    pub const ALL: [PhraseClass; 5] = [
        PhraseClass::Negation,
        PhraseClass::Temporal,
        PhraseClass::AdditionalTemporal,
        PhraseClass::Substance,
        PhraseClass::TrackMark,
    ];

    /// Short code used in annotation dumps (NP, TemP, ATP, SP, TMP).
    pub fn code(self) -> &'static str {
        match self {
            PhraseClass::Negation => "NP",
            PhraseClass::Temporal => "TemP",
            PhraseClass::AdditionalTemporal => "ATP",
            PhraseClass::Substance => "SP",
            PhraseClass::TrackMark => "TMP",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhraseClass::Negation => "negation",
            PhraseClass::Temporal => "temporal",
            PhraseClass::AdditionalTemporal => "additional_temporal",
            PhraseClass::Substance => "substance",
            PhraseClass::TrackMark => "track_mark",
        }
    }
}

impl fmt::Display for PhraseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordGroup {
    pub id: String,
    pub label: String,
    /// Expanded, lowercase, duplicate-free.
    pub phrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseBook {
    pub negation: Vec<String>,
    pub temporal: Vec<String>,
    pub additional_temporal: Vec<String>,
    pub substance: Vec<String>,
    pub track_mark: Vec<String>,
}

impl PhraseBook {
    pub fn phrases(&self, class: PhraseClass) -> &[String] {
        match class {
            PhraseClass::Negation => &self.negation,
            PhraseClass::Temporal => &self.temporal,
            PhraseClass::AdditionalTemporal => &self.additional_temporal,
            PhraseClass::Substance => &self.substance,
            PhraseClass::TrackMark => &self.track_mark,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGroup {
    pub id: String,
    pub label: String,
    pub question_templates: Vec<String>,
}

/// Routes answers containing any trigger phrase to `query_group_id`. The one
/// default rule catches answers no other rule claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRule {
    pub query_group_id: String,
    /// Phrases listed directly on the rule (expanded).
    pub phrases: Vec<String>,
    /// Keyword groups whose phrases are triggers.
    pub keyword_groups: Vec<String>,
    /// Phrase-book classes whose phrases are triggers.
    pub phrase_classes: Vec<PhraseClass>,
    pub is_default: bool,
    /// Resolved union of the three sources above, duplicate-free.
    pub trigger_phrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub version: String,
    pub keyword_groups: Vec<KeywordGroup>,
    pub phrase_book: PhraseBook,
    pub query_groups: Vec<QueryGroup>,
    pub mapping_rules: Vec<MappingRule>,
    /// Tokens that never end a sentence, lowercase.
    pub protected_abbreviations: Vec<String>,
}

// On-disk layout.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    protected_abbreviations: Option<Vec<String>>,
    keyword_groups: Vec<KeywordGroupFile>,
    phrase_book: PhraseBookFile,
    query_groups: Vec<QueryGroupFile>,
    mapping_rules: Vec<MappingRuleFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeywordGroupFile {
    id: String,
    label: String,
    phrases: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhraseBookFile {
    negation: Vec<String>,
    temporal: Vec<String>,
    additional_temporal: Vec<String>,
    substance: Vec<String>,
    track_mark: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryGroupFile {
    id: String,
    label: String,
    questions: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingRuleFile {
    query_group: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    phrases: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    keyword_groups: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    phrase_classes: Vec<PhraseClass>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    default: bool,
}

const DEFAULT_PROTECTED: &[&str] = &[
    "h/o", "y/o", "pt.", "hx.", "vs.", "dr.", "mr.", "ms.", "e.g.", "i.e.", "b.i.d.", "q.d.",
];

impl Lexicon {
    /// The shipped default lexicon.
    pub fn builtin() -> Lexicon {
        Lexicon::from_toml_str(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Lexicon> {
        let file: LexiconFile = toml::from_str(text).map_err(|e| Error::parse("lexicon", e))?;
        Lexicon::from_file(file)
    }

    pub fn to_toml_string(&self) -> String {
        let escape_all = |v: &[String]| v.iter().map(|p| escape_phrase(p)).collect::<Vec<_>>();
        let file = LexiconFile {
            version: self.version.clone(),
            protected_abbreviations: Some(escape_all(&self.protected_abbreviations)),
            keyword_groups: self
                .keyword_groups
                .iter()
                .map(|g| KeywordGroupFile {
                    id: g.id.clone(),
                    label: g.label.clone(),
                    phrases: escape_all(&g.phrases),
                })
                .collect(),
            phrase_book: PhraseBookFile {
                negation: escape_all(&self.phrase_book.negation),
                temporal: escape_all(&self.phrase_book.temporal),
                additional_temporal: escape_all(&self.phrase_book.additional_temporal),
                substance: escape_all(&self.phrase_book.substance),
                track_mark: escape_all(&self.phrase_book.track_mark),
            },
            query_groups: self
                .query_groups
                .iter()
                .map(|g| QueryGroupFile {
                    id: g.id.clone(),
                    label: g.label.clone(),
                    questions: g.question_templates.clone(),
                })
                .collect(),
            mapping_rules: self
                .mapping_rules
                .iter()
                .map(|r| MappingRuleFile {
                    query_group: r.query_group_id.clone(),
                    phrases: escape_all(&r.phrases),
                    keyword_groups: r.keyword_groups.clone(),
                    phrase_classes: r.phrase_classes.clone(),
                    default: r.is_default,
                })
                .collect(),
        };
        toml::to_string_pretty(&file).expect("lexicon serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn query_group(&self, id: &str) -> Option<&QueryGroup> {
        self.query_groups.iter().find(|g| g.id == id)
    }

    pub fn query_group_ids(&self) -> Vec<String> {
        self.query_groups.iter().map(|g| g.id.clone()).collect()
    }

    /// Query group of the default ("remaining answers") mapping rule.
    pub fn default_group(&self) -> &str {
        self.mapping_rules
            .iter()
            .find(|r| r.is_default)
            .map(|r| r.query_group_id.as_str())
            .expect("validated lexicon has a default rule")
    }

    fn from_file(file: LexiconFile) -> Result<Lexicon> {
        if !is_semver(&file.version) {
            return Err(Error::schema(
                "version",
                format!("`{}` is not a semantic version", file.version),
            ));
        }

        let mut keyword_groups = Vec::with_capacity(file.keyword_groups.len());
        let mut seen_ids = HashSet::new();
        for (i, group) in file.keyword_groups.into_iter().enumerate() {
            let field = format!("keyword_groups[{i}]");
            if group.id.trim().is_empty() {
                return Err(Error::schema(format!("{field}.id"), "empty id"));
            }
            if !seen_ids.insert(group.id.clone()) {
                return Err(Error::schema(
                    format!("{field}.id"),
                    format!("duplicate keyword group `{}`", group.id),
                ));
            }
            let phrases = expand_list(&group.phrases, &format!("{field}.phrases"))?;
            keyword_groups.push(KeywordGroup {
                id: group.id,
                label: group.label,
                phrases,
            });
        }
        if keyword_groups.is_empty() {
            return Err(Error::schema("keyword_groups", "no keyword groups"));
        }

        let pb = file.phrase_book;
        let phrase_book = PhraseBook {
            negation: expand_list(&pb.negation, "phrase_book.negation")?,
            temporal: expand_list(&pb.temporal, "phrase_book.temporal")?,
            additional_temporal: expand_list(
                &pb.additional_temporal,
                "phrase_book.additional_temporal",
            )?,
            substance: expand_list(&pb.substance, "phrase_book.substance")?,
            track_mark: expand_list(&pb.track_mark, "phrase_book.track_mark")?,
        };

        let mut query_groups = Vec::with_capacity(file.query_groups.len());
        let mut seen_groups = HashSet::new();
        for (i, group) in file.query_groups.into_iter().enumerate() {
            let field = format!("query_groups[{i}]");
            if group.id.trim().is_empty() {
                return Err(Error::schema(format!("{field}.id"), "empty id"));
            }
            if !seen_groups.insert(group.id.clone()) {
                return Err(Error::schema(
                    format!("{field}.id"),
                    format!("duplicate query group `{}`", group.id),
                ));
            }
            if group.questions.is_empty() {
                return Err(Error::schema(
                    format!("{field}.questions"),
                    format!("query group `{}` has no question templates", group.id),
                ));
            }
            for template in &group.questions {
                expand_template(template)?;
            }
            query_groups.push(QueryGroup {
                id: group.id,
                label: group.label,
                question_templates: group.questions,
            });
        }

        let mut mapping_rules = Vec::with_capacity(file.mapping_rules.len());
        for (i, rule) in file.mapping_rules.into_iter().enumerate() {
            let field = format!("mapping_rules[{i}]");
            if !seen_groups.contains(&rule.query_group) {
                return Err(Error::schema(
                    format!("{field}.query_group"),
                    format!("unknown query group `{}`", rule.query_group),
                ));
            }
            for kg in &rule.keyword_groups {
                if !seen_ids.contains(kg) {
                    return Err(Error::schema(
                        format!("{field}.keyword_groups"),
                        format!("unknown keyword group `{kg}`"),
                    ));
                }
            }
            let phrases = if rule.phrases.is_empty() {
                Vec::new()
            } else {
                expand_list(&rule.phrases, &format!("{field}.phrases"))?
            };
            let mut mapping = MappingRule {
                query_group_id: rule.query_group,
                phrases,
                keyword_groups: rule.keyword_groups,
                phrase_classes: rule.phrase_classes,
                is_default: rule.default,
                trigger_phrases: Vec::new(),
            };
            mapping.trigger_phrases = resolve_triggers(&mapping, &keyword_groups, &phrase_book);
            if !mapping.is_default && mapping.trigger_phrases.is_empty() {
                return Err(Error::schema(
                    field,
                    "non-default mapping rule has no trigger phrases",
                ));
            }
            mapping_rules.push(mapping);
        }
        match mapping_rules.iter().filter(|r| r.is_default).count() {
            1 => {}
            0 => {
                return Err(Error::schema(
                    "mapping_rules",
                    "missing default mapping rule",
                ))
            }
            n => {
                return Err(Error::schema(
                    "mapping_rules",
                    format!("{n} default mapping rules; exactly one is allowed"),
                ))
            }
        }

        let protected_abbreviations = match file.protected_abbreviations {
            Some(list) => {
                let mut out = Vec::new();
                for item in &list {
                    for p in expand_phrase(item)? {
                        if !out.contains(&p) {
                            out.push(p);
                        }
                    }
                }
                out
            }
            None => DEFAULT_PROTECTED.iter().map(|s| s.to_string()).collect(),
        };

        Ok(Lexicon {
            version: file.version,
            keyword_groups,
            phrase_book,
            query_groups,
            mapping_rules,
            protected_abbreviations,
        })
    }
}

fn expand_list(patterns: &[String], field: &str) -> Result<Vec<String>> {
    if patterns.is_empty() {
        return Err(Error::schema(field, "list is empty"));
    }
    let mut out = Vec::new();
    for pattern in patterns {
        if pattern.trim().is_empty() {
            return Err(Error::schema(field, "empty phrase"));
        }
        let expanded = expand_phrase(pattern).map_err(|e| Error::schema(field, e.to_string()))?;
        for phrase in expanded {
            if !out.contains(&phrase) {
                out.push(phrase);
            }
        }
    }
    Ok(out)
}

fn resolve_triggers(
    rule: &MappingRule,
    keyword_groups: &[KeywordGroup],
    phrase_book: &PhraseBook,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |p: &String| {
        if !out.contains(p) {
            out.push(p.clone());
        }
    };
    for kg in &rule.keyword_groups {
        if let Some(group) = keyword_groups.iter().find(|g| &g.id == kg) {
            group.phrases.iter().for_each(&mut push);
        }
    }
    for class in &rule.phrase_classes {
        phrase_book.phrases(*class).iter().for_each(&mut push);
    }
    rule.phrases.iter().for_each(&mut push);
    out
}

fn is_semver(v: &str) -> bool {
    let core = v.split(['-', '+']).next().unwrap_or("");
    let parts: Vec<&str> = core.split('.').collect();
    parts.len() == 3
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shape() {
        let lex = Lexicon::builtin();
        assert_eq!(lex.query_groups.len(), 9);
        assert_eq!(lex.keyword_groups.len(), 6);
        assert_eq!(lex.default_group(), "existence_of_idu");
        assert_eq!(lex.mapping_rules.iter().filter(|r| r.is_default).count(), 1);
        for group in &lex.keyword_groups {
            for p in &group.phrases {
                assert!(!p.is_empty());
                assert_eq!(p, &p.to_lowercase());
            }
        }
        assert!(lex.phrase_book.temporal.contains(&"h/o".to_string()));
        assert!(lex.phrase_book.negation.contains(&"denies".to_string()));
        assert!(lex
            .phrase_book
            .additional_temporal
            .contains(&"days ago".to_string()));
    }

    #[test]
    fn round_trip_is_identity() {
        let lex = Lexicon::builtin();
        let again = Lexicon::from_toml_str(&lex.to_toml_string()).unwrap();
        assert_eq!(lex, again);
    }

    fn minimal(rules: &str) -> String {
        format!(
            r#"
version = "0.1.0"
[[keyword_groups]]
id = "generic"
label = "Generic"
phrases = ["ivdu"]
[phrase_book]
negation = ["no"]
temporal = ["hx"]
additional_temporal = ["days ago"]
substance = ["oud"]
track_mark = ["old"]
[[query_groups]]
id = "existence_of_idu"
label = "Existence"
questions = ["Does the pt have a hx of IDU?"]
{rules}
"#
        )
    }

    #[test]
    fn unknown_group_is_named() {
        let text = minimal(
            r#"
[[mapping_rules]]
query_group = "foo"
phrases = ["x"]
[[mapping_rules]]
query_group = "existence_of_idu"
default = true
"#,
        );
        let err = Lexicon::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
    }

    #[test]
    fn missing_default_rule() {
        let text = minimal(
            r#"
[[mapping_rules]]
query_group = "existence_of_idu"
phrase_classes = ["negation"]
"#,
        );
        let err = Lexicon::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("default"), "{err}");
    }

    #[test]
    fn empty_phrase_rejected() {
        let text = minimal(
            r#"
[[mapping_rules]]
query_group = "existence_of_idu"
default = true
"#,
        )
        .replace(r#"phrases = ["ivdu"]"#, r#"phrases = ["ivdu", " "]"#);
        let err = Lexicon::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("keyword_groups[0].phrases"), "{err}");
    }

    #[test]
    fn bad_version_rejected() {
        let text =
            minimal("[[mapping_rules]]\nquery_group = \"existence_of_idu\"\ndefault = true\n")
                .replace("0.1.0", "one");
        assert!(Lexicon::from_toml_str(&text).is_err());
    }
}
