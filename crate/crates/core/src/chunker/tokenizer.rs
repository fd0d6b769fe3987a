use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A token of some text; byte offsets, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

/// A tokenization policy. Implementations must return ordered,
/// non-overlapping tokens whose slices reproduce their text; [`tokenize`]
/// checks this.
pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn tokenize(&self, text: &str) -> Vec<Token>;
}

/// Maximal runs of non-whitespace.
#[derive(Debug, Default, Clone, Copy)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    tokens.push(Token {
                        start: s,
                        end: i,
                        text: text[s..i].to_string(),
                    });
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            tokens.push(Token {
                start: s,
                end: text.len(),
                text: text[s..].to_string(),
            });
        }
        tokens
    }
}

/// Alphanumeric runs, with every other non-whitespace character as its own
/// token. Closer to subword tokenizers in token counts than whitespace.
#[derive(Debug, Default, Clone, Copy)]
pub struct PunctuationTokenizer;

impl Tokenizer for PunctuationTokenizer {
    fn name(&self) -> &str {
        "punctuation"
    }

    fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut tokens = Vec::new();
        let mut run: Option<usize> = None;
        let flush = |run: &mut Option<usize>, end: usize, tokens: &mut Vec<Token>| {
            if let Some(s) = run.take() {
                tokens.push(Token {
                    start: s,
                    end,
                    text: text[s..end].to_string(),
                });
            }
        };
        for (i, c) in text.char_indices() {
            if c.is_alphanumeric() {
                if run.is_none() {
                    run = Some(i);
                }
                continue;
            }
            flush(&mut run, i, &mut tokens);
            if !c.is_whitespace() {
                let end = i + c.len_utf8();
                tokens.push(Token {
                    start: i,
                    end,
                    text: text[i..end].to_string(),
                });
            }
        }
        flush(&mut run, text.len(), &mut tokens);
        tokens
    }
}

/// Tokenizes and checks the policy's output contract.
pub fn tokenize(text: &str, policy: &dyn Tokenizer) -> Result<Vec<Token>> {
    let tokens = policy.tokenize(text);
    let mut prev_end = 0;
    for (i, t) in tokens.iter().enumerate() {
        let bad = |m: &str| {
            Error::InvalidInput(format!(
                "tokenizer `{}` produced an invalid token #{i} ({}..{}): {m}",
                policy.name(),
                t.start,
                t.end
            ))
        };
        if t.start >= t.end || t.end > text.len() {
            return Err(bad("empty or out of range"));
        }
        if t.start < prev_end {
            return Err(bad("overlaps or precedes the previous token"));
        }
        if text.get(t.start..t.end) != Some(t.text.as_str()) {
            return Err(bad("text does not match its offsets"));
        }
        prev_end = t.end;
    }
    Ok(tokens)
}

/// Tokenizers selectable by name.
pub struct TokenizerRegistry {
    entries: Vec<Box<dyn Tokenizer>>,
}

impl Default for TokenizerRegistry {
    fn default() -> Self {
        let mut r = TokenizerRegistry {
            entries: Vec::new(),
        };
        r.register(Box::new(WhitespaceTokenizer));
        r.register(Box::new(PunctuationTokenizer));
        r
    }
}

impl TokenizerRegistry {
    /// Adds a tokenizer, replacing any existing one with the same name.
    pub fn register(&mut self, tokenizer: Box<dyn Tokenizer>) {
        self.entries.retain(|t| t.name() != tokenizer.name());
        self.entries.push(tokenizer);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Tokenizer> {
        self.entries
            .iter()
            .find(|t| t.name() == name)
            .map(|t| t.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "tokenizer",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|t| t.name()).collect()
    }
}
