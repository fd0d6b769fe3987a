//! Model-input preparation: tokenize a question/context pair and cut long
//! contexts into overlapping windows with a fixed document stride.

mod tokenizer;

use serde::{Deserialize, Serialize};

use crate::dataset::{ContextEntry, QASample};
use crate::error::{Error, Result};

pub use tokenizer::{
    tokenize, PunctuationTokenizer, Token, Tokenizer, TokenizerRegistry, WhitespaceTokenizer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkPolicy {
    pub max_sequence_tokens: usize,
    pub document_stride_tokens: usize,
    pub max_question_tokens: usize,
    pub max_answer_tokens: usize,
    /// Tokens held back for special/separator tokens. The plain arithmetic
    /// (512 - 20 = 492) reserves none.
    pub reserved_tokens: usize,
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        ChunkPolicy {
            max_sequence_tokens: 512,
            document_stride_tokens: 128,
            max_question_tokens: 20,
            max_answer_tokens: 100,
            reserved_tokens: 0,
        }
    }
}

impl ChunkPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_sequence_tokens == 0
            || self.document_stride_tokens == 0
            || self.max_question_tokens == 0
            || self.max_answer_tokens == 0
        {
            return Err(Error::InvalidInput(
                "chunk policy values must be positive".into(),
            ));
        }
        let min_capacity = self
            .max_sequence_tokens
            .saturating_sub(self.max_question_tokens + self.reserved_tokens);
        if self.document_stride_tokens >= min_capacity {
            return Err(Error::InvalidInput(format!(
                "document stride {} must be smaller than the context capacity {min_capacity}",
                self.document_stride_tokens
            )));
        }
        Ok(())
    }

    /// Context tokens available next to a question of `question_tokens`.
    pub fn capacity(&self, question_tokens: usize) -> usize {
        self.max_sequence_tokens
            - question_tokens.min(self.max_question_tokens)
            - self.reserved_tokens
    }
}

/// Window `[start, end)` token ranges: starts at `0, stride, 2*stride, ...`
/// until a window reaches the last token.
pub fn window_ranges(n_tokens: usize, capacity: usize, stride: usize) -> Vec<(usize, usize)> {
    let mut windows = Vec::new();
    if n_tokens == 0 || capacity == 0 || stride == 0 {
        return windows;
    }
    let mut start = 0;
    loop {
        let end = (start + capacity).min(n_tokens);
        windows.push((start, end));
        if end == n_tokens {
            break;
        }
        start += stride;
    }
    windows
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub sample_id: String,
    pub window_index: usize,
    /// Context token range `[start, end)`.
    pub token_range: (usize, usize),
    /// Character range of the window in the context.
    pub char_range: (usize, usize),
    /// Answer token range `[start, end)` in context token indices, when the
    /// whole answer lies inside this window.
    pub answer_in_window: Option<(usize, usize)>,
    pub is_answer_present: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedSample {
    pub chunks: Vec<Chunk>,
    pub question_tokens: usize,
    pub question_truncated: bool,
    pub capacity: usize,
}

/// Token range `[start, end)` covering byte span `[start, end)`.
fn covering_tokens(tokens: &[Token], start: usize, end: usize) -> Option<(usize, usize)> {
    let first = tokens.iter().position(|t| t.end > start)?;
    let last = tokens.iter().rposition(|t| t.start < end)?;
    (first <= last).then_some((first, last + 1))
}

/// Splits one sample's context into windows and locates its answer.
pub fn chunk_sample(
    entry: &ContextEntry,
    sample: &QASample,
    policy: &ChunkPolicy,
    tokenizer: &dyn Tokenizer,
) -> Result<ChunkedSample> {
    policy.validate()?;
    let context = &entry.context;
    if context.trim().is_empty() {
        return Err(Error::InvalidInput(format!(
            "sample `{}` has an empty context",
            sample.id
        )));
    }
    let question_tokens = tokenize(&sample.question, tokenizer)?.len();
    let question_truncated = question_tokens > policy.max_question_tokens;
    if question_truncated {
        log::warn!(
            "question of sample `{}` has {question_tokens} tokens; truncated to {}",
            sample.id,
            policy.max_question_tokens
        );
    }
    let capacity = policy.capacity(question_tokens);
    let tokens = tokenize(context, tokenizer)?;

    let answer_tokens = sample.answers.first().and_then(|a| {
        let start = crate::byte_offset(context, a.answer_start)?;
        let end = start + a.text.len();
        covering_tokens(&tokens, start, end)
    });

    let chunks = window_ranges(tokens.len(), capacity, policy.document_stride_tokens)
        .into_iter()
        .enumerate()
        .map(|(window_index, (start, end))| {
            let answer_in_window = answer_tokens.filter(|&(a, b)| a >= start && b <= end);
            Chunk {
                sample_id: sample.id.clone(),
                window_index,
                token_range: (start, end),
                char_range: (
                    crate::char_offset(context, tokens[start].start),
                    crate::char_offset(context, tokens[end - 1].end),
                ),
                answer_in_window,
                is_answer_present: answer_in_window.is_some(),
            }
        })
        .collect();

    Ok(ChunkedSample {
        chunks,
        question_tokens: question_tokens.min(policy.max_question_tokens),
        question_truncated,
        capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_matches_plain_arithmetic() {
        assert_eq!(ChunkPolicy::default().capacity(20), 492);
        assert_eq!(ChunkPolicy::default().capacity(35), 492);
        assert_eq!(ChunkPolicy::default().capacity(8), 504);
    }

    #[test]
    fn seven_hundred_tokens_three_windows() {
        assert_eq!(
            window_ranges(700, 492, 128),
            [(0, 492), (128, 620), (256, 700)]
        );
    }

    #[test]
    fn short_context_single_window() {
        assert_eq!(window_ranges(50, 492, 128), [(0, 50)]);
        assert!(window_ranges(0, 492, 128).is_empty());
    }

    #[test]
    fn policy_validation() {
        ChunkPolicy::default().validate().unwrap();
        let bad = ChunkPolicy {
            document_stride_tokens: 492,
            ..ChunkPolicy::default()
        };
        assert!(bad.validate().is_err());
        let zero = ChunkPolicy {
            max_answer_tokens: 0,
            ..ChunkPolicy::default()
        };
        assert!(zero.validate().is_err());
    }
}
