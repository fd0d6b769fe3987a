//! Rule-based gold-standard dataset generation and evaluation for extractive
//! question answering over clinical progress notes, targeting evidence of
//! injection drug use (IDU).
//!
//! The pipeline runs: [`lexicon`] → [`corpus`] → [`extract`] → [`dataset`] →
//! [`chunker`] / [`eval`]. Every stage is a pure function of its inputs and the
//! lexicon, so a fixed seed reproduces every artifact byte for byte.
//!
//! Offsets are byte offsets internally. Anything written to disk uses
//! character (Unicode scalar) offsets.

pub mod answerer;
pub mod chunker;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod extract;
pub mod lexicon;
pub mod pipeline;
pub mod stats;

pub use error::{Error, Result};

/// Character offset of byte offset `byte` in `text`.
///
/// Panics if `byte` is not a char boundary.
pub fn char_offset(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

/// Byte offset of character offset `chars`, or `None` past the end.
pub fn byte_offset(text: &str, chars: usize) -> Option<usize> {
    if chars == 0 {
        return Some(0);
    }
    text.char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .nth(chars)
}

/// `len` characters of `text` starting at character `start`.
pub fn char_slice(text: &str, start: usize, len: usize) -> Option<&str> {
    let from = byte_offset(text, start)?;
    let to = from + byte_offset(&text[from..], len)?;
    text.get(from..to)
}
