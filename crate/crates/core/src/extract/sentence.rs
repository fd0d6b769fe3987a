use serde::{Deserialize, Serialize};

/// A sentence of a cleaned note. Offsets are byte offsets into the note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

const TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Rule-based sentence splitter.
///
/// A sentence ends after `.`, `!` or `?` when followed by whitespace (or the
/// end of the text), and at every newline. A period closing a protected
/// abbreviation (`pt.`, `e.g.`, ...) never ends a sentence. Sentences are
/// trimmed; whitespace-only segments are skipped.
pub fn sentencize(text: &str, protected: &[String]) -> Vec<Sentence> {
    let mut sentences = Vec::new();
    let mut segment_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '\n' {
            push_segment(text, segment_start, i, &mut sentences);
            segment_start = i + 1;
            continue;
        }
        if !TERMINATORS.contains(&c) {
            continue;
        }
        let next = chars.peek().map(|&(_, n)| n);
        if next.is_some_and(|n| !n.is_whitespace()) {
            continue;
        }
        let end = i + c.len_utf8();
        if c == '.' && is_protected(&text[segment_start..end], protected) {
            continue;
        }
        push_segment(text, segment_start, end, &mut sentences);
        segment_start = end;
    }
    push_segment(text, segment_start, text.len(), &mut sentences);
    sentences
}

fn push_segment(text: &str, start: usize, end: usize, out: &mut Vec<Sentence>) {
    let slice = &text[start..end];
    let trimmed_start = start + (slice.len() - slice.trim_start().len());
    let trimmed_end = start + slice.trim_end().len();
    if trimmed_start < trimmed_end {
        out.push(Sentence {
            start: trimmed_start,
            end: trimmed_end,
            text: text[trimmed_start..trimmed_end].to_string(),
        });
    }
}

/// Whether the last token of `segment` (which ends with a period) is a
/// protected abbreviation.
fn is_protected(segment: &str, protected: &[String]) -> bool {
    let token = segment
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    if token.is_empty() {
        return false;
    }
    let bare = token.trim_end_matches('.');
    protected.iter().any(|p| *p == token || *p == bare)
}
