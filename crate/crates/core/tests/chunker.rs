mod common;

use common::sample_with_answer;
use iduqa::char_slice;
use iduqa::chunker::{
    chunk_sample, tokenize, window_ranges, ChunkPolicy, PunctuationTokenizer, WhitespaceTokenizer,
};
use proptest::prelude::*;

fn small_policy(stride: usize) -> ChunkPolicy {
    ChunkPolicy {
        max_sequence_tokens: 20,
        document_stride_tokens: stride,
        max_question_tokens: 2,
        max_answer_tokens: 20,
        reserved_tokens: 0,
    }
}

#[test]
fn long_answers_can_fall_between_windows() {
    // capacity 19, stride 10: a 15-token answer at token 9 straddles the
    // first window's end and starts before the second window.
    let policy = small_policy(10);
    let (entry, sample) = sample_with_answer(40, 1, 9, 15);
    let c = chunk_sample(&entry, &sample, &policy, &WhitespaceTokenizer).unwrap();
    assert_eq!(c.capacity, 19);
    assert!(c.chunks.iter().all(|ch| !ch.is_answer_present));
}

#[test]
fn long_question_is_truncated() {
    let (entry, sample) = sample_with_answer(30, 25, 3, 2);
    let c = chunk_sample(
        &entry,
        &sample,
        &ChunkPolicy::default(),
        &WhitespaceTokenizer,
    )
    .unwrap();
    assert!(c.question_truncated);
    assert_eq!(c.question_tokens, 20);
    assert_eq!(c.capacity, 492);
    assert_eq!(c.chunks.len(), 1);
}

#[test]
fn impossible_sample_has_no_answer_windows() {
    let (entry, mut sample) = sample_with_answer(50, 3, 0, 1);
    sample.answers.clear();
    sample.is_impossible = true;
    let c = chunk_sample(&entry, &sample, &small_policy(5), &WhitespaceTokenizer).unwrap();
    assert!(c.chunks.len() > 1);
    assert!(c.chunks.iter().all(|ch| ch.answer_in_window.is_none()));
}

#[test]
fn invalid_policy_and_empty_context() {
    let (entry, sample) = sample_with_answer(5, 1, 0, 1);
    assert!(chunk_sample(&entry, &sample, &small_policy(18), &WhitespaceTokenizer).is_err());
    let mut empty = entry.clone();
    empty.context = "  ".into();
    assert!(chunk_sample(&empty, &sample, &small_policy(5), &WhitespaceTokenizer).is_err());
}

#[test]
fn punctuation_tokens_are_slices() {
    let text = "h/o ivdu, clean x2y. track-marks (old) on arm!";
    let tokens = tokenize(text, &PunctuationTokenizer).unwrap();
    for t in &tokens {
        assert_eq!(&text[t.start..t.end], t.text);
    }
    assert!(tokens.len() > text.split_whitespace().count());
}

proptest! {
    #[test]
    fn windows_cover_every_token(n in 1usize..3000, capacity in 2usize..600, stride_frac in 0.01f64..0.99) {
        let stride = ((capacity as f64 * stride_frac) as usize).clamp(1, capacity - 1);
        let w = window_ranges(n, capacity, stride);
        prop_assert_eq!(w[0].0, 0);
        prop_assert_eq!(w.last().unwrap().1, n);
        for (i, &(s, e)) in w.iter().enumerate() {
            prop_assert_eq!(s, i * stride);
            prop_assert!(e - s <= capacity && s < e);
            if i + 1 < w.len() {
                // Consecutive windows overlap, so no token is skipped.
                prop_assert!(w[i + 1].0 < e);
                prop_assert_eq!(e, s + capacity);
            }
        }
    }

    #[test]
    fn short_answers_are_preserved(
        n in 1usize..1500,
        q in 1usize..40,
        stride in 1usize..300,
        start_frac in 0.0f64..1.0,
        len in 1usize..=100,
    ) {
        let policy = ChunkPolicy { document_stride_tokens: stride, ..ChunkPolicy::default() };
        let len = len.min(n);
        let a_start = ((n - len) as f64 * start_frac) as usize;
        let (entry, sample) = sample_with_answer(n, q, a_start, len);
        let c = chunk_sample(&entry, &sample, &policy, &WhitespaceTokenizer).unwrap();
        prop_assert!(len <= c.capacity - stride + 1);
        let hits: Vec<_> = c.chunks.iter().filter(|ch| ch.is_answer_present).collect();
        prop_assert!(!hits.is_empty());
        for ch in hits {
            prop_assert_eq!(ch.answer_in_window, Some((a_start, a_start + len)));
        }
    }

    #[test]
    fn char_ranges_match_token_ranges(n in 1usize..400, stride in 1usize..15) {
        let (entry, sample) = sample_with_answer(n, 1, 0, 1);
        let c = chunk_sample(&entry, &sample, &small_policy(stride), &WhitespaceTokenizer).unwrap();
        let tokens = tokenize(&entry.context, &WhitespaceTokenizer).unwrap();
        for ch in &c.chunks {
            let (s, e) = ch.char_range;
            let window = char_slice(&entry.context, s, e - s).unwrap();
            let (ts, te) = ch.token_range;
            let expected: Vec<&str> = tokens[ts..te].iter().map(|t| t.text.as_str()).collect();
            prop_assert_eq!(window.split_whitespace().collect::<Vec<_>>(), expected);
        }
    }
}
