use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// 1 iff the trimmed strings are identical.
pub fn em_score(pred: &str, gold: &str) -> u8 {
    u8::from(pred.trim() == gold.trim())
}

/// 1 iff the trimmed gold answer occurs verbatim inside the trimmed
/// prediction. An empty gold answer is only recalled by an empty prediction.
pub fn perfect_recall_score(pred: &str, gold: &str) -> u8 {
    let (pred, gold) = (pred.trim(), gold.trim());
    if gold.is_empty() {
        return u8::from(pred.is_empty());
    }
    u8::from(pred.contains(gold))
}

/// Lowercased whitespace words with leading and trailing non-alphanumeric
/// characters removed; words that strip to nothing are dropped.
pub fn f1_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenF1 {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub f1: f64,
}

/// Harmonic mean of token precision `tp / (tp + fp)` and recall
/// `tp / (tp + fn)`; zero when nothing overlaps.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fn_) as f64;
    2.0 * p * r / (p + r)
}

pub fn token_f1(pred: &str, gold: &str) -> TokenF1 {
    let pred = f1_tokens(pred);
    let gold = f1_tokens(gold);
    if pred.is_empty() || gold.is_empty() {
        let both = pred.is_empty() && gold.is_empty();
        return TokenF1 {
            tp: 0,
            fp: pred.len(),
            fn_: gold.len(),
            f1: if both { 1.0 } else { 0.0 },
        };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &gold {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut tp = 0;
    for t in &pred {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                tp += 1;
            }
        }
    }
    let (fp, fn_) = (pred.len() - tp, gold.len() - tp);
    TokenF1 {
        tp,
        fp,
        fn_,
        f1: f1_from_counts(tp, fp, fn_),
    }
}
