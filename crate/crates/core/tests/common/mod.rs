#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use iduqa::corpus::Note;
use iduqa::dataset::{Answer, ContextEntry, QASample};

pub fn synthetic_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

pub fn date(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2022, 1, 1).unwrap() + chrono::Days::new(i as u64)
}

const IDU_LINES: &[&str] = &[
    "denies ivdu",
    "h/o ivdu, in remission since 2065",
    "reports recent iv heroin use",
    "multiple track marks over both arms",
    "admits sharing needles with partner",
    "last ivdu 2 years ago",
    "uses iv meth daily",
    "recent ivdu with meth and heroin",
    "skin popping on thighs",
    "iv drug user",
];

const FILLER: &[&str] = &[
    "pt seen for follow up",
    "vitals stable, afebrile",
    "lungs clear to auscultation",
    "continue current medications",
    "lives with spouse",
    "works as a teacher",
    "tobacco: quit 5 years ago",
    "etoh: socially",
    "a1c 6.8 on metformin",
    "rtc in 3 months",
    "bp 128/76, hr 70",
    "no acute distress",
];

/// One keyword-bearing note per patient, `n` patients.
pub fn idu_notes(n: usize) -> Vec<Note> {
    (0..n)
        .map(|i| {
            let text = format!(
                "{}.\n{}.\n{}.",
                FILLER[i % FILLER.len()],
                IDU_LINES[i % IDU_LINES.len()],
                FILLER[(i * 7 + 3) % FILLER.len()]
            );
            Note::new(format!("k{i:03}"), format!("p{i:03}"), date(i), text)
        })
        .collect()
}

/// Keyword-free notes, each a different filler combination.
pub fn no_keyword_notes(n: usize) -> Vec<Note> {
    (0..n)
        .map(|i| {
            let a = FILLER[i % FILLER.len()];
            let b = FILLER[(i / FILLER.len() + i + 1) % FILLER.len()];
            let c = FILLER[(i * 5 + 2) % FILLER.len()];
            Note::new(
                format!("z{i:03}"),
                format!("q{i:03}"),
                date(i),
                format!("{a}. {b}.\n{c}."),
            )
        })
        .collect()
}

/// A context of `context_tokens` distinct words with the answer at token
/// `a_start`, `a_len` tokens long.
pub fn sample_with_answer(
    context_tokens: usize,
    q_tokens: usize,
    a_start: usize,
    a_len: usize,
) -> (ContextEntry, QASample) {
    let words: Vec<String> = (0..context_tokens).map(|i| format!("t{i}")).collect();
    let context = words.join(" ");
    let answer_start = words[..a_start].iter().map(|w| w.chars().count() + 1).sum();
    let text = words[a_start..a_start + a_len].join(" ");
    let sample = QASample {
        id: "s".into(),
        question: vec!["q"; q_tokens].join(" "),
        query_group: "existence_of_idu".into(),
        answers: vec![Answer { text, answer_start }],
        is_impossible: false,
    };
    let entry = ContextEntry {
        note_id: "n".into(),
        patient_id: "p".into(),
        context,
        qas: Vec::new(),
    };
    (entry, sample)
}

/// Reference metric implementations written without the library's helpers:
/// char-vector trimming, window search, and greedy token matching.
pub mod oracle {
    fn trimmed(s: &str) -> Vec<char> {
        let chars: Vec<char> = s.chars().collect();
        let mut a = 0;
        let mut b = chars.len();
        while a < b && chars[a].is_whitespace() {
            a += 1;
        }
        while b > a && chars[b - 1].is_whitespace() {
            b -= 1;
        }
        chars[a..b].to_vec()
    }

    pub fn em(pred: &str, gold: &str) -> u8 {
        u8::from(trimmed(pred) == trimmed(gold))
    }

    pub fn perfect_recall(pred: &str, gold: &str) -> u8 {
        let p = trimmed(pred);
        let g = trimmed(gold);
        if g.is_empty() {
            return u8::from(p.is_empty());
        }
        if g.len() > p.len() {
            return 0;
        }
        u8::from((0..=p.len() - g.len()).any(|i| p[i..i + g.len()] == g[..]))
    }

    pub fn words(s: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur: Vec<char> = Vec::new();
        for c in s.chars().chain(std::iter::once(' ')) {
            if !c.is_whitespace() {
                cur.push(c);
                continue;
            }
            let first = cur.iter().position(|c| c.is_alphanumeric());
            let last = cur.iter().rposition(|c| c.is_alphanumeric());
            if let (Some(a), Some(b)) = (first, last) {
                let w: String = cur[a..=b].iter().flat_map(|c| c.to_lowercase()).collect();
                out.push(w);
            }
            cur.clear();
        }
        out
    }

    /// `(tp, fp, fn, f1)`
    pub fn f1(pred: &str, gold: &str) -> (usize, usize, usize, f64) {
        let p = words(pred);
        let g = words(gold);
        let mut used = vec![false; g.len()];
        let mut tp = 0;
        for w in &p {
            for (j, gw) in g.iter().enumerate() {
                if !used[j] && gw == w {
                    used[j] = true;
                    tp += 1;
                    break;
                }
            }
        }
        let (fp, fn_) = (p.len() - tp, g.len() - tp);
        let f1 = if p.is_empty() && g.is_empty() {
            1.0
        } else if tp == 0 {
            0.0
        } else {
            let precision = tp as f64 / (tp + fp) as f64;
            let recall = tp as f64 / (tp + fn_) as f64;
            2.0 * precision * recall / (precision + recall)
        };
        (tp, fp, fn_, f1)
    }
}

/// Random (pred, gold) pairs over a small vocabulary that includes case
/// variants, edge punctuation, and odd whitespace.
pub mod pairs {
    use rand::seq::IndexedRandom;
    use rand::Rng;

    const VOCAB: &[&str] = &[
        "denies", "Denies", "ivdu", "IVDU.", "hx", "h/o", "of", "(iv", "heroin)", "-", "--", "any",
        "any,", "track", "marks", "ago", "ivdu,", "2", "yrs", "no", "...",
    ];
    const SPACES: &[&str] = &[" ", " ", " ", "  ", "\n", "\t"];

    pub fn phrase(rng: &mut impl Rng, max_words: usize) -> String {
        let n = rng.random_range(0..=max_words);
        let mut s = String::new();
        for i in 0..n {
            if i > 0 {
                s.push_str(SPACES.choose(rng).unwrap());
            }
            s.push_str(VOCAB.choose(rng).unwrap());
        }
        s
    }

    pub fn pair(rng: &mut impl Rng) -> (String, String) {
        let gold = phrase(rng, 5);
        let pred = match rng.random_range(0..6) {
            0 => gold.clone(),
            1 => format!(" {gold}\n"),
            2 => format!("{} {gold}", phrase(rng, 2)),
            3 => format!("{gold} {}", phrase(rng, 2)),
            4 => String::new(),
            _ => phrase(rng, 6),
        };
        (pred, gold)
    }
}
