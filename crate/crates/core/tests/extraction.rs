use iduqa::corpus::clean_note;
use iduqa::extract::{Annotator, Classification, EmptyReason};
use iduqa::lexicon::PhraseMatcher;
use proptest::prelude::*;

fn annotator() -> &'static Annotator {
    static A: std::sync::LazyLock<Annotator> = std::sync::LazyLock::new(Annotator::builtin);
    &A
}

#[test]
fn fixture_sentences_trim_to_evidence() {
    let cases = [
        ("pt smokes cannabis, has a h/o ivdu but none now, went to rehab 2070", "h/o ivdu but none now, went to rehab 2070"),
        ("last ivdu was 10 days ago, snorts cocaine occasionally", "last ivdu was 10 days ago"),
        (
            "comments: extremities: mid line in upper right arm, scars and old track marks noted on mid arm",
            "old track marks noted on mid arm",
        ),
    ];
    for (sentence, want) in cases {
        let got: Vec<String> = annotator()
            .extract_text(sentence)
            .into_iter()
            .map(|a| a.text)
            .collect();
        assert_eq!(got, [want]);
    }
}

#[test]
fn answers_are_byte_slices_of_the_note() {
    let note = clean_note(
        "Pt seen today.\n\nHx: h/o IVDU, clean since 2019 . . . track marks on L arm.\nPlan: f/u",
    );
    for a in annotator().extract_text(&note) {
        assert_eq!(&note[a.start..a.end], a.text);
        assert!(!a.query_group_ids.is_empty());
    }
}

#[test]
fn unknown_question_reports_reason() {
    let r = annotator().answer_question("denies ivdu", "what is the weather like");
    assert_eq!(r.classification, Classification::NoMatch);
    assert!(r.answers.is_empty());
    assert_eq!(r.empty_reason, Some(EmptyReason::UnclassifiedQuestion));
}

#[test]
fn keyword_free_note_has_no_answer() {
    let r = annotator().answer_question(
        "lungs clear. vitals stable.",
        "Does the patient have a history of IDU?",
    );
    assert!(r.answers.is_empty());
    assert_eq!(r.empty_reason, Some(EmptyReason::NoKeywords));
}

#[test]
fn bank_questions_classify_exactly() {
    let a = annotator();
    for group in &a.lexicon().query_groups {
        for q in a.bank().questions(&group.id) {
            assert_eq!(
                a.classify_question(q),
                Classification::Exact {
                    group: group.id.clone()
                },
                "{q}"
            );
        }
    }
}

const WORDS: &[&str] = &[
    "pt", "denies", "ivdu", "h/o", "heroin", "track", "marks", "no", "history", "of", "idu",
    "last", "used", "ago", "daily", "iv", "drug", "user", "needles", "the", "and", "2019", "was",
    "lives", "alone",
];
const SEPARATORS: &[&str] = &[
    " ", "  ", ", ", ". ", ".\n", "\n", " . . . ", "; ", "! ", "? ",
];

fn note_text() -> impl Strategy<Value = String> {
    prop::collection::vec((0..WORDS.len(), 0..SEPARATORS.len()), 1..60).prop_map(|parts| {
        let mut s = String::new();
        for (w, sep) in parts {
            s.push_str(WORDS[w]);
            s.push_str(SEPARATORS[sep]);
        }
        s
    })
}

proptest! {
    #[test]
    fn sentences_are_ordered_trimmed_slices(text in note_text()) {
        let text = clean_note(&text);
        let sentences = annotator().sentencize(&text);
        let mut last = 0;
        for s in &sentences {
            prop_assert!(s.start >= last && s.start < s.end);
            prop_assert_eq!(&text[s.start..s.end], s.text.as_str());
            prop_assert_eq!(s.text.trim(), s.text.as_str());
            prop_assert!(!s.text.contains('\n'));
            last = s.end;
        }
    }

    #[test]
    fn extracted_spans_are_exact_slices(text in note_text()) {
        let text = clean_note(&text);
        for a in annotator().extract_text(&text) {
            prop_assert_eq!(&text[a.start..a.end], a.text.as_str());
            prop_assert!(!a.text.trim().is_empty());
        }
    }

    #[test]
    fn matcher_hits_are_case_insensitive_whole_words(text in note_text(), upper in any::<bool>()) {
        let text = if upper { text.to_uppercase() } else { text };
        let m = PhraseMatcher::new([("ivdu", "g"), ("track marks", "g"), ("iv drug user", "g")]).unwrap();
        let mut last = 0;
        for h in m.find_all(&text) {
            prop_assert!(h.start >= last);
            let slice = &text[h.start..h.end];
            let normalized = slice.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
            prop_assert_eq!(normalized, h.phrase.clone());
            let before = text[..h.start].chars().next_back();
            let after = text[h.end..].chars().next();
            prop_assert!(!before.is_some_and(char::is_alphanumeric));
            prop_assert!(!after.is_some_and(char::is_alphanumeric));
            last = h.end;
        }
    }
}
