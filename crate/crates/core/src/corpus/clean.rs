use std::sync::LazyLock;

use regex::Regex;

static PUNCT_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\.{2,}|-{2,}|_{2,}").expect("valid regex"));
static NEWLINE_AFTER_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"([,:;'"’”])[^\S\n]*\n\s*"#).expect("valid regex"));
static NEWLINE_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[^\S\n]*\n(?:[^\S\n]*\n)+[^\S\n]*").expect("valid regex"));
static BLANK_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[ \t]{2,}").expect("valid regex"));

/// Minimal note cleaning.
///
/// - runs of two or more periods, dashes, or underscores become one space
/// - a line break after `, : ; ' "` becomes one space
/// - runs of two or more line breaks become one
/// - runs of two or more spaces/tabs become one space
/// - the result is trimmed
///
/// Idempotent: cleaning cleaned text is a no-op.
pub fn clean_note(raw: &str) -> String {
    let text = raw.replace("\r\n", "\n").replace('\r', "\n");
    let text = PUNCT_RUN.replace_all(&text, " ");
    let text = NEWLINE_AFTER_PUNCT.replace_all(&text, "$1 ");
    let text = NEWLINE_RUN.replace_all(&text, "\n");
    let text = BLANK_RUN.replace_all(&text, " ");
    text.trim().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn newline_after_colon() {
        assert_eq!(
            clean_note("social hx:\ndenies ivdu"),
            "social hx: denies ivdu"
        );
    }

    #[test]
    fn underscores_and_blank_lines() {
        assert_eq!(
            clean_note("plan____follow up\n\n\nend"),
            "plan follow up\nend"
        );
    }

    #[test]
    fn empty() {
        assert_eq!(clean_note(""), "");
        assert_eq!(clean_note("  \n\n "), "");
    }

    #[test]
    fn single_period_untouched() {
        assert_eq!(
            clean_note("denies ivdu. lives alone."),
            "denies ivdu. lives alone."
        );
        assert_eq!(clean_note("wait... ok -- done"), "wait ok done");
    }

    #[test]
    fn crlf_and_blank_lines_with_spaces() {
        assert_eq!(clean_note("a\r\n  \r\nb"), "a\nb");
    }

    proptest! {
        #[test]
        fn idempotent(raw in r#"[a-c .\-_\n\t,:;'"]{0,40}"#) {
            let once = clean_note(&raw);
            prop_assert_eq!(clean_note(&once), once.clone());
            prop_assert!(!once.contains("\n\n"));
            prop_assert!(!once.contains(".."));
            prop_assert!(!once.contains("--"));
            prop_assert!(!once.contains("__"));
        }
    }
}
