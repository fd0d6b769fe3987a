//! Alternation shorthand used throughout the lexicon.
//!
//! Phrase patterns expand at word granularity: `a/b` offers alternatives for
//! a single word and `stem(x/y)` appends optional suffixes (`stem`, `stemx`,
//! `stemy`). A backslash escapes the next character, so `h\/o` is the literal
//! word `h/o`. Question templates use `{a|b}` slots at phrase granularity.

use crate::error::{Error, Result};

/// Expands a phrase pattern into its lowercase, duplicate-free alternatives,
/// in cartesian order (first word varies slowest).
pub fn expand_phrase(pattern: &str) -> Result<Vec<String>> {
    let words: Vec<&str> = pattern.split_whitespace().collect();
    if words.is_empty() {
        return Err(pattern_error(pattern, "empty phrase"));
    }
    let mut expanded = vec![String::new()];
    for word in words {
        let alternatives = expand_word(word).map_err(|m| pattern_error(pattern, m))?;
        let mut next = Vec::with_capacity(expanded.len() * alternatives.len());
        for prefix in &expanded {
            for alt in &alternatives {
                if prefix.is_empty() {
                    next.push(alt.clone());
                } else {
                    next.push(format!("{prefix} {alt}"));
                }
            }
        }
        expanded = next;
    }
    let mut out: Vec<String> = Vec::with_capacity(expanded.len());
    for phrase in expanded {
        let phrase = phrase.to_lowercase();
        if !out.contains(&phrase) {
            out.push(phrase);
        }
    }
    Ok(out)
}

fn pattern_error(pattern: &str, message: impl Into<String>) -> Error {
    Error::Pattern {
        pattern: pattern.to_string(),
        message: message.into(),
    }
}

/// One word of a pattern, e.g. `inject(s/ed)` or `iv/intravenous`.
fn expand_word(word: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    for alternative in split_top_level(word)? {
        for form in expand_suffixes(&alternative)? {
            if !out.contains(&form) {
                out.push(form);
            }
        }
    }
    Ok(out)
}

/// Splits on `/` outside parentheses, keeping escapes intact for the next pass.
fn split_top_level(word: &str) -> std::result::Result<Vec<String>, String> {
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    let mut chars = word.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let escaped = chars.next().ok_or("dangling escape")?;
                current.push('\\');
                current.push(escaped);
            }
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or("unbalanced `)`")?;
                current.push(c);
            }
            '/' if depth == 0 => {
                if current.is_empty() {
                    return Err("empty alternative".into());
                }
                parts.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if depth != 0 {
        return Err("unbalanced `(`".into());
    }
    if current.is_empty() {
        return Err("empty alternative".into());
    }
    parts.push(current);
    Ok(parts)
}

/// Expands `stem(a/b)tail` groups; several groups multiply out.
fn expand_suffixes(alternative: &str) -> std::result::Result<Vec<String>, String> {
    let mut forms = vec![String::new()];
    let mut chars = alternative.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let escaped = chars.next().ok_or("dangling escape")?;
                forms.iter_mut().for_each(|f| f.push(escaped));
            }
            '(' => {
                let mut group = String::new();
                let mut closed = false;
                while let Some(g) = chars.next() {
                    match g {
                        ')' => {
                            closed = true;
                            break;
                        }
                        '(' => return Err("nested `(` in suffix group".into()),
                        '\\' => group.push(chars.next().ok_or("dangling escape")?),
                        _ => group.push(g),
                    }
                }
                if !closed {
                    return Err("unbalanced `(`".into());
                }
                let suffixes: Vec<&str> = group.split('/').collect();
                if suffixes.iter().any(|s| s.is_empty()) {
                    return Err("empty suffix".into());
                }
                let mut next = Vec::with_capacity(forms.len() * (suffixes.len() + 1));
                for form in &forms {
                    next.push(form.clone());
                    for suffix in &suffixes {
                        next.push(format!("{form}{suffix}"));
                    }
                }
                forms = next;
            }
            ')' => return Err("unbalanced `)`".into()),
            _ => forms.iter_mut().for_each(|f| f.push(c)),
        }
    }
    if forms.iter().any(|f| f.is_empty()) {
        return Err("empty word".into());
    }
    Ok(forms)
}

/// Escapes a literal phrase so that `expand_phrase` returns it unchanged.
pub fn escape_phrase(phrase: &str) -> String {
    let mut out = String::with_capacity(phrase.len());
    for c in phrase.chars() {
        if matches!(c, '/' | '(' | ')' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Expands `{a|b}` slots of a question template. Text outside slots is kept
/// verbatim (case included).
pub fn expand_template(template: &str) -> Result<Vec<String>> {
    let err = |m: &str| pattern_error(template, m);
    let mut segments: Vec<Vec<String>> = Vec::new();
    let mut literal = String::new();
    let mut chars = template.chars();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                if !literal.is_empty() {
                    segments.push(vec![std::mem::take(&mut literal)]);
                }
                let mut slot = String::new();
                let mut closed = false;
                for s in chars.by_ref() {
                    match s {
                        '}' => {
                            closed = true;
                            break;
                        }
                        '{' => return Err(err("nested `{` in template")),
                        _ => slot.push(s),
                    }
                }
                if !closed {
                    return Err(err("unbalanced `{`"));
                }
                segments.push(slot.split('|').map(str::to_string).collect());
            }
            '}' => return Err(err("unbalanced `}`")),
            _ => literal.push(c),
        }
    }
    if !literal.is_empty() {
        segments.push(vec![literal]);
    }

    let mut questions = vec![String::new()];
    for options in &segments {
        let mut next = Vec::with_capacity(questions.len() * options.len());
        for prefix in &questions {
            for option in options {
                next.push(format!("{prefix}{option}"));
            }
        }
        questions = next;
    }
    let questions: Vec<String> = questions
        .into_iter()
        .map(|q| q.split_whitespace().collect::<Vec<_>>().join(" "))
        .collect();
    if let Some(bad) = questions.iter().find(|q| q.is_empty() || !q.ends_with('?')) {
        return Err(pattern_error(
            template,
            format!("expanded question `{bad}` is empty or does not end with `?`"),
        ));
    }
    Ok(questions)
}
