use serde::{Deserialize, Serialize};

/// One sentence of a source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    /// Position in the source text, contiguous from 0.
    pub index: usize,
    /// Byte offset of the sentence within the source.
    pub start: usize,
}

// Tokens that end in '.' without ending a sentence. Lowercased, final period
// removed. Company suffixes (inc, ltd, co) are left out on purpose: in
// practice they end sentences more often than not.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "fig", "e.g", "i.e",
    "approx", "dept", "est", "cf", "al",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{2019}', '\u{201d}'];

/// Splits text on `.`, `!` or `?` followed by whitespace or the end of text.
///
/// A lone period after a known abbreviation or a single-letter initial does
/// not end a sentence. Sentences are trimmed; empty ones are dropped.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut start: Option<usize> = None;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if start.is_none() && !c.is_whitespace() {
            start = Some(pos);
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i;
            let mut periods_only = true;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?') {
                periods_only &= chars[j].1 == '.';
                j += 1;
            }
            let run_len = j - i;
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let at_end = j == chars.len();
            let boundary = at_end || chars[j].1.is_whitespace();
            if boundary {
                let end = if at_end { text.len() } else { chars[j].0 };
                let guarded = !at_end
                    && periods_only
                    && run_len == 1
                    && is_abbreviation(&text[start.unwrap_or(pos)..pos]);
                if !guarded {
                    if let Some(s) = start.take() {
                        push(&mut out, text, s, end);
                    }
                }
            }
            i = j;
            continue;
        }
        i += 1;
    }
    if let Some(s) = start {
        push(&mut out, text, s, text.len());
    }
    out
}

fn push(out: &mut Vec<Sentence>, text: &str, start: usize, end: usize) {
    let raw = &text[start..end];
    let trimmed = raw.trim_end();
    if trimmed.is_empty() {
        return;
    }
    out.push(Sentence { text: trimmed.to_string(), index: out.len(), start });
}

fn is_abbreviation(before_period: &str) -> bool {
    let word = before_period.rsplit(char::is_whitespace).next().unwrap_or("");
    let word = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    let mut cs = word.chars();
    if let (Some(c), None) = (cs.next(), cs.clone().next()) {
        if c.is_uppercase() {
            return true;
        }
    }
    let lower = word.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}
