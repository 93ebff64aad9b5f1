//! Rule-based noun identification.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sentences::Sentence;
use crate::error::Error;

/// A token classified as a noun.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenOccurrence {
    /// Surface form after punctuation and possessive stripping.
    pub token: String,
    /// Index of the token within its sentence (whitespace tokenization).
    pub position: usize,
    /// Index of the containing sentence.
    pub sentence: usize,
}

/// Anything that can pick the nouns out of a sentence.
pub trait NounTagger: Send + Sync {
    fn tag(&self, sentence: &Sentence) -> Vec<TokenOccurrence>;
}

/// A set of lowercase tokens loaded from a one-per-line text file.
#[derive(Debug, Clone, Default)]
pub struct Lexicon(HashSet<String>);

impl Lexicon {
    /// Parses one token per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Lexicon(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

const NOUN_SUFFIXES: &[&str] =
    &["tion", "ment", "ness", "ity", "er", "or", "ism", "ist", "ance", "ence"];

/// Deterministic noun tagger driven by a capitalization heuristic, noun
/// suffixes and two lexicons.
///
/// A token is a noun when it is not in the exclusion lexicon and either
/// starts with an uppercase letter, or is lowercase and is listed in the
/// common-noun lexicon or carries a noun suffix.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    exclusions: Lexicon,
    nouns: Lexicon,
}

pub(crate) const BUNDLED_EXCLUSIONS: &str = include_str!("../../assets/exclusion.txt");
pub(crate) const BUNDLED_NOUNS: &str = include_str!("../../assets/nouns.txt");

impl Default for LexiconTagger {
    fn default() -> Self {
        Self::new(Lexicon::parse(BUNDLED_EXCLUSIONS), Lexicon::parse(BUNDLED_NOUNS))
    }
}

impl LexiconTagger {
    pub fn new(exclusions: Lexicon, nouns: Lexicon) -> Self {
        Self { exclusions, nouns }
    }

    pub fn exclusions(&self) -> &Lexicon {
        &self.exclusions
    }

    pub fn nouns(&self) -> &Lexicon {
        &self.nouns
    }

    /// Classifies a single cleaned token.
    pub fn is_noun(&self, token: &str) -> bool {
        let Some(first) = token.chars().next() else {
            return false;
        };
        if !first.is_alphabetic() {
            return false;
        }
        let lower = token.to_lowercase();
        if self.exclusions.contains(&lower) {
            return false;
        }
        if first.is_uppercase() {
            return true;
        }
        if self.nouns.contains(&lower) {
            return true;
        }
        token.chars().all(|c| c.is_lowercase() || c == '-')
            && NOUN_SUFFIXES
                .iter()
                .any(|s| lower.len() >= s.len() + 3 && lower.ends_with(s))
    }
}

impl NounTagger for LexiconTagger {
    fn tag(&self, sentence: &Sentence) -> Vec<TokenOccurrence> {
        tokenize(&sentence.text)
            .into_iter()
            .enumerate()
            .filter(|(_, t)| self.is_noun(t))
            .map(|(position, token)| TokenOccurrence { token, position, sentence: sentence.index })
            .collect()
    }
}

/// Whitespace tokenization with surrounding punctuation and possessives
/// removed. Internal hyphens and apostrophes survive. Tokens that are pure
/// punctuation come back empty so positions stay aligned with the raw split.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(clean_token).collect()
}

fn clean_token(raw: &str) -> String {
    let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
    let t = t
        .strip_suffix("'s")
        .or_else(|| t.strip_suffix("\u{2019}s"))
        .or_else(|| t.strip_suffix("'S"))
        .unwrap_or(t);
    t.trim_end_matches(['\'', '\u{2019}']).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nouns(text: &str) -> Vec<String> {
        let s = Sentence { text: text.into(), index: 0, start: 0 };
        LexiconTagger::default().tag(&s).into_iter().map(|o| o.token).collect()
    }

    #[test]
    fn proper_nouns_and_verbs() {
        assert_eq!(nouns("Brandon works for Cisco."), vec!["Brandon", "Cisco"]);
    }

    #[test]
    fn closed_class_only() {
        assert!(nouns("is the").is_empty());
        assert!(nouns("Is it?").is_empty());
    }

    #[test]
    fn possessive_stripping() {
        let n = nouns("Brandon's favorite color is green.");
        assert!(n.contains(&"Brandon".to_string()));
        assert!(n.contains(&"color".to_string()));
        assert!(!n.contains(&"favorite".to_string()));
        assert_eq!(nouns("Brailen's brother's name is Kyle."), vec!["Brailen", "brother", "name", "Kyle"]);
    }

    #[test]
    fn suffix_rules() {
        assert_eq!(nouns("the nationality of the adjustment"), vec!["nationality", "adjustment"]);
        // too short for the suffix rule, or excluded
        assert!(nouns("never ever list other").is_empty());
    }

    #[test]
    fn sentence_initial_question_words_excluded() {
        assert_eq!(nouns("Where does Brandon work?"), vec!["Brandon"]);
        assert_eq!(nouns("List everyone that works for Cisco?"), vec!["Cisco"]);
        assert_eq!(nouns("I think Brandon left."), vec!["Brandon"]);
    }

    #[test]
    fn appendix_statements() {
        assert_eq!(
            nouns("Brandon used to work at PENCIL Inc, although he no longer works there."),
            vec!["Brandon", "PENCIL", "Inc"]
        );
        assert_eq!(
            nouns("Brandon broke his leg in a car crash when he was 10-years-old."),
            vec!["Brandon", "leg", "car", "crash"]
        );
        assert_eq!(
            nouns("Brandon doesn't like rock music anymore and now loves house music."),
            vec!["Brandon", "rock", "music", "house", "music"]
        );
    }

    #[test]
    fn tokenize_keeps_positions() {
        assert_eq!(tokenize("Hi -- there's ok."), vec!["Hi", "", "there", "ok"]);
        assert_eq!(tokenize("state-of-the-art"), vec!["state-of-the-art"]);
    }

    #[test]
    fn lexicon_parsing() {
        let l = Lexicon::parse("# header\nfoo\n\n  Bar  # trailing\n");
        assert!(l.contains("foo") && l.contains("bar"));
        assert_eq!(l.len(), 2);
    }
}
