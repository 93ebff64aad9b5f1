use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A concept label: the stemmed, lowercase, whitespace-free key of a concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(s: impl Into<String>) -> Result<Self, Error> {
        let s = s.into();
        if s.is_empty() {
            return Err(Error::InvalidLabel { label: s, reason: "empty" });
        }
        if s.chars().any(char::is_whitespace) {
            return Err(Error::InvalidLabel { label: s, reason: "contains whitespace" });
        }
        if s.chars().any(char::is_uppercase) {
            return Err(Error::InvalidLabel { label: s, reason: "not lowercase" });
        }
        Ok(Label(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Label {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        Label::new(s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.0
    }
}

impl AsRef<str> for Label {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl PartialEq<str> for Label {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for Label {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Undirected edge key with endpoints in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    a: Label,
    b: Label,
}

impl EdgeKey {
    /// Canonicalizes the pair. Returns `None` for a self-pair.
    pub fn new(x: Label, y: Label) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(EdgeKey { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(EdgeKey { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn a(&self) -> &Label {
        &self.a
    }

    pub fn b(&self) -> &Label {
        &self.b
    }

    pub fn other(&self, end: &Label) -> Option<&Label> {
        if *end == self.a {
            Some(&self.b)
        } else if *end == self.b {
            Some(&self.a)
        } else {
            None
        }
    }
}
