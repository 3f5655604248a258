//! Word tokenization.
//!
//! Text is split on whitespace, then leading and trailing punctuation is
//! peeled off each chunk one character at a time. Inner punctuation
//! ("don't", "U.S") stays attached. Matching elsewhere in the crate works on
//! [`Token::norm`], the lowercased surface form; there is no stemming.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub norm: String,
    pub index: usize,
}

/// A tokenized piece of text in one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub lang: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Segment {
    pub fn new(id: impl Into<String>, lang: impl Into<String>, raw: impl Into<String>) -> Self {
        let lang = lang.into();
        let raw = raw.into();
        let tokens = tokenize(&raw, &lang);
        Segment {
            id: id.into(),
            lang,
            raw,
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn norms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.norm.as_str()).collect()
    }
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits `raw` into tokens. The language tag is accepted for interface
/// stability; no language-specific rules are applied.
pub fn tokenize(raw: &str, _lang: &str) -> Vec<Token> {
    let mut surfaces: Vec<&str> = Vec::new();
    for chunk in raw.split_whitespace() {
        let mut rest = chunk;
        let mut lead = Vec::new();
        while let Some(c) = rest.chars().next().filter(|&c| is_punct(c)) {
            lead.push(&rest[..c.len_utf8()]);
            rest = &rest[c.len_utf8()..];
        }
        let mut trail = Vec::new();
        while let Some(c) = rest.chars().next_back().filter(|&c| is_punct(c)) {
            let at = rest.len() - c.len_utf8();
            trail.push(&rest[at..]);
            rest = &rest[..at];
        }
        surfaces.extend(lead);
        if !rest.is_empty() {
            surfaces.push(rest);
        }
        surfaces.extend(trail.into_iter().rev());
    }
    surfaces
        .into_iter()
        .enumerate()
        .map(|(index, s)| Token {
            surface: s.to_string(),
            norm: s.to_lowercase(),
            index,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(raw: &str) -> Vec<String> {
        tokenize(raw, "en").into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn splits_trailing_comma() {
        let toks = tokenize("Hello, world", "en");
        let s: Vec<_> = toks.iter().map(|t| t.surface.as_str()).collect();
        let n: Vec<_> = toks.iter().map(|t| t.norm.as_str()).collect();
        assert_eq!(s, ["Hello", ",", "world"]);
        assert_eq!(n, ["hello", ",", "world"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("", "en").is_empty());
        assert!(tokenize("   \t\n", "en").is_empty());
    }

    #[test]
    fn case_folding() {
        let toks = tokenize("A a A", "en");
        assert_eq!(toks.len(), 3);
        for (i, t) in toks.iter().enumerate() {
            assert_eq!(t.norm, "a");
            assert_eq!(t.index, i);
        }
    }

    #[test]
    fn punctuation_on_both_sides() {
        assert_eq!(surfaces("(Hallo)."), ["(", "Hallo", ")", "."]);
        assert_eq!(surfaces("don't U.S."), ["don't", "U.S", "."]);
        assert_eq!(surfaces("--"), ["-", "-"]);
        assert_eq!(surfaces("„Straße“"), ["„", "Straße", "“"]);
    }

    proptest! {
        #[test]
        fn rejoin_is_idempotent(raw in "[a-zA-Z0-9,.!?'()\\- ]{0,40}") {
            let first = tokenize(&raw, "en");
            let joined = first.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
            let second = tokenize(&joined, "en");
            prop_assert_eq!(first, second);
        }

        #[test]
        fn norms_and_indices(raw in "\\PC{0,30}") {
            let toks = tokenize(&raw, "und");
            for (i, t) in toks.iter().enumerate() {
                prop_assert_eq!(t.index, i);
                prop_assert_eq!(&t.norm, &t.surface.to_lowercase());
                prop_assert!(!t.surface.is_empty());
            }
        }
    }
}
