//! Word tokenizer shared by matching, statistics, and the negation test.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Word-boundary rules.
///
/// A word is a maximal run of alphanumeric characters. An apostrophe
/// (straight or typographic) between two alphanumerics stays inside the
/// word and is normalized to `'`, so `don't` and `DON’T` both yield `don't`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tokenizer {
    pub lowercase: bool,
    /// When false, every other non-space character becomes its own token.
    pub strip_punctuation: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

/// A token with the byte range it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub bytes: Range<usize>,
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}')
}

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.tokenize_with_offsets(text)
            .into_iter()
            .map(|t| t.text)
            .collect()
    }

    pub fn tokenize_with_offsets(&self, text: &str) -> Vec<Token> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let end_of = |k: usize| chars.get(k).map_or(text.len(), |&(b, _)| b);
        let mut out = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let (start, c) = chars[k];
            if c.is_alphanumeric() {
                let mut word = String::new();
                let mut j = k;
                while j < chars.len() {
                    let cj = chars[j].1;
                    if cj.is_alphanumeric() {
                        self.push_char(&mut word, cj);
                    } else if is_apostrophe(cj)
                        && chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric())
                    {
                        word.push('\'');
                    } else {
                        break;
                    }
                    j += 1;
                }
                out.push(Token {
                    text: word,
                    bytes: start..end_of(j),
                });
                k = j;
            } else {
                if !self.strip_punctuation && !c.is_whitespace() {
                    let mut s = String::new();
                    self.push_char(&mut s, c);
                    out.push(Token {
                        text: s,
                        bytes: start..end_of(k + 1),
                    });
                }
                k += 1;
            }
        }
        out
    }

    fn push_char(&self, buf: &mut String, c: char) {
        if self.lowercase {
            buf.extend(c.to_lowercase());
        } else {
            buf.push(c);
        }
    }
}

/// Lexical negation: the word `not` or any `n't` contraction.
pub fn is_negation(token: &str) -> bool {
    token == "not" || token.ends_with("n't")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(s: &str) -> Vec<String> {
        Tokenizer::default().tokenize(s)
    }

    #[test]
    fn default_rules() {
        assert_eq!(
            tok("It's the right thing to do."),
            ["it's", "the", "right", "thing", "to", "do"]
        );
        assert!(tok("").is_empty());
        assert_eq!(tok("don't -- DON'T"), ["don't", "don't"]);
    }

    #[test]
    fn typographic_apostrophe_and_edges() {
        assert_eq!(tok("Don\u{2019}t 'quote' students'"), ["don't", "quote", "students"]);
        assert_eq!(tok("well-known 2014"), ["well", "known", "2014"]);
    }

    #[test]
    fn offsets_cover_source() {
        let text = "Yes, we \u{201C}can\u{201D}!";
        let toks = Tokenizer::default().tokenize_with_offsets(text);
        let words: Vec<&str> = toks.iter().map(|t| &text[t.bytes.clone()]).collect();
        assert_eq!(words, ["Yes", "we", "can"]);
    }

    #[test]
    fn punctuation_kept_when_asked() {
        let t = Tokenizer {
            lowercase: false,
            strip_punctuation: false,
        };
        assert_eq!(t.tokenize("Hi, you."), ["Hi", ",", "you", "."]);
    }

    #[test]
    fn negation_rule() {
        assert!(is_negation("not"));
        assert!(is_negation("don't"));
        assert!(is_negation("can't"));
        assert!(!is_negation("nothing"));
        assert!(!is_negation("knot"));
    }

    proptest! {
        #[test]
        fn deterministic_and_clean(s in "\\PC{0,80}") {
            let a = tok(&s);
            prop_assert_eq!(&a, &tok(&s));
            for w in &a {
                prop_assert!(!w.is_empty());
                prop_assert!(!w.starts_with('\'') && !w.ends_with('\''));
                prop_assert!(!w.chars().any(char::is_whitespace));
            }
        }
    }
}
