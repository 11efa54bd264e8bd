use std::collections::BTreeSet;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Porter-stems a single lowercase token.
pub fn stem_token(token: &str) -> String {
    stemmer().stem(token).into_owned()
}

/// Lowercased word tokens, split on non-alphanumerics.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
}

/// A token with its byte span in the original text. Words are lowercased;
/// punctuation characters are kept as single-character tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl SpanToken {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

/// Tokenizes while preserving byte offsets and punctuation, so callers can
/// slice clause spans back out of the raw text.
pub fn span_tokenize(raw: &str) -> Vec<SpanToken> {
    let mut out = Vec::new();
    let mut word_start: Option<usize> = None;
    for (pos, ch) in raw.char_indices() {
        if ch.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(pos);
            }
            continue;
        }
        if let Some(start) = word_start.take() {
            out.push(SpanToken {
                text: raw[start..pos].to_lowercase(),
                start,
                end: pos,
                kind: TokenKind::Word,
            });
        }
        if !ch.is_whitespace() {
            out.push(SpanToken {
                text: ch.to_string(),
                start: pos,
                end: pos + ch.len_utf8(),
                kind: TokenKind::Punct,
            });
        }
    }
    if let Some(start) = word_start {
        out.push(SpanToken {
            text: raw[start..].to_lowercase(),
            start,
            end: raw.len(),
            kind: TokenKind::Word,
        });
    }
    out
}

/// Tokenizes and normalizes one sentence.
///
/// Returns `(tokens, stems)`: tokens are all lowercase word tokens; stems are
/// the Porter stems of non-stopword tokens, in order. A stem that is itself a
/// stopword is dropped as well, so the stem list never contains stopwords.
pub fn preprocess_sentence(raw: &str, stopwords: &BTreeSet<String>) -> (Vec<String>, Vec<String>) {
    let tokens = tokenize(raw);
    let stems = tokens
        .iter()
        .filter(|t| !stopwords.contains(*t))
        .map(|t| stem_token(t))
        .filter(|s| !stopwords.contains(s))
        .collect();
    (tokens, stems)
}

/// Stems a normalized phrase into its non-empty stem sequence.
pub fn stem_phrase(phrase: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    preprocess_sentence(phrase, stopwords).1
}
