use crate::corpus::{span_tokenize, Sentence, SpanToken};

use super::lexicon::{MarkerEntry, MarkerLexicon, MarkerOrder, MarkerScope};

/// One cause/effect extraction from a sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalSpan {
    pub cause: String,
    pub effect: String,
    pub marker: MarkerEntry,
    /// True when the cause side came from the previous sentence.
    pub used_previous: bool,
}

/// Splits a sentence into cause/effect text around causal markers. The
/// default implementation is marker-anchored; a dependency-parser based
/// splitter can be swapped in behind this trait.
pub trait ClauseSplitter: Send + Sync {
    fn split(
        &self,
        sentence: &Sentence,
        previous: Option<&Sentence>,
        lexicon: &MarkerLexicon,
    ) -> Vec<CausalSpan>;
}

// Tokens that flag a negated marker ("does not cause").
const NEGATIONS: &[&str] = &[
    "aren", "cannot", "couldn", "didn", "doesn", "don", "hadn", "hasn", "haven", "isn", "neither",
    "never", "no", "none", "nor", "not", "nothing", "shouldn", "wasn", "weren", "won", "wouldn",
];

fn is_clause_punct(text: &str) -> bool {
    matches!(text, "," | ";" | ":")
}

fn is_terminal_punct(text: &str) -> bool {
    matches!(text, "." | "!" | "?")
}

/// Marker-anchored splitter: the clause adjacent to each side of the marker,
/// trimmed at clause punctuation.
#[derive(Debug, Clone, Copy, Default)]
pub struct MarkerSplitter;

struct Occurrence<'a> {
    entry: &'a MarkerEntry,
    start: usize,
    end: usize,
}

fn find_occurrences<'a>(tokens: &[SpanToken], lexicon: &'a MarkerLexicon) -> Vec<Occurrence<'a>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !tokens[i].is_word() {
            i += 1;
            continue;
        }
        // Entries are sorted longest-first, so the first hit is maximal.
        let hit = lexicon.entries().iter().find(|entry| {
            let k = entry.pattern.len();
            i + k <= tokens.len()
                && tokens[i..i + k]
                    .iter()
                    .zip(&entry.pattern)
                    .all(|(tok, pat)| tok.is_word() && tok.text == *pat)
        });
        match hit {
            Some(entry) => {
                let end = i + entry.pattern.len();
                out.push(Occurrence {
                    entry,
                    start: i,
                    end,
                });
                i = end;
            }
            None => i += 1,
        }
    }
    out
}

fn negated(tokens: &[SpanToken], marker_start: usize) -> bool {
    tokens[marker_start.saturating_sub(3)..marker_start]
        .iter()
        .any(|t| t.is_word() && NEGATIONS.contains(&t.text.as_str()))
}

/// Renders the word span `[from, to)` back to raw text, trimming punctuation
/// at both edges. Returns None when no word token remains.
fn clause_text(raw: &str, tokens: &[SpanToken], from: usize, to: usize) -> Option<String> {
    let slice = &tokens[from..to.min(tokens.len())];
    let first = slice.iter().find(|t| t.is_word())?;
    let last = slice.iter().rev().find(|t| t.is_word())?;
    Some(raw[first.start..last.end].to_string())
}

/// The sub-span of `[from, to)` adjacent to the marker, cut at the nearest
/// clause punctuation. `before_marker` selects which end hugs the marker.
fn near_clause(
    from: usize,
    to: usize,
    tokens: &[SpanToken],
    before_marker: bool,
) -> (usize, usize) {
    if before_marker {
        let cut = (from..to)
            .rev()
            .find(|i| is_clause_punct(&tokens[*i].text))
            .map(|i| i + 1)
            .unwrap_or(from);
        (cut, to)
    } else {
        let cut = (from..to)
            .find(|i| is_clause_punct(&tokens[*i].text))
            .unwrap_or(to);
        (from, cut)
    }
}

fn trimmed_previous(previous: &Sentence) -> Option<String> {
    let toks = span_tokenize(&previous.raw);
    let last_word = toks.iter().rev().find(|t| t.is_word())?;
    let first_word = toks.iter().find(|t| t.is_word())?;
    Some(previous.raw[first_word.start..last_word.end].to_string())
}

impl ClauseSplitter for MarkerSplitter {
    fn split(
        &self,
        sentence: &Sentence,
        previous: Option<&Sentence>,
        lexicon: &MarkerLexicon,
    ) -> Vec<CausalSpan> {
        let raw = sentence.raw.as_str();
        let tokens = span_tokenize(raw);
        let mut spans = Vec::new();

        for occ in find_occurrences(&tokens, lexicon) {
            if negated(&tokens, occ.start) {
                continue;
            }
            // Skip punctuation hugging the marker.
            let mut left_end = occ.start;
            while left_end > 0 && !tokens[left_end - 1].is_word() {
                left_end -= 1;
            }
            let mut right_start = occ.end;
            while right_start < tokens.len()
                && !tokens[right_start].is_word()
                && !is_terminal_punct(&tokens[right_start].text)
            {
                right_start += 1;
            }

            let (lf, lt) = near_clause(0, left_end, &tokens, true);
            let left = clause_text(raw, &tokens, lf, lt);
            let (rf, rt) = near_clause(right_start, tokens.len(), &tokens, false);
            let right = clause_text(raw, &tokens, rf, rt);

            let span = match (left, right) {
                (Some(left), Some(right)) => match occ.entry.order {
                    MarkerOrder::CauseFirst => Some((left, right, false)),
                    MarkerOrder::EffectFirst => Some((right, left, false)),
                },
                (None, Some(right)) => {
                    // Sentence-initial marker: the missing side is either the
                    // previous sentence (inter-sentential markers) or the far
                    // clause after the first comma ("Because A, B").
                    if occ.entry.scope == MarkerScope::Inter {
                        match (previous.and_then(trimmed_previous), occ.entry.order) {
                            (Some(prev), MarkerOrder::CauseFirst) => Some((prev, right, true)),
                            (Some(prev), MarkerOrder::EffectFirst) => Some((right, prev, true)),
                            (None, _) => None,
                        }
                    } else if occ.entry.order == MarkerOrder::EffectFirst && rt < tokens.len() {
                        clause_text(raw, &tokens, rt + 1, tokens.len())
                            .map(|far| (right, far, false))
                    } else {
                        None
                    }
                }
                _ => None,
            };
            if let Some((cause, effect, used_previous)) = span {
                spans.push(CausalSpan {
                    cause,
                    effect,
                    marker: occ.entry.clone(),
                    used_previous,
                });
            }
        }
        spans
    }
}
