//! IsA (hypernym-hyponym) pair extraction and linguistic variable assembly.
//!
//! Variables are hypernym phrases; their values are the hyponyms observed for
//! them, weighted by embedding similarity. Extraction is pattern-based with
//! per-variable normalized plausibility.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{span_tokenize, stem_phrase, CorpusStore, EmbeddingStore, SpanToken};
use crate::scoring::{value_weight, WeightMode};

/// One observed hypernym-hyponym pair, aggregated over the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsAPair {
    pub variable: String,
    pub value: String,
    pub count: u64,
    /// `count / Σ count` over all values of the same variable.
    pub plausibility: f64,
}

/// A value of a linguistic variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEntry {
    pub value: String,
    pub count: u64,
    pub plausibility: f64,
    /// Relevance of the value to its variable; see [`crate::scoring::value_weight`].
    pub weight: f64,
    /// Stemmed, stopword-free form used for evidence matching.
    pub stems: Vec<String>,
}

/// A concept: a variable name plus its weighted value set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticVariable {
    pub name: String,
    pub values: Vec<ValueEntry>,
}

impl LinguisticVariable {
    pub fn value_phrases(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|v| v.value.as_str())
    }
}

/// All extracted variables, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableStore {
    pub variables: BTreeMap<String, LinguisticVariable>,
}

impl VariableStore {
    pub fn get(&self, name: &str) -> Option<&LinguisticVariable> {
        self.variables.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(|k| k.as_str())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternPart {
    VariableSlot,
    ValueSlot,
    Anchor,
}

/// A template like `X such as Y`: a variable slot, literal anchor tokens, and
/// a value slot, in either order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTemplate {
    /// Lowercased anchor tokens between the two slots.
    anchors: Vec<String>,
    /// True when the variable slot precedes the anchors.
    variable_first: bool,
    source: String,
}

#[derive(Debug, Clone)]
pub struct PatternSet {
    templates: Vec<PatternTemplate>,
}

impl PatternSet {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: bad pattern `{text}`: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
        msg: String,
    },
    #[error("empty pattern set")]
    Empty,
}

fn parse_template(line: &str) -> Result<PatternTemplate, String> {
    let mut parts: Vec<(PatternPart, String)> = Vec::new();
    for tok in span_tokenize(line) {
        if tok.is_word() {
            match tok.text.as_str() {
                "x" => parts.push((PatternPart::VariableSlot, String::new())),
                "y" => parts.push((PatternPart::ValueSlot, String::new())),
                w => parts.push((PatternPart::Anchor, w.to_string())),
            }
        } else {
            parts.push((PatternPart::Anchor, tok.text));
        }
    }
    if parts.len() < 3 {
        return Err("need two slots and at least one anchor token".into());
    }
    let first = parts.first().unwrap().0;
    let last = parts.last().unwrap().0;
    let slots_ok = matches!(
        (first, last),
        (PatternPart::VariableSlot, PatternPart::ValueSlot)
            | (PatternPart::ValueSlot, PatternPart::VariableSlot)
    );
    if !slots_ok {
        return Err("X and Y must be the first and last tokens".into());
    }
    let anchors: Vec<String> = parts[1..parts.len() - 1]
        .iter()
        .map(|(p, t)| {
            if *p == PatternPart::Anchor {
                Ok(t.clone())
            } else {
                Err("X and Y may appear only once, at the ends".to_string())
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(PatternTemplate {
        anchors,
        variable_first: first == PatternPart::VariableSlot,
        source: line.trim().to_string(),
    })
}

/// The built-in pattern inventory.
pub fn default_patterns() -> PatternSet {
    let lines = [
        "X such as Y",
        "X including Y",
        "X , especially Y",
        "Y and other X",
        "Y or other X",
        "Y is a X",
        "Y is an X",
    ];
    PatternSet {
        templates: lines.iter().map(|l| parse_template(l).unwrap()).collect(),
    }
}

/// Loads one pattern template per line; `#` starts a comment.
pub fn load_patterns(path: &Path) -> Result<PatternSet, PatternError> {
    let content = std::fs::read_to_string(path).map_err(|source| PatternError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut templates = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tpl = parse_template(line).map_err(|msg| PatternError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            text: line.to_string(),
            msg,
        })?;
        templates.push(tpl);
    }
    if templates.is_empty() {
        return Err(PatternError::Empty);
    }
    Ok(PatternSet { templates })
}

// Tokens that terminate a noun-phrase run and may join coordinated values.
fn is_coordinator(text: &str) -> bool {
    matches!(text, "and" | "or" | ",")
}

/// Collects the noun-phrase run adjacent to an anchor: the longest contiguous
/// run of non-stopword word tokens, capped at `cap`. With `expand`, runs
/// joined by `and`/`or`/`,` yield additional phrases (one per conjunct).
fn collect_runs(
    tokens: &[SpanToken],
    start: isize,
    step: isize,
    stopwords: &BTreeSet<String>,
    cap: usize,
    expand: bool,
) -> Vec<Vec<String>> {
    let take_run = |from: isize| -> (Vec<String>, isize) {
        let mut run = Vec::new();
        let mut i = from;
        while i >= 0 && (i as usize) < tokens.len() && run.len() < cap {
            let tok = &tokens[i as usize];
            if !tok.is_word() || is_coordinator(&tok.text) || stopwords.contains(&tok.text) {
                break;
            }
            run.push(tok.text.clone());
            i += step;
        }
        if step < 0 {
            run.reverse();
        }
        (run, i)
    };

    let mut phrases = Vec::new();
    let (first, mut next) = take_run(start);
    if first.is_empty() {
        return phrases;
    }
    phrases.push(first);
    if expand {
        // One coordinator token, then another run; repeat while that holds.
        loop {
            if next < 0 || next as usize >= tokens.len() {
                break;
            }
            let tok = &tokens[next as usize];
            if !is_coordinator(&tok.text) {
                break;
            }
            let (run, after) = take_run(next + step);
            if run.is_empty() {
                break;
            }
            phrases.push(run);
            next = after;
        }
    }
    phrases
}

/// Naive depluralization of the head (last) token of a hypernym phrase, so
/// "mental disorders" and "mental disorder" name the same variable.
fn singularize_head(phrase_tokens: &[String]) -> String {
    let mut tokens = phrase_tokens.to_vec();
    if let Some(last) = tokens.last_mut() {
        *last = singularize(last);
    }
    tokens.join(" ")
}

fn singularize(word: &str) -> String {
    let n = word.len();
    if n >= 4 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if word.ends_with("sses")
        || word.ends_with("shes")
        || word.ends_with("ches")
        || word.ends_with("xes")
        || word.ends_with("zes")
    {
        return word[..n - 2].to_string();
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    if n >= 3 && word.ends_with('s') {
        return word[..n - 1].to_string();
    }
    word.to_string()
}

fn match_sentence(
    tokens: &[SpanToken],
    patterns: &PatternSet,
    stopwords: &BTreeSet<String>,
) -> Vec<(String, String)> {
    const PHRASE_CAP: usize = 3;
    let mut pairs = Vec::new();
    for tpl in &patterns.templates {
        let k = tpl.anchors.len();
        if tokens.len() < k + 2 {
            continue;
        }
        for i in 1..=(tokens.len() - k).saturating_sub(1) {
            let window = &tokens[i..i + k];
            if !window
                .iter()
                .zip(&tpl.anchors)
                .all(|(tok, anchor)| tok.text == *anchor)
            {
                continue;
            }
            let before = i as isize - 1;
            let after = (i + k) as isize;
            let (var_phrases, val_phrases) = if tpl.variable_first {
                (
                    collect_runs(tokens, before, -1, stopwords, PHRASE_CAP, false),
                    collect_runs(tokens, after, 1, stopwords, PHRASE_CAP, true),
                )
            } else {
                (
                    collect_runs(tokens, after, 1, stopwords, PHRASE_CAP, false),
                    collect_runs(tokens, before, -1, stopwords, PHRASE_CAP, true),
                )
            };
            let Some(var_tokens) = var_phrases.first() else {
                continue;
            };
            let variable = singularize_head(var_tokens);
            for val_tokens in &val_phrases {
                let value = val_tokens.join(" ");
                if variable != value && !variable.is_empty() && !value.is_empty() {
                    pairs.push((variable.clone(), value));
                }
            }
        }
    }
    pairs
}

/// Scans the corpus for pattern matches and aggregates them into counted,
/// plausibility-normalized pairs sorted by `(variable, count desc, value)`.
pub fn extract_isa_pairs(
    corpus: &CorpusStore,
    patterns: &PatternSet,
    stopwords: &BTreeSet<String>,
) -> Vec<IsAPair> {
    let sentences: Vec<&str> = corpus.sentences().map(|(_, s)| s.raw.as_str()).collect();
    let counts: BTreeMap<(String, String), u64> = sentences
        .par_iter()
        .map(|raw| {
            let tokens = span_tokenize(raw);
            let mut local = BTreeMap::new();
            for pair in match_sentence(&tokens, patterns, stopwords) {
                *local.entry(pair).or_insert(0u64) += 1;
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let mut totals: BTreeMap<&String, u64> = BTreeMap::new();
    for ((var, _), count) in &counts {
        *totals.entry(var).or_insert(0) += count;
    }
    let mut pairs: Vec<IsAPair> = counts
        .iter()
        .map(|((var, val), count)| IsAPair {
            variable: var.clone(),
            value: val.clone(),
            count: *count,
            plausibility: *count as f64 / totals[var] as f64,
        })
        .collect();
    pairs.sort_by(|a, b| {
        a.variable
            .cmp(&b.variable)
            .then(b.count.cmp(&a.count))
            .then(a.value.cmp(&b.value))
    });
    pairs
}

/// Filters pairs by the count/plausibility thresholds, attaches similarity
/// weights, and drops values that cannot be embedded or stemmed.
pub fn build_variable_store(
    pairs: &[IsAPair],
    min_count: u64,
    min_plausibility: f64,
    embeddings: &EmbeddingStore,
    mode: WeightMode,
    stopwords: &BTreeSet<String>,
) -> VariableStore {
    let mut variables = BTreeMap::new();
    let mut grouped: BTreeMap<&str, Vec<&IsAPair>> = BTreeMap::new();
    for pair in pairs {
        if pair.count >= min_count && pair.plausibility >= min_plausibility {
            grouped.entry(&pair.variable).or_default().push(pair);
        }
    }
    for (name, group) in grouped {
        let mut values = Vec::new();
        let mut seen = BTreeSet::new();
        for pair in group {
            if !seen.insert(pair.value.as_str()) {
                continue;
            }
            let stems = stem_phrase(&pair.value, stopwords);
            if stems.is_empty() {
                log::warn!(
                    "dropping value `{}` of `{name}`: no usable stems",
                    pair.value
                );
                continue;
            }
            match value_weight(&pair.value, name, embeddings, mode) {
                Ok(weight) => values.push(ValueEntry {
                    value: pair.value.clone(),
                    count: pair.count,
                    plausibility: pair.plausibility,
                    weight,
                    stems,
                }),
                Err(e) => log::warn!("dropping value `{}` of `{name}`: {e}", pair.value),
            }
        }
        if !values.is_empty() {
            variables.insert(
                name.to_string(),
                LinguisticVariable {
                    name: name.to_string(),
                    values,
                },
            );
        }
    }
    VariableStore { variables }
}

/// Writes the store as one JSON object per line.
pub fn store_to_jsonl(store: &VariableStore) -> String {
    let mut out = String::new();
    for var in store.variables.values() {
        out.push_str(&serde_json::to_string(var).expect("variable serializes"));
        out.push('\n');
    }
    out
}

/// Parses the JSONL form written by [`store_to_jsonl`].
pub fn store_from_jsonl(text: &str) -> Result<VariableStore, serde_json::Error> {
    let mut variables = BTreeMap::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let var: LinguisticVariable = serde_json::from_str(line)?;
        variables.insert(var.name.clone(), var);
    }
    Ok(VariableStore { variables })
}
