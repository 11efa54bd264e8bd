//! The cause-effect evidence database mined from causal markers.
//!
//! Every marker hit yields one entry with normalized stem sets for the cause
//! and effect sides. The database answers single-stem directed counts and
//! conjunctive containment queries for multiword value phrases.

mod lexicon;
mod splitter;

pub use lexicon::{
    compile_marker_lexicon, LexiconError, MarkerEntry, MarkerKind, MarkerLexicon, MarkerOrder,
    MarkerScope,
};
pub use splitter::{CausalSpan, ClauseSplitter, MarkerSplitter};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess_sentence, CorpusStore};

/// The marker that produced an entry, reduced to its identifying fields.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkerRef {
    pub pattern: String,
    pub kind: MarkerKind,
}

/// Where an entry came from: the sentence, plus the previous sentence index
/// when the cause side was inter-sentential.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub doc: String,
    pub idx: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prev_idx: Option<usize>,
}

/// One cause → effect observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub cause_stems: BTreeSet<String>,
    pub effect_stems: BTreeSet<String>,
    pub marker: MarkerRef,
    pub provenance: Provenance,
}

/// The evidence database: entries plus lookup indexes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaDB {
    entries: Vec<GammaEntry>,
    pair_index: BTreeMap<(String, String), u64>,
    cause_postings: HashMap<String, Vec<u32>>,
    effect_postings: HashMap<String, Vec<u32>>,
}

impl GammaDB {
    /// Builds the indexes over a fixed entry list.
    pub fn from_entries(mut entries: Vec<GammaEntry>) -> Self {
        entries.sort_by(|a, b| {
            a.provenance.cmp(&b.provenance).then_with(|| {
                (&a.marker, &a.cause_stems, &a.effect_stems).cmp(&(
                    &b.marker,
                    &b.cause_stems,
                    &b.effect_stems,
                ))
            })
        });
        let mut pair_index = BTreeMap::new();
        let mut cause_postings: HashMap<String, Vec<u32>> = HashMap::new();
        let mut effect_postings: HashMap<String, Vec<u32>> = HashMap::new();
        for (id, entry) in entries.iter().enumerate() {
            for c in &entry.cause_stems {
                cause_postings.entry(c.clone()).or_default().push(id as u32);
                for e in &entry.effect_stems {
                    *pair_index.entry((c.clone(), e.clone())).or_insert(0) += 1;
                }
            }
            for e in &entry.effect_stems {
                effect_postings
                    .entry(e.clone())
                    .or_default()
                    .push(id as u32);
            }
        }
        GammaDB {
            entries,
            pair_index,
            cause_postings,
            effect_postings,
        }
    }

    pub fn entries(&self) -> &[GammaEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pair_index(&self) -> &BTreeMap<(String, String), u64> {
        &self.pair_index
    }

    /// Directed occurrence count for a single (cause stem, effect stem) pair.
    pub fn gamma_count(&self, cause: &str, effect: &str) -> u64 {
        self.pair_index
            .get(&(cause.to_string(), effect.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Number of entries whose cause side contains all `cause_stems` and
    /// whose effect side contains all `effect_stems`.
    pub fn conjunctive_count(&self, cause_stems: &[String], effect_stems: &[String]) -> u64 {
        if cause_stems.is_empty() || effect_stems.is_empty() {
            return 0;
        }
        let mut candidates: Option<Vec<u32>> = None;
        for (stems, postings) in [
            (cause_stems, &self.cause_postings),
            (effect_stems, &self.effect_postings),
        ] {
            for stem in stems {
                let Some(list) = postings.get(stem) else {
                    return 0;
                };
                candidates = Some(match candidates {
                    None => list.clone(),
                    Some(cur) => intersect_sorted_u32(&cur, list),
                });
                if candidates.as_ref().is_some_and(|c| c.is_empty()) {
                    return 0;
                }
            }
        }
        candidates.map(|c| c.len() as u64).unwrap_or(0)
    }

    /// Conjunctive membership: the multiword reading of `(cause, effect) ∈ Γ`.
    pub fn contains_pair(&self, cause_stems: &[String], effect_stems: &[String]) -> bool {
        self.conjunctive_count(cause_stems, effect_stems) > 0
    }
}

fn intersect_sorted_u32(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Splits one sentence around causal markers with the default
/// marker-anchored splitter.
pub fn split_cause_effect(
    sentence: &crate::corpus::Sentence,
    previous: Option<&crate::corpus::Sentence>,
    lexicon: &MarkerLexicon,
) -> Vec<CausalSpan> {
    MarkerSplitter.split(sentence, previous, lexicon)
}

/// Mines the whole corpus with the default marker-anchored splitter.
pub fn build_gamma(
    corpus: &CorpusStore,
    lexicon: &MarkerLexicon,
    stopwords: &BTreeSet<String>,
) -> GammaDB {
    build_gamma_with(corpus, &MarkerSplitter, lexicon, stopwords)
}

/// Mines the corpus with a caller-provided clause splitter.
pub fn build_gamma_with(
    corpus: &CorpusStore,
    splitter: &dyn ClauseSplitter,
    lexicon: &MarkerLexicon,
    stopwords: &BTreeSet<String>,
) -> GammaDB {
    let per_doc: Vec<Vec<GammaEntry>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let mut entries = Vec::new();
            for (i, sentence) in doc.sentences.iter().enumerate() {
                let previous = if i > 0 {
                    Some(&doc.sentences[i - 1])
                } else {
                    None
                };
                for span in splitter.split(sentence, previous, lexicon) {
                    let cause_stems: BTreeSet<String> = preprocess_sentence(&span.cause, stopwords)
                        .1
                        .into_iter()
                        .collect();
                    let effect_stems: BTreeSet<String> =
                        preprocess_sentence(&span.effect, stopwords)
                            .1
                            .into_iter()
                            .collect();
                    if cause_stems.is_empty() || effect_stems.is_empty() {
                        continue;
                    }
                    entries.push(GammaEntry {
                        cause_stems,
                        effect_stems,
                        marker: MarkerRef {
                            pattern: span.marker.pattern_text(),
                            kind: span.marker.kind,
                        },
                        provenance: Provenance {
                            doc: doc.id.clone(),
                            idx: sentence.idx,
                            prev_idx: span.used_previous.then(|| sentence.idx - 1),
                        },
                    });
                }
            }
            entries
        })
        .collect();
    GammaDB::from_entries(per_doc.into_iter().flatten().collect())
}

/// One entry per line.
pub fn gamma_to_jsonl(db: &GammaDB) -> String {
    let mut out = String::new();
    for entry in db.entries() {
        out.push_str(&serde_json::to_string(entry).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn gamma_from_jsonl(text: &str) -> Result<GammaDB, serde_json::Error> {
    let mut entries = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str(line)?);
    }
    Ok(GammaDB::from_entries(entries))
}

/// The sidecar count index, sorted for stable output.
#[derive(Debug, Serialize, Deserialize)]
pub struct GammaIndex {
    pub n_entries: usize,
    pub pairs: Vec<GammaIndexRow>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GammaIndexRow {
    pub cause: String,
    pub effect: String,
    pub count: u64,
}

pub fn gamma_index(db: &GammaDB) -> GammaIndex {
    GammaIndex {
        n_entries: db.len(),
        pairs: db
            .pair_index()
            .iter()
            .map(|((cause, effect), count)| GammaIndexRow {
                cause: cause.clone(),
                effect: effect.clone(),
                count: *count,
            })
            .collect(),
    }
}

#[cfg(test)]
pub(crate) fn test_lexicon() -> MarkerLexicon {
    let rows = "\
because\tdiscourse\teffect-first\tintra
since\tdiscourse\teffect-first\tintra
therefore\tdiscourse\tcause-first\tinter
thus\tdiscourse\tcause-first\tinter
as a result\tdiscourse\tcause-first\tinter
cause\tverb\tcause-first\tintra
causes\tverb\tcause-first\tintra
caused\tverb\tcause-first\tintra
caused by\tverb\teffect-first\tintra
leads to\tverb\tcause-first\tintra
lead to\tverb\tcause-first\tintra
led to\tverb\tcause-first\tintra
triggers\tverb\tcause-first\tintra
";
    MarkerLexicon::parse(rows, std::path::Path::new("test.tsv")).unwrap()
}
