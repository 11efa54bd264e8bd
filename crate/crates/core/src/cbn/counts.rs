use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CbnError;
use crate::corpus::CorpusStore;
use crate::hypernymy::VariableStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CooccurrenceUnit {
    Sentence,
    Document,
}

impl fmt::Display for CooccurrenceUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CooccurrenceUnit::Sentence => write!(f, "sentence"),
            CooccurrenceUnit::Document => write!(f, "document"),
        }
    }
}

impl FromStr for CooccurrenceUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sentence" => Ok(CooccurrenceUnit::Sentence),
            "document" => Ok(CooccurrenceUnit::Document),
            other => Err(format!("unknown co-occurrence unit `{other}`")),
        }
    }
}

/// Term and term-pair occurrence counts over corpus units. Pair keys are
/// unordered (stored with the lexicographically smaller term first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceCounts {
    pub unit: CooccurrenceUnit,
    pub n_units: u64,
    singles: BTreeMap<String, u64>,
    pairs: BTreeMap<(String, String), u64>,
}

fn pair_key(x: &str, y: &str) -> (String, String) {
    if x <= y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

impl CooccurrenceCounts {
    /// Builds counts from raw maps; pair keys are normalized to unordered.
    pub fn from_raw(
        unit: CooccurrenceUnit,
        n_units: u64,
        singles: BTreeMap<String, u64>,
        pairs: BTreeMap<(String, String), u64>,
    ) -> Self {
        let mut norm = BTreeMap::new();
        for ((x, y), c) in pairs {
            *norm.entry(pair_key(&x, &y)).or_insert(0) += c;
        }
        CooccurrenceCounts {
            unit,
            n_units,
            singles,
            pairs: norm,
        }
    }

    pub fn single(&self, term: &str) -> u64 {
        self.singles.get(term).copied().unwrap_or(0)
    }

    pub fn pair(&self, x: &str, y: &str) -> u64 {
        self.pairs.get(&pair_key(x, y)).copied().unwrap_or(0)
    }

    pub fn p_single(&self, term: &str) -> f64 {
        self.single(term) as f64 / self.n_units as f64
    }

    pub fn p_pair(&self, x: &str, y: &str) -> f64 {
        self.pair(x, y) as f64 / self.n_units as f64
    }
}

/// Counts value-phrase occurrences per unit. A term occurs in a unit when all
/// of its stems appear in the unit's stem set.
pub fn count_cooccurrences(
    corpus: &CorpusStore,
    store: &VariableStore,
    unit: CooccurrenceUnit,
) -> CooccurrenceCounts {
    // One entry per distinct value phrase; values repeated across variables
    // share stems, so first write wins.
    let mut terms: BTreeMap<&str, &[String]> = BTreeMap::new();
    for var in store.variables.values() {
        for v in &var.values {
            terms.entry(v.value.as_str()).or_insert(&v.stems);
        }
    }

    let unit_stem_sets: Vec<BTreeSet<&str>> = match unit {
        CooccurrenceUnit::Sentence => corpus
            .sentences()
            .map(|(_, s)| s.stems.iter().map(|x| x.as_str()).collect())
            .collect(),
        CooccurrenceUnit::Document => corpus
            .documents
            .iter()
            .map(|d| {
                d.sentences
                    .iter()
                    .flat_map(|s| s.stems.iter().map(|x| x.as_str()))
                    .collect()
            })
            .collect(),
    };

    let (singles, pairs) = unit_stem_sets
        .par_iter()
        .map(|stems| {
            let contained: Vec<&str> = terms
                .iter()
                .filter(|(_, term_stems)| term_stems.iter().all(|s| stems.contains(s.as_str())))
                .map(|(term, _)| *term)
                .collect();
            let mut singles = BTreeMap::new();
            let mut pairs = BTreeMap::new();
            for t in &contained {
                singles.insert(t.to_string(), 1u64);
            }
            for i in 0..contained.len() {
                for j in (i + 1)..contained.len() {
                    pairs.insert(pair_key(contained[i], contained[j]), 1u64);
                }
            }
            (singles, pairs)
        })
        .reduce(
            || (BTreeMap::new(), BTreeMap::new()),
            |(mut s1, mut p1), (s2, p2)| {
                for (k, v) in s2 {
                    *s1.entry(k).or_insert(0) += v;
                }
                for (k, v) in p2 {
                    *p1.entry(k).or_insert(0) += v;
                }
                (s1, p1)
            },
        );

    CooccurrenceCounts {
        unit,
        n_units: unit_stem_sets.len() as u64,
        singles,
        pairs,
    }
}

/// Normalized pointwise mutual information from probabilities. Conventions:
/// a zero joint maps to -1, a joint of one maps to +1 (the limit of the raw
/// expression, which is 0/0 there).
pub fn npmi_from_probs(px: f64, py: f64, pxy: f64) -> f64 {
    if pxy <= 0.0 {
        return -1.0;
    }
    if pxy >= 1.0 {
        return 1.0;
    }
    (pxy / (px * py)).ln() / -pxy.ln()
}

/// NPMI of two terms under the given counts, in [-1, 1].
pub fn npmi(x: &str, y: &str, counts: &CooccurrenceCounts) -> Result<f64, CbnError> {
    let (px, py) = (counts.p_single(x), counts.p_single(y));
    if px <= 0.0 {
        return Err(CbnError::UndefinedProbability(x.to_string()));
    }
    if py <= 0.0 {
        return Err(CbnError::UndefinedProbability(y.to_string()));
    }
    Ok(npmi_from_probs(px, py, counts.p_pair(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_corpus, IngestConfig};
    use crate::hypernymy::{LinguisticVariable, ValueEntry};
    use std::io::Write;

    fn store_with(values: &[&str]) -> VariableStore {
        let mut store = VariableStore::default();
        store.variables.insert(
            "concept".into(),
            LinguisticVariable {
                name: "concept".into(),
                values: values
                    .iter()
                    .map(|v| ValueEntry {
                        value: v.to_string(),
                        count: 1,
                        plausibility: 1.0 / values.len() as f64,
                        weight: 1.0,
                        stems: crate::corpus::preprocess_sentence(v, &BTreeSet::new()).1,
                    })
                    .collect(),
            },
        );
        store
    }

    fn corpus_of(text: &str) -> CorpusStore {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        ingest_corpus(&[path], &IngestConfig::new(BTreeSet::new())).unwrap()
    }

    #[test]
    fn counts_four_sentence_fixture() {
        let corpus = corpus_of(
            "Stress rises. Insomnia worsens. Stress brings insomnia tonight. Nothing happens.",
        );
        let store = store_with(&["stress", "insomnia"]);
        let counts = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Sentence);
        assert_eq!(counts.n_units, 4);
        assert_eq!(counts.single("stress"), 2);
        assert_eq!(counts.single("insomnia"), 2);
        assert_eq!(counts.pair("stress", "insomnia"), 1);
        assert!((counts.p_single("stress") - 0.5).abs() < 1e-12);
        assert!((counts.p_pair("stress", "insomnia") - 0.25).abs() < 1e-12);
    }

    #[test]
    fn absent_term_counts_zero() {
        let corpus = corpus_of("Stress rises.");
        let store = store_with(&["stress", "ghost"]);
        let counts = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Sentence);
        assert_eq!(counts.single("ghost"), 0);
    }

    #[test]
    fn pair_lookup_is_symmetric() {
        let corpus = corpus_of("Stress brings insomnia.");
        let store = store_with(&["stress", "insomnia"]);
        let counts = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Sentence);
        assert_eq!(
            counts.pair("stress", "insomnia"),
            counts.pair("insomnia", "stress")
        );
    }

    #[test]
    fn document_unit_pools_sentences() {
        let corpus = corpus_of("Stress rises. Insomnia worsens.");
        let store = store_with(&["stress", "insomnia"]);
        let by_sentence = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Sentence);
        let by_doc = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Document);
        assert_eq!(by_sentence.pair("stress", "insomnia"), 0);
        assert_eq!(by_doc.pair("stress", "insomnia"), 1);
        assert_eq!(by_doc.n_units, 1);
    }

    #[test]
    fn multiword_terms_use_conjunctive_containment() {
        let corpus = corpus_of("Eating disorders are rising. Disorders are rising.");
        let store = store_with(&["eating disorder"]);
        let counts = count_cooccurrences(&corpus, &store, CooccurrenceUnit::Sentence);
        assert_eq!(counts.single("eating disorder"), 1);
    }

    #[test]
    fn npmi_zero_at_independence() {
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            4,
            BTreeMap::from([("x".into(), 2), ("y".into(), 2)]),
            BTreeMap::from([(("x".into(), "y".into()), 1)]),
        );
        assert!(npmi("x", "y", &counts).unwrap().abs() < 1e-12);
    }

    #[test]
    fn npmi_one_at_perfect_cooccurrence() {
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            4,
            BTreeMap::from([("x".into(), 2), ("y".into(), 2)]),
            BTreeMap::from([(("x".into(), "y".into()), 2)]),
        );
        assert!((npmi("x", "y", &counts).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    #[allow(clippy::approx_constant)] // the frozen oracle value happens to be -log10(2)
    fn npmi_matches_hand_computation() {
        // p(x)=0.5, p(y)=0.4, p(x,y)=0.1 -> ln(0.5)/-ln(0.1)
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            10,
            BTreeMap::from([("x".into(), 5), ("y".into(), 4)]),
            BTreeMap::from([(("x".into(), "y".into()), 1)]),
        );
        let expect = (0.5f64).ln() / -(0.1f64).ln();
        assert!((npmi("x", "y", &counts).unwrap() - expect).abs() < 1e-12);
        assert!((expect + 0.3010).abs() < 1e-4);
    }

    #[test]
    fn npmi_conventions_at_boundaries() {
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            4,
            BTreeMap::from([("x".into(), 2), ("y".into(), 2), ("z".into(), 4)]),
            BTreeMap::from([(("z".into(), "z2".into()), 0)]),
        );
        assert_eq!(npmi("x", "y", &counts).unwrap(), -1.0);
        // Joint of one only arises when both marginals are one.
        let full = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            3,
            BTreeMap::from([("x".into(), 3), ("y".into(), 3)]),
            BTreeMap::from([(("x".into(), "y".into()), 3)]),
        );
        assert_eq!(npmi("x", "y", &full).unwrap(), 1.0);
    }

    #[test]
    fn npmi_zero_marginal_is_error() {
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            4,
            BTreeMap::from([("x".into(), 2)]),
            BTreeMap::new(),
        );
        assert!(matches!(
            npmi("x", "ghost", &counts),
            Err(CbnError::UndefinedProbability(_))
        ));
    }
}
