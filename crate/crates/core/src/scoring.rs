//! Directed causal-relation scoring between linguistic variables.
//!
//! The score of a pair is the difference of two evidence terms: the weighted
//! fraction of the first variable's values with cause-side evidence into the
//! second, minus the same term with the roles swapped. Each term lies in
//! [0, 1], so the signed score lies in [-1, 1] and classification bands
//! around zero are meaningful.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causaldb::GammaDB;
use crate::corpus::{EmbeddingStore, SimilarityError};
use crate::hypernymy::{LinguisticVariable, VariableStore};

/// How value-to-variable relevance is derived from cosine similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// `max(0, cos)` — higher similarity, higher weight (the default).
    Cosine,
    /// `clamp(1 - cos, 0, 1)` — the inverted variant.
    OneMinusCosine,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Cosine => write!(f, "cosine"),
            WeightMode::OneMinusCosine => write!(f, "one-minus-cosine"),
        }
    }
}

impl FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(WeightMode::Cosine),
            "one-minus-cosine" => Ok(WeightMode::OneMinusCosine),
            other => Err(format!("unknown weight mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    /// Decision threshold: scores in `[-mu, mu]` mean no relation.
    pub mu: f64,
    pub weight_mode: WeightMode,
    /// Both terms at or above this flag the pair as bi-directional.
    pub bidirectional_tau: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            mu: 0.05,
            weight_mode: WeightMode::Cosine,
            bidirectional_tau: 0.75,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(0.0..1.0).contains(&self.mu) {
            return Err(ScoringError::BadConfig(format!(
                "mu must lie in [0, 1), got {}",
                self.mu
            )));
        }
        if !(self.bidirectional_tau > 0.0 && self.bidirectional_tau <= 1.0) {
            return Err(ScoringError::BadConfig(format!(
                "bidirectional_tau must lie in (0, 1], got {}",
                self.bidirectional_tau
            )));
        }
        if self.bidirectional_tau <= self.mu {
            return Err(ScoringError::BadConfig(format!(
                "bidirectional_tau ({}) must exceed mu ({})",
                self.bidirectional_tau, self.mu
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationLabel {
    ACausesB,
    BCausesA,
    None,
}

impl RelationLabel {
    /// The integer form used by annotation files: 1, -1, 0.
    pub fn as_int(self) -> i8 {
        match self {
            RelationLabel::ACausesB => 1,
            RelationLabel::BCausesA => -1,
            RelationLabel::None => 0,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            RelationLabel::ACausesB => RelationLabel::BCausesA,
            RelationLabel::BCausesA => RelationLabel::ACausesB,
            RelationLabel::None => RelationLabel::None,
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationLabel::ACausesB => write!(f, "a-causes-b"),
            RelationLabel::BCausesA => write!(f, "b-causes-a"),
            RelationLabel::None => write!(f, "none"),
        }
    }
}

impl FromStr for RelationLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a-causes-b" => Ok(RelationLabel::ACausesB),
            "b-causes-a" => Ok(RelationLabel::BCausesA),
            "none" => Ok(RelationLabel::None),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// The scored relation between an ordered pair of variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CRScore {
    pub forward_term: f64,
    pub reverse_term: f64,
    /// `forward_term - reverse_term`, in [-1, 1].
    pub value: f64,
    pub label: RelationLabel,
    pub bidirectional: bool,
}

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("invalid scoring config: {0}")]
    BadConfig(String),
    #[error("variable `{0}` has zero total value weight; its term is undefined")]
    UndefinedTerm(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Relevance of a value to its variable under the chosen mode, in [0, 1].
pub fn value_weight(
    value: &str,
    variable: &str,
    embeddings: &EmbeddingStore,
    mode: WeightMode,
) -> Result<f64, SimilarityError> {
    let cos = embeddings.similarity(value, variable)?;
    Ok(match mode {
        WeightMode::Cosine => cos.clamp(0.0, 1.0),
        WeightMode::OneMinusCosine => (1.0 - cos).clamp(0.0, 1.0),
    })
}

/// The one-directional evidence term: of the weight mass of `vm`'s values,
/// the fraction carried by values with at least one cause-side link into a
/// value of `vn`. Per value the evidence is counted at most once, which keeps
/// the term in [0, 1].
pub fn directed_term(
    vm: &LinguisticVariable,
    vn: &LinguisticVariable,
    gamma: &GammaDB,
) -> Result<f64, ScoringError> {
    let total: f64 = vm.values.iter().map(|v| v.weight).sum();
    if total <= 0.0 {
        return Err(ScoringError::UndefinedTerm(vm.name.clone()));
    }
    let evidenced: f64 = vm
        .values
        .iter()
        .filter(|v| {
            vn.values
                .iter()
                .any(|u| gamma.contains_pair(&v.stems, &u.stems))
        })
        .map(|v| v.weight)
        .sum();
    // An empty sum is -0.0; adding 0.0 keeps the term's sign clean.
    Ok(evidenced / total + 0.0)
}

/// Thresholds a signed score into its relation band.
pub fn classify_relation(value: f64, mu: f64) -> Result<RelationLabel, ScoringError> {
    if !(0.0..1.0).contains(&mu) {
        return Err(ScoringError::OutOfRange(format!("mu = {mu}")));
    }
    if !(-1.0..=1.0).contains(&value) {
        return Err(ScoringError::OutOfRange(format!("score = {value}")));
    }
    Ok(if value > mu {
        RelationLabel::ACausesB
    } else if value < -mu {
        RelationLabel::BCausesA
    } else {
        RelationLabel::None
    })
}

/// Both directions carrying strong evidence marks a bi-directional pair.
pub fn detect_bidirectional(forward_term: f64, reverse_term: f64, tau: f64) -> bool {
    forward_term.min(reverse_term) >= tau
}

/// Scores an ordered pair of variables.
pub fn causal_relation(
    vm: &LinguisticVariable,
    vn: &LinguisticVariable,
    gamma: &GammaDB,
    config: &ScoringConfig,
) -> Result<CRScore, ScoringError> {
    config.validate()?;
    let forward_term = directed_term(vm, vn, gamma)?;
    let reverse_term = directed_term(vn, vm, gamma)?;
    let value = forward_term - reverse_term;
    Ok(CRScore {
        forward_term,
        reverse_term,
        value,
        label: classify_relation(value, config.mu)?,
        bidirectional: detect_bidirectional(forward_term, reverse_term, config.bidirectional_tau),
    })
}

/// One scored unordered pair, stored with `a < b` lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub a: String,
    pub b: String,
    pub score: CRScore,
}

/// Scores every unordered variable pair. Pairs whose terms are undefined
/// (zero weight mass) are skipped with a warning.
pub fn score_all_pairs(
    store: &VariableStore,
    gamma: &GammaDB,
    config: &ScoringConfig,
) -> Result<Vec<ScoredPair>, ScoringError> {
    config.validate()?;
    let names: Vec<&str> = store.names().collect();
    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            pairs.push((names[i], names[j]));
        }
    }
    let scored: Vec<Option<ScoredPair>> = pairs
        .par_iter()
        .map(|(a, b)| {
            let va = store.get(a).expect("name from store");
            let vb = store.get(b).expect("name from store");
            match causal_relation(va, vb, gamma, config) {
                Ok(score) => Some(ScoredPair {
                    a: a.to_string(),
                    b: b.to_string(),
                    score,
                }),
                Err(e) => {
                    log::warn!("skipping pair ({a}, {b}): {e}");
                    None
                }
            }
        })
        .collect();
    Ok(scored.into_iter().flatten().collect())
}

const TSV_HEADER: &str = "conceptA\tconceptB\tforward\treverse\tvalue\tlabel\tbidirectional";

/// Score dump, one row per unordered pair.
pub fn scores_to_tsv(scores: &[ScoredPair]) -> String {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for p in scores {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            p.a,
            p.b,
            p.score.forward_term,
            p.score.reverse_term,
            p.score.value,
            p.score.label,
            p.score.bidirectional
        ));
    }
    out
}

pub fn scores_from_tsv(text: &str) -> Result<Vec<ScoredPair>, ScoringError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != TSV_HEADER {
                return Err(ScoringError::OutOfRange(format!(
                    "unexpected score header `{line}`"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 7 {
            return Err(ScoringError::OutOfRange(format!(
                "line {}: expected 7 columns, found {}",
                i + 1,
                cols.len()
            )));
        }
        let parse_f = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| ScoringError::OutOfRange(format!("line {}: {e}", i + 1)))
        };
        out.push(ScoredPair {
            a: cols[0].to_string(),
            b: cols[1].to_string(),
            score: CRScore {
                forward_term: parse_f(cols[2])?,
                reverse_term: parse_f(cols[3])?,
                value: parse_f(cols[4])?,
                label: cols[5]
                    .parse()
                    .map_err(|e| ScoringError::OutOfRange(format!("line {}: {e}", i + 1)))?,
                bidirectional: cols[6] == "true",
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causaldb::{GammaDB, GammaEntry, MarkerKind, MarkerRef, Provenance};
    use crate::hypernymy::ValueEntry;
    use std::collections::BTreeSet;

    fn variable(name: &str, values: &[(&str, f64)]) -> LinguisticVariable {
        LinguisticVariable {
            name: name.to_string(),
            values: values
                .iter()
                .map(|(v, w)| ValueEntry {
                    value: v.to_string(),
                    count: 1,
                    plausibility: 1.0 / values.len() as f64,
                    weight: *w,
                    stems: vec![v.to_string()],
                })
                .collect(),
        }
    }

    fn gamma_of(pairs: &[(&str, &str)]) -> GammaDB {
        let entries: Vec<GammaEntry> = pairs
            .iter()
            .enumerate()
            .map(|(i, (c, e))| GammaEntry {
                cause_stems: BTreeSet::from([c.to_string()]),
                effect_stems: BTreeSet::from([e.to_string()]),
                marker: MarkerRef {
                    pattern: "causes".into(),
                    kind: MarkerKind::Verb,
                },
                provenance: Provenance {
                    doc: "d".into(),
                    idx: i,
                    prev_idx: None,
                },
            })
            .collect();
        GammaDB::from_entries(entries)
    }

    fn fixture_store(tokens: &[(&str, [f64; 2])]) -> EmbeddingStore {
        let mut store = EmbeddingStore::new(2);
        for (t, v) in tokens {
            store.insert(t, v.to_vec());
        }
        store
    }

    #[test]
    fn weight_identity_and_orthogonal() {
        let emb = fixture_store(&[("x", [1.0, 0.0]), ("y", [0.0, 1.0])]);
        assert_eq!(
            value_weight("x", "x", &emb, WeightMode::Cosine).unwrap(),
            1.0
        );
        assert_eq!(
            value_weight("x", "y", &emb, WeightMode::Cosine).unwrap(),
            0.0
        );
        assert_eq!(
            value_weight("x", "y", &emb, WeightMode::OneMinusCosine).unwrap(),
            1.0
        );
    }

    #[test]
    fn weight_modes_from_fixed_cosine() {
        // cos = 0.6 between (1, 0) and (0.6, 0.8).
        let emb = fixture_store(&[("a", [1.0, 0.0]), ("b", [0.6, 0.8])]);
        let w = value_weight("b", "a", &emb, WeightMode::Cosine).unwrap();
        assert!((w - 0.6).abs() < 1e-12);
        let w = value_weight("b", "a", &emb, WeightMode::OneMinusCosine).unwrap();
        assert!((w - 0.4).abs() < 1e-12);
    }

    #[test]
    fn weight_oov_is_error() {
        let emb = fixture_store(&[("a", [1.0, 0.0])]);
        assert!(value_weight("zzz", "a", &emb, WeightMode::Cosine).is_err());
    }

    #[test]
    fn directed_term_weighted_fraction() {
        let vm = variable("m", &[("v1", 1.0), ("v2", 0.5)]);
        let vn = variable("n", &[("u1", 1.0)]);
        let gamma = gamma_of(&[("v1", "u1")]);
        let term = directed_term(&vm, &vn, &gamma).unwrap();
        assert!((term - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn directed_term_empty_gamma_is_zero() {
        let vm = variable("m", &[("v1", 1.0)]);
        let vn = variable("n", &[("u1", 1.0)]);
        assert_eq!(directed_term(&vm, &vn, &gamma_of(&[])).unwrap(), 0.0);
    }

    #[test]
    fn directed_term_full_evidence_is_one() {
        let vm = variable("m", &[("v1", 0.9), ("v2", 0.4)]);
        let vn = variable("n", &[("u1", 1.0), ("u2", 0.2)]);
        let gamma = gamma_of(&[("v1", "u1"), ("v1", "u2"), ("v2", "u1"), ("v2", "u2")]);
        assert_eq!(directed_term(&vm, &vn, &gamma).unwrap(), 1.0);
    }

    #[test]
    fn directed_term_caps_multiple_links_per_value() {
        let vm = variable("m", &[("v1", 1.0)]);
        let vn = variable("n", &[("u1", 1.0), ("u2", 1.0)]);
        let gamma = gamma_of(&[("v1", "u1"), ("v1", "u2")]);
        assert_eq!(directed_term(&vm, &vn, &gamma).unwrap(), 1.0);
    }

    #[test]
    fn zero_weight_mass_is_undefined() {
        let vm = variable("m", &[("v1", 0.0)]);
        let vn = variable("n", &[("u1", 1.0)]);
        let err = directed_term(&vm, &vn, &gamma_of(&[])).unwrap_err();
        assert!(matches!(err, ScoringError::UndefinedTerm(_)));
    }

    #[test]
    fn relation_composes_terms() {
        let vm = variable("m", &[("v1", 1.0), ("v2", 0.5)]);
        let vn = variable("n", &[("u1", 1.0)]);
        let gamma = gamma_of(&[("v1", "u1")]);
        let cfg = ScoringConfig::default();
        let score = causal_relation(&vm, &vn, &gamma, &cfg).unwrap();
        assert!((score.value - 1.0 / 1.5).abs() < 1e-12);
        assert_eq!(score.label, RelationLabel::ACausesB);
        assert!(!score.bidirectional);
    }

    #[test]
    fn self_relation_without_self_pairs_is_zero() {
        let vm = variable("m", &[("v1", 1.0)]);
        let gamma = gamma_of(&[("x", "y")]);
        let score = causal_relation(&vm, &vm, &gamma, &ScoringConfig::default()).unwrap();
        assert_eq!(score.value, 0.0);
        assert_eq!(score.label, RelationLabel::None);
    }

    #[test]
    fn swapping_arguments_negates_exactly() {
        let vm = variable("m", &[("v1", 1.0), ("v2", 0.3)]);
        let vn = variable("n", &[("u1", 0.8), ("u2", 0.6)]);
        let gamma = gamma_of(&[("v1", "u1"), ("u2", "v2")]);
        let cfg = ScoringConfig::default();
        let ab = causal_relation(&vm, &vn, &gamma, &cfg).unwrap();
        let ba = causal_relation(&vn, &vm, &gamma, &cfg).unwrap();
        assert_eq!(ab.value, -ba.value);
        assert_eq!(ab.forward_term, ba.reverse_term);
        assert_eq!(ab.label, ba.label.mirror());
    }

    #[test]
    fn classify_bands() {
        assert_eq!(
            classify_relation(0.3, 0.05).unwrap(),
            RelationLabel::ACausesB
        );
        assert_eq!(classify_relation(0.05, 0.05).unwrap(), RelationLabel::None);
        assert_eq!(classify_relation(-0.05, 0.05).unwrap(), RelationLabel::None);
        assert_eq!(
            classify_relation(-1.0, 0.0).unwrap(),
            RelationLabel::BCausesA
        );
        assert_eq!(classify_relation(0.0, 0.0).unwrap(), RelationLabel::None);
        assert_eq!(
            classify_relation(1.0, 0.99).unwrap(),
            RelationLabel::ACausesB
        );
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert!(classify_relation(1.5, 0.05).is_err());
        assert!(classify_relation(0.5, 1.0).is_err());
        assert!(classify_relation(0.5, -0.1).is_err());
    }

    #[test]
    fn bidirectional_detection() {
        assert!(detect_bidirectional(0.9, 0.85, 0.75));
        assert!(!detect_bidirectional(1.0, 0.0, 0.75));
        assert!(!detect_bidirectional(1.0, 0.0, 1e-9));
        assert!(detect_bidirectional(1.0, 1.0, 1.0));
    }

    #[test]
    fn config_validation() {
        assert!(ScoringConfig::default().validate().is_ok());
        let bad = ScoringConfig {
            mu: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScoringConfig {
            bidirectional_tau: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScoringConfig {
            mu: 0.8,
            bidirectional_tau: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tsv_round_trip() {
        let vm = variable("alpha", &[("v1", 1.0), ("v2", 0.5)]);
        let vn = variable("beta", &[("u1", 1.0)]);
        let gamma = gamma_of(&[("v1", "u1")]);
        let cfg = ScoringConfig::default();
        let pairs = vec![ScoredPair {
            a: "alpha".into(),
            b: "beta".into(),
            score: causal_relation(&vm, &vn, &gamma, &cfg).unwrap(),
        }];
        let tsv = scores_to_tsv(&pairs);
        let back = scores_from_tsv(&tsv).unwrap();
        assert_eq!(pairs, back);
    }
}
