//! Evaluation harness: annotated-tuple scoring, accuracy and macro-F1,
//! threshold sweeps, heuristic direction baselines, and inter-annotator
//! agreement.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causaldb::GammaDB;
use crate::cbn::npmi_from_probs;
use crate::corpus::CorpusStore;
use crate::hypernymy::VariableStore;
use crate::scoring::{classify_relation, ScoredPair};

/// A gold tuple: 1 means A causes B, -1 means B causes A, 0 means neither.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTuple {
    pub concept_a: String,
    pub concept_b: String,
    pub label: i8,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("no gold tuples to evaluate")]
    EmptyGold,
    #[error("invalid rating matrix: {0}")]
    BadRatings(String),
    #[error("invalid threshold grid: {0}")]
    BadGrid(String),
}

/// Reads `conceptA<TAB>conceptB<TAB>label` rows. Exact duplicate pairs are
/// rejected; a reversed duplicate is allowed but warned about when its label
/// does not mirror.
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotatedTuple>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let err = |line: usize, msg: String| EvalError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut tuples: Vec<AnnotatedTuple> = Vec::new();
    let mut seen: BTreeMap<(String, String), i8> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(err(
                lineno,
                format!("expected 3 columns, found {}", cols.len()),
            ));
        }
        let label: i8 = cols[2]
            .parse()
            .ok()
            .filter(|l| [-1, 0, 1].contains(l))
            .ok_or_else(|| {
                err(
                    lineno,
                    format!("label must be -1, 0 or 1, got `{}`", cols[2]),
                )
            })?;
        let key = (cols[0].to_string(), cols[1].to_string());
        if seen.contains_key(&key) {
            return Err(err(
                lineno,
                format!("duplicate pair ({}, {})", cols[0], cols[1]),
            ));
        }
        if let Some(mirror) = seen.get(&(key.1.clone(), key.0.clone())) {
            if *mirror != -label {
                log::warn!(
                    "{}:{lineno}: ({}, {}) disagrees with its mirrored row",
                    path.display(),
                    cols[0],
                    cols[1]
                );
            }
        }
        seen.insert(key, label);
        tuples.push(AnnotatedTuple {
            concept_a: cols[0].to_string(),
            concept_b: cols[1].to_string(),
            label,
        });
    }
    Ok(tuples)
}

/// Three-class evaluation over labels {-1, 0, 1}. Confusion rows are gold,
/// columns are predictions, both in label order -1, 0, 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: u64,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: [f64; 3],
    pub confusion: [[u64; 3]; 3],
    /// Gold pairs with no prediction; they were scored as 0.
    pub missing_predictions: u64,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("tuples evaluated : {}\n", self.total));
        out.push_str(&format!("accuracy         : {:.4}\n", self.accuracy));
        out.push_str(&format!("macro F1         : {:.4}\n", self.macro_f1));
        out.push_str(&format!(
            "per-class F1     : -1: {:.4}  0: {:.4}  1: {:.4}\n",
            self.per_class_f1[0], self.per_class_f1[1], self.per_class_f1[2]
        ));
        out.push_str("confusion (rows gold -1/0/1, cols predicted -1/0/1):\n");
        for row in &self.confusion {
            out.push_str(&format!("  {:>6} {:>6} {:>6}\n", row[0], row[1], row[2]));
        }
        if self.missing_predictions > 0 {
            out.push_str(&format!(
                "missing predictions treated as 0: {}\n",
                self.missing_predictions
            ));
        }
        out
    }
}

fn label_index(label: i8) -> usize {
    (label + 1) as usize
}

/// Scores predictions against gold tuples. A gold pair without a prediction
/// counts as predicted 0 and is tallied in `missing_predictions`.
pub fn evaluate(
    predictions: &BTreeMap<(String, String), i8>,
    gold: &[AnnotatedTuple],
) -> Result<EvalReport, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let mut confusion = [[0u64; 3]; 3];
    let mut missing = 0u64;
    for tuple in gold {
        let key = (tuple.concept_a.clone(), tuple.concept_b.clone());
        let pred = match predictions.get(&key) {
            Some(p) => *p,
            None => {
                missing += 1;
                0
            }
        };
        confusion[label_index(tuple.label)][label_index(pred)] += 1;
    }
    let total = gold.len() as u64;
    let trace: u64 = (0..3).map(|i| confusion[i][i]).sum();
    let mut per_class_f1 = [0.0; 3];
    for c in 0..3 {
        let tp = confusion[c][c] as f64;
        let gold_c: u64 = confusion[c].iter().sum();
        let pred_c: u64 = (0..3).map(|g| confusion[g][c]).sum();
        let precision = if pred_c > 0 { tp / pred_c as f64 } else { 0.0 };
        let recall = if gold_c > 0 { tp / gold_c as f64 } else { 0.0 };
        per_class_f1[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    Ok(EvalReport {
        total,
        accuracy: trace as f64 / total as f64,
        macro_f1: per_class_f1.iter().sum::<f64>() / 3.0,
        per_class_f1,
        confusion,
        missing_predictions: missing,
    })
}

/// Classifies cached score values at `mu` into predictions for both pair
/// orientations.
pub fn predictions_from_scores(
    scores: &[ScoredPair],
    mu: f64,
) -> Result<BTreeMap<(String, String), i8>, EvalError> {
    let mut out = BTreeMap::new();
    for pair in scores {
        let label = classify_relation(pair.score.value, mu)
            .map_err(|e| EvalError::BadGrid(e.to_string()))?
            .as_int();
        out.insert((pair.a.clone(), pair.b.clone()), label);
        out.insert((pair.b.clone(), pair.a.clone()), -label);
    }
    Ok(out)
}

/// The most frequent gold label; ties prefer 0, then 1, then -1.
pub fn majority_label(gold: &[AnnotatedTuple]) -> i8 {
    let mut counts: BTreeMap<i8, u64> = BTreeMap::new();
    for t in gold {
        *counts.entry(t.label).or_insert(0) += 1;
    }
    let mut best = 0i8;
    let mut best_count = 0u64;
    for label in [0i8, 1, -1] {
        let c = counts.get(&label).copied().unwrap_or(0);
        if c > best_count {
            best = label;
            best_count = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub report: EvalReport,
}

/// A threshold sweep over cached scores plus the constant majority baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSweep {
    pub points: Vec<SweepPoint>,
    pub majority_label: i8,
    pub majority_f1: f64,
}

/// Re-classifies the cached score values at every grid threshold; no
/// re-scoring happens. The majority baseline is constant across the grid.
pub fn sweep_mu(
    scores: &[ScoredPair],
    gold: &[AnnotatedTuple],
    grid: &[f64],
) -> Result<MuSweep, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::BadGrid("empty grid".into()));
    }
    for mu in grid {
        if !(0.0..1.0).contains(mu) {
            return Err(EvalError::BadGrid(format!("mu {mu} outside [0, 1)")));
        }
    }
    let majority = majority_label(gold);
    let majority_predictions: BTreeMap<(String, String), i8> = gold
        .iter()
        .map(|t| ((t.concept_a.clone(), t.concept_b.clone()), majority))
        .collect();
    let majority_f1 = evaluate(&majority_predictions, gold)?.macro_f1;

    let mut points = Vec::with_capacity(grid.len());
    for &mu in grid {
        let predictions = predictions_from_scores(scores, mu)?;
        points.push(SweepPoint {
            mu,
            report: evaluate(&predictions, gold)?,
        });
    }
    Ok(MuSweep {
        points,
        majority_label: majority,
        majority_f1,
    })
}

/// Plot-ready TSV: `mu<TAB>macro_f1<TAB>majority_f1`.
pub fn sweep_to_tsv(sweep: &MuSweep) -> String {
    let mut out = String::from("mu\tmacro_f1\tmajority_f1\n");
    for p in &sweep.points {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            p.mu, p.report.macro_f1, sweep.majority_f1
        ));
    }
    out
}

/// Direction labels from the four heuristic baselines for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineLabels {
    pub a: String,
    pub b: String,
    pub frequency: i8,
    pub precedence: i8,
    pub pmi: i8,
    pub prec_pmi: i8,
}

fn compare_scores(forward: f64, backward: f64) -> i8 {
    if forward > backward {
        1
    } else if forward < backward {
        -1
    } else {
        0
    }
}

/// Per-unit concept occurrence statistics for the baseline heuristics.
struct ConceptStats {
    n_units: u64,
    singles: BTreeMap<String, u64>,
    cooccur: BTreeMap<(String, String), u64>,
    ordered: BTreeMap<(String, String), u64>,
}

fn concept_stats(
    corpus: &CorpusStore,
    store: &VariableStore,
    concepts: &BTreeSet<String>,
) -> ConceptStats {
    let mut singles = BTreeMap::new();
    let mut cooccur = BTreeMap::new();
    let mut ordered = BTreeMap::new();
    let mut n_units = 0u64;
    for (_, sentence) in corpus.sentences() {
        n_units += 1;
        // First mention position of each concept, via any of its values.
        let mut positions: BTreeMap<&str, usize> = BTreeMap::new();
        for name in concepts {
            let Some(var) = store.get(name) else { continue };
            let mut best: Option<usize> = None;
            for value in &var.values {
                let contained = value
                    .stems
                    .iter()
                    .all(|s| sentence.stems.iter().any(|t| t == s));
                if !contained {
                    continue;
                }
                let first = value
                    .stems
                    .iter()
                    .filter_map(|s| sentence.stems.iter().position(|t| t == s))
                    .min()
                    .unwrap_or(usize::MAX);
                best = Some(best.map_or(first, |b: usize| b.min(first)));
            }
            if let Some(pos) = best {
                positions.insert(name.as_str(), pos);
            }
        }
        for name in positions.keys() {
            *singles.entry(name.to_string()).or_insert(0) += 1;
        }
        let present: Vec<(&str, usize)> = positions.iter().map(|(n, p)| (*n, *p)).collect();
        for i in 0..present.len() {
            for j in 0..present.len() {
                if i == j {
                    continue;
                }
                let (x, px) = present[i];
                let (y, py) = present[j];
                if x < y {
                    *cooccur.entry((x.to_string(), y.to_string())).or_insert(0) += 1;
                }
                if px < py {
                    *ordered.entry((x.to_string(), y.to_string())).or_insert(0) += 1;
                }
            }
        }
    }
    ConceptStats {
        n_units,
        singles,
        cooccur,
        ordered,
    }
}

/// Reconstructed heuristic baselines. Each computes a directed strength both
/// ways and labels by comparison, with ties resolving to 0.
///
/// - frequency: directed evidence mass between the concepts' values;
/// - precedence: units where the first concept is mentioned first;
/// - PMI: symmetric NPMI, direction borrowed from precedence;
/// - prec-PMI: NPMI computed over ordered co-mentions.
pub fn heuristic_baselines(
    gamma: &GammaDB,
    corpus: &CorpusStore,
    store: &VariableStore,
    pairs: &[(String, String)],
) -> Vec<BaselineLabels> {
    let concepts: BTreeSet<String> = pairs
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    let stats = concept_stats(corpus, store, &concepts);
    let n = stats.n_units as f64;

    pairs
        .iter()
        .map(|(a, b)| {
            let (va, vb) = (store.get(a), store.get(b));
            let (mut s_ab, mut s_ba) = (0u64, 0u64);
            if let (Some(va), Some(vb)) = (va, vb) {
                for x in &va.values {
                    for y in &vb.values {
                        s_ab += gamma.conjunctive_count(&x.stems, &y.stems);
                        s_ba += gamma.conjunctive_count(&y.stems, &x.stems);
                    }
                }
            }
            let frequency = compare_scores(s_ab as f64, s_ba as f64);

            let ord_ab = stats
                .ordered
                .get(&(a.clone(), b.clone()))
                .copied()
                .unwrap_or(0);
            let ord_ba = stats
                .ordered
                .get(&(b.clone(), a.clone()))
                .copied()
                .unwrap_or(0);
            let precedence = compare_scores(ord_ab as f64, ord_ba as f64);

            let pa = stats.singles.get(a).copied().unwrap_or(0) as f64 / n;
            let pb = stats.singles.get(b).copied().unwrap_or(0) as f64 / n;
            let key = if a < b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            };
            let pab = stats.cooccur.get(&key).copied().unwrap_or(0) as f64 / n;
            let pmi = if pa > 0.0 && pb > 0.0 && npmi_from_probs(pa, pb, pab) > 0.0 {
                precedence
            } else {
                0
            };

            let prec_pmi = if pa > 0.0 && pb > 0.0 {
                let fwd = npmi_from_probs(pa, pb, ord_ab as f64 / n);
                let bwd = npmi_from_probs(pa, pb, ord_ba as f64 / n);
                compare_scores(fwd, bwd)
            } else {
                0
            };

            BaselineLabels {
                a: a.clone(),
                b: b.clone(),
                frequency,
                precedence,
                pmi,
                prec_pmi,
            }
        })
        .collect()
}

/// Fleiss' kappa over an items × categories count matrix. Every item must be
/// rated by the same number of raters (n >= 2).
pub fn fleiss_kappa(ratings: &[Vec<u64>]) -> Result<f64, EvalError> {
    if ratings.is_empty() {
        return Err(EvalError::BadRatings("no items".into()));
    }
    let categories = ratings[0].len();
    if categories == 0 {
        return Err(EvalError::BadRatings("no categories".into()));
    }
    let n: u64 = ratings[0].iter().sum();
    if n < 2 {
        return Err(EvalError::BadRatings(format!(
            "need at least 2 raters per item, got {n}"
        )));
    }
    for (i, row) in ratings.iter().enumerate() {
        if row.len() != categories {
            return Err(EvalError::BadRatings(format!(
                "item {i} has {} categories, expected {categories}",
                row.len()
            )));
        }
        let total: u64 = row.iter().sum();
        if total != n {
            return Err(EvalError::BadRatings(format!(
                "item {i} has {total} ratings, expected {n}"
            )));
        }
    }

    let items = ratings.len() as f64;
    let nf = n as f64;
    let p_bar: f64 = ratings
        .iter()
        .map(|row| {
            let sq: u64 = row.iter().map(|c| c * c).sum();
            (sq as f64 - nf) / (nf * (nf - 1.0))
        })
        .sum::<f64>()
        / items;
    let pe_bar: f64 = (0..categories)
        .map(|j| {
            let col: u64 = ratings.iter().map(|row| row[j]).sum();
            let p = col as f64 / (items * nf);
            p * p
        })
        .sum();

    // Unanimous single-category matrices have no chance-corrected room left;
    // agreement is perfect by construction.
    if (1.0 - pe_bar).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((p_bar - pe_bar) / (1.0 - pe_bar))
}
