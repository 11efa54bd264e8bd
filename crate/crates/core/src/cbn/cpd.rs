use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::counts::{npmi_from_probs, CooccurrenceCounts};
use super::CbnError;
use crate::hypernymy::LinguisticVariable;

/// One conditional distribution row: given one value per parent (in parent
/// order), the probabilities over the child's values (in value order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpdRow {
    pub given: Vec<String>,
    pub probs: Vec<f64>,
}

/// The conditional probability table of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CPDTable {
    pub variable: String,
    pub parents: Vec<String>,
    pub values: Vec<String>,
    pub rows: Vec<CpdRow>,
}

impl CPDTable {
    /// Probability of `value` given the parent assignment of `given`.
    pub fn prob(&self, value: &str, given: &[String]) -> Result<f64, CbnError> {
        let vi =
            self.values
                .iter()
                .position(|v| v == value)
                .ok_or_else(|| CbnError::IllegalValue {
                    node: self.variable.clone(),
                    value: value.to_string(),
                })?;
        let row =
            self.rows
                .iter()
                .find(|r| r.given == given)
                .ok_or_else(|| CbnError::IllegalValue {
                    node: self.variable.clone(),
                    value: format!("parent assignment {given:?}"),
                })?;
        Ok(row.probs[vi])
    }
}

/// Maps an NPMI value in [-1, 1] to a nonnegative score. The default shift
/// `(npmi + 1) / 2` preserves NPMI ordering and gives zero mass at -1.
pub type NpmiMapping = fn(f64) -> f64;

/// The default association-to-score mapping.
pub fn shifted_npmi_mapping(n: f64) -> f64 {
    (n + 1.0) / 2.0
}

fn association(x: &str, y: &str, counts: &CooccurrenceCounts) -> f64 {
    let (px, py) = (counts.p_single(x), counts.p_single(y));
    // Terms never seen in any unit carry no co-occurrence signal; score them
    // like a zero joint.
    if px <= 0.0 || py <= 0.0 {
        -1.0
    } else {
        npmi_from_probs(px, py, counts.p_pair(x, y))
    }
}

/// Builds the CPD of `node` given `parents` with the default NPMI mapping.
///
/// With parents, each row scores child value x against the parent assignment
/// (y1..yk) as the product of per-parent mapped NPMI terms, normalized over
/// x; an all-zero row falls back to uniform. Without parents the
/// distribution is the value plausibility mass, renormalized.
pub fn build_cpd(
    node: &LinguisticVariable,
    parents: &[&LinguisticVariable],
    counts: &CooccurrenceCounts,
) -> Result<CPDTable, CbnError> {
    build_cpd_with(node, parents, counts, shifted_npmi_mapping)
}

/// [`build_cpd`] with a caller-chosen NPMI-to-score mapping.
pub fn build_cpd_with(
    node: &LinguisticVariable,
    parents: &[&LinguisticVariable],
    counts: &CooccurrenceCounts,
    mapping: NpmiMapping,
) -> Result<CPDTable, CbnError> {
    if node.values.is_empty() {
        return Err(CbnError::EmptyValues(node.name.clone()));
    }
    let values: Vec<String> = node.values.iter().map(|v| v.value.clone()).collect();

    let mut rows = Vec::new();
    if parents.is_empty() {
        let mass: Vec<f64> = node.values.iter().map(|v| v.plausibility).collect();
        rows.push(CpdRow {
            given: Vec::new(),
            probs: normalize(mass),
        });
    } else {
        for assignment in parent_assignments(parents) {
            let scores: Vec<f64> = values
                .iter()
                .map(|x| {
                    assignment
                        .iter()
                        .map(|y| mapping(association(x, y, counts)))
                        .product()
                })
                .collect();
            rows.push(CpdRow {
                given: assignment,
                probs: normalize(scores),
            });
        }
    }

    Ok(CPDTable {
        variable: node.name.clone(),
        parents: parents.iter().map(|p| p.name.clone()).collect(),
        values,
        rows,
    })
}

/// Cartesian product of the parents' value lists, in parent order.
fn parent_assignments(parents: &[&LinguisticVariable]) -> Vec<Vec<String>> {
    let mut assignments: Vec<Vec<String>> = vec![Vec::new()];
    for parent in parents {
        let mut next = Vec::with_capacity(assignments.len() * parent.values.len());
        for prefix in &assignments {
            for v in &parent.values {
                let mut a = prefix.clone();
                a.push(v.value.clone());
                next.push(a);
            }
        }
        assignments = next;
    }
    assignments
}

fn normalize(scores: Vec<f64>) -> Vec<f64> {
    let sum: f64 = scores.iter().sum();
    if sum <= 0.0 {
        // Add-one smoothing on zero rows degrades to uniform.
        let n = scores.len() as f64;
        return scores.iter().map(|_| 1.0 / n).collect();
    }
    scores.iter().map(|s| s / sum).collect()
}

/// The factorized joint probability of a full assignment (one value per
/// node), under the CPDs keyed by variable name and each node's parent list.
pub fn joint_probability(
    cpds: &BTreeMap<String, CPDTable>,
    assignment: &BTreeMap<String, String>,
) -> Result<f64, CbnError> {
    let mut product = 1.0;
    for (name, cpd) in cpds {
        let value = assignment
            .get(name)
            .ok_or_else(|| CbnError::MissingAssignment(name.clone()))?;
        let given: Vec<String> = cpd
            .parents
            .iter()
            .map(|p| {
                assignment
                    .get(p)
                    .cloned()
                    .ok_or_else(|| CbnError::MissingAssignment(p.clone()))
            })
            .collect::<Result<_, _>>()?;
        product *= cpd.prob(value, &given)?;
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::counts::CooccurrenceUnit;
    use crate::hypernymy::ValueEntry;

    fn variable(name: &str, values: &[(&str, f64)]) -> LinguisticVariable {
        LinguisticVariable {
            name: name.to_string(),
            values: values
                .iter()
                .map(|(v, p)| ValueEntry {
                    value: v.to_string(),
                    count: 1,
                    plausibility: *p,
                    weight: 1.0,
                    stems: vec![v.to_string()],
                })
                .collect(),
        }
    }

    fn counts_of(
        n: u64,
        singles: &[(&str, u64)],
        pairs: &[(&str, &str, u64)],
    ) -> CooccurrenceCounts {
        CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            n,
            singles.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
            pairs
                .iter()
                .map(|(x, y, c)| ((x.to_string(), y.to_string()), *c))
                .collect(),
        )
    }

    #[test]
    fn parentless_node_gets_plausibility_marginal() {
        let node = variable("n", &[("a", 0.75), ("b", 0.25)]);
        let counts = counts_of(1, &[], &[]);
        let cpd = build_cpd(&node, &[], &counts).unwrap();
        assert_eq!(cpd.rows.len(), 1);
        assert_eq!(cpd.rows[0].probs, vec![0.75, 0.25]);
    }

    #[test]
    fn single_parent_row_follows_shifted_npmi() {
        // npmi(a, p) = 1 (perfect co-occurrence), npmi(b, p) = 0
        // (independence): unnormalized 1 and 0.5 -> (2/3, 1/3).
        let node = variable("n", &[("a", 0.5), ("b", 0.5)]);
        let parent = variable("p", &[("p1", 1.0)]);
        let counts = counts_of(
            4,
            &[("a", 2), ("b", 2), ("p1", 2)],
            &[("a", "p1", 2), ("b", "p1", 1)],
        );
        let cpd = build_cpd(&node, &[&parent], &counts).unwrap();
        assert_eq!(cpd.rows.len(), 1);
        assert_eq!(cpd.rows[0].given, vec!["p1".to_string()]);
        assert!((cpd.rows[0].probs[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((cpd.rows[0].probs[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn equal_npmi_gives_uniform_row() {
        let node = variable("n", &[("a", 0.9), ("b", 0.1)]);
        let parent = variable("p", &[("p1", 1.0)]);
        // Both values independent of p1.
        let counts = counts_of(
            8,
            &[("a", 4), ("b", 4), ("p1", 4)],
            &[("a", "p1", 2), ("b", "p1", 2)],
        );
        let cpd = build_cpd(&node, &[&parent], &counts).unwrap();
        assert!((cpd.rows[0].probs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unseen_terms_smooth_to_uniform() {
        let node = variable("n", &[("a", 0.5), ("b", 0.5)]);
        let parent = variable("p", &[("p1", 1.0)]);
        let counts = counts_of(4, &[], &[]);
        let cpd = build_cpd(&node, &[&parent], &counts).unwrap();
        assert_eq!(cpd.rows[0].probs, vec![0.5, 0.5]);
    }

    #[test]
    fn rows_sum_to_one() {
        let node = variable("n", &[("a", 0.3), ("b", 0.3), ("c", 0.4)]);
        let p1 = variable("p1", &[("x", 0.5), ("y", 0.5)]);
        let p2 = variable("p2", &[("u", 1.0)]);
        let counts = counts_of(
            10,
            &[("a", 3), ("b", 5), ("c", 2), ("x", 4), ("y", 2), ("u", 6)],
            &[("a", "x", 2), ("b", "y", 1), ("c", "u", 2), ("a", "u", 1)],
        );
        let cpd = build_cpd(&node, &[&p1, &p2], &counts).unwrap();
        assert_eq!(cpd.rows.len(), 2);
        for row in &cpd.rows {
            let sum: f64 = row.probs.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.probs.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn empty_value_set_is_error() {
        let node = LinguisticVariable {
            name: "n".into(),
            values: vec![],
        };
        let counts = counts_of(1, &[], &[]);
        assert!(matches!(
            build_cpd(&node, &[], &counts),
            Err(CbnError::EmptyValues(_))
        ));
    }

    #[test]
    fn joint_of_single_node_is_its_marginal() {
        let node = variable("n", &[("a", 0.75), ("b", 0.25)]);
        let counts = counts_of(1, &[], &[]);
        let cpd = build_cpd(&node, &[], &counts).unwrap();
        let cpds = BTreeMap::from([("n".to_string(), cpd)]);
        let joint = joint_probability(&cpds, &BTreeMap::from([("n".to_string(), "a".to_string())]))
            .unwrap();
        assert_eq!(joint, 0.75);
    }

    #[test]
    fn joint_of_independent_nodes_multiplies() {
        let counts = counts_of(1, &[], &[]);
        let n1 = variable("n1", &[("a", 0.5), ("b", 0.5)]);
        let n2 = variable("n2", &[("c", 0.5), ("d", 0.5)]);
        let cpds = BTreeMap::from([
            ("n1".to_string(), build_cpd(&n1, &[], &counts).unwrap()),
            ("n2".to_string(), build_cpd(&n2, &[], &counts).unwrap()),
        ]);
        let joint = joint_probability(
            &cpds,
            &BTreeMap::from([
                ("n1".to_string(), "a".to_string()),
                ("n2".to_string(), "d".to_string()),
            ]),
        )
        .unwrap();
        assert_eq!(joint, 0.25);
    }

    #[test]
    fn chain_joint_sums_to_one() {
        let a = variable("a", &[("a1", 0.6), ("a2", 0.4)]);
        let b = variable("b", &[("b1", 0.5), ("b2", 0.5)]);
        let c = variable("c", &[("c1", 0.3), ("c2", 0.7)]);
        let counts = counts_of(
            12,
            &[
                ("a1", 6),
                ("a2", 4),
                ("b1", 5),
                ("b2", 5),
                ("c1", 3),
                ("c2", 7),
            ],
            &[
                ("a1", "b1", 4),
                ("a2", "b2", 2),
                ("b1", "c1", 2),
                ("b2", "c2", 4),
                ("a1", "c1", 1),
            ],
        );
        let cpds = BTreeMap::from([
            ("a".to_string(), build_cpd(&a, &[], &counts).unwrap()),
            ("b".to_string(), build_cpd(&b, &[&a], &counts).unwrap()),
            ("c".to_string(), build_cpd(&c, &[&b], &counts).unwrap()),
        ]);
        let mut total = 0.0;
        for av in ["a1", "a2"] {
            for bv in ["b1", "b2"] {
                for cv in ["c1", "c2"] {
                    total += joint_probability(
                        &cpds,
                        &BTreeMap::from([
                            ("a".to_string(), av.to_string()),
                            ("b".to_string(), bv.to_string()),
                            ("c".to_string(), cv.to_string()),
                        ]),
                    )
                    .unwrap();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_or_illegal_assignment_names_node() {
        let node = variable("n", &[("a", 1.0)]);
        let counts = counts_of(1, &[], &[]);
        let cpds = BTreeMap::from([("n".to_string(), build_cpd(&node, &[], &counts).unwrap())]);
        let err = joint_probability(&cpds, &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, CbnError::MissingAssignment(n) if n == "n"));
        let err = joint_probability(
            &cpds,
            &BTreeMap::from([("n".to_string(), "zzz".to_string())]),
        )
        .unwrap_err();
        assert!(matches!(err, CbnError::IllegalValue { node, .. } if node == "n"));
    }
}
