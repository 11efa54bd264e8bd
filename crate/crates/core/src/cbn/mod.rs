//! Causal Bayesian Network assembly: edge selection from relation labels,
//! DAG enforcement, NPMI-backed conditional probability tables, joint
//! evaluation, and export.

mod counts;
mod cpd;
mod graph;

pub use counts::{
    count_cooccurrences, npmi, npmi_from_probs, CooccurrenceCounts, CooccurrenceUnit,
};
pub use cpd::{
    build_cpd, build_cpd_with, joint_probability, shifted_npmi_mapping, CPDTable, CpdRow,
};
pub use graph::{
    build_causal_graph, topological_order, BidirectionalPair, CausalGraph, Edge, EdgeProvenance,
    GraphBuild,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypernymy::VariableStore;
use crate::lattice::ConceptLattice;
use crate::scoring::ScoredPair;

pub const CBN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CbnError {
    #[error("term `{0}` has a zero marginal; its probability is undefined")]
    UndefinedProbability(String),
    #[error("variable `{0}` has no values")]
    EmptyValues(String),
    #[error("no value assigned for node `{0}`")]
    MissingAssignment(String),
    #[error("node `{node}` has no probability entry for `{value}`")]
    IllegalValue { node: String, value: String },
    #[error("variable `{0}` is missing from the store")]
    UnknownVariable(String),
}

/// Reproducibility record carried inside every export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub mu: f64,
    pub weight_mode: String,
    pub bidirectional_tau: f64,
    pub cooccurrence_unit: String,
    /// SHA-256 of the marker lexicon file.
    pub lexicon_hash: String,
    /// Which embedding file backed the similarity weights.
    pub embedding_source: String,
    /// Which clause splitter produced the evidence database.
    pub splitter: String,
}

/// The assembled network: graph, one CPD per node, plus the bi-directional
/// sidecar and the edges deleted while enforcing acyclicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CBN {
    pub schema_version: u32,
    pub graph: CausalGraph,
    pub cpds: BTreeMap<String, CPDTable>,
    pub bidirectional_sidecar: Vec<BidirectionalPair>,
    pub removed_edges: Vec<Edge>,
    pub run_metadata: RunMetadata,
}

impl CBN {
    /// Joint probability of a full value assignment (one value per node).
    pub fn joint_probability(
        &self,
        assignment: &BTreeMap<String, String>,
    ) -> Result<f64, CbnError> {
        joint_probability(&self.cpds, assignment)
    }

    /// P(target | evidence) by summing the joint over every completion of
    /// the evidence. Enumeration is exponential in the free nodes, so this
    /// is meant for small networks.
    pub fn conditional_probability(
        &self,
        target: &BTreeMap<String, String>,
        evidence: &BTreeMap<String, String>,
    ) -> Result<f64, CbnError> {
        for name in target.keys().chain(evidence.keys()) {
            if !self.cpds.contains_key(name) {
                return Err(CbnError::UnknownVariable(name.clone()));
            }
        }
        let matches = |assignment: &BTreeMap<String, String>, query: &BTreeMap<String, String>| {
            query.iter().all(|(k, v)| assignment.get(k) == Some(v))
        };
        let mut p_evidence = 0.0;
        let mut p_both = 0.0;
        for assignment in self.full_assignments() {
            if !matches(&assignment, evidence) {
                continue;
            }
            let p = self.joint_probability(&assignment)?;
            p_evidence += p;
            if matches(&assignment, target) {
                p_both += p;
            }
        }
        if p_evidence <= 0.0 {
            return Err(CbnError::UndefinedProbability(format!("{evidence:?}")));
        }
        Ok(p_both / p_evidence)
    }

    fn full_assignments(&self) -> Vec<BTreeMap<String, String>> {
        let mut assignments = vec![BTreeMap::new()];
        for (name, cpd) in &self.cpds {
            let mut next = Vec::with_capacity(assignments.len() * cpd.values.len());
            for base in &assignments {
                for value in &cpd.values {
                    let mut a = base.clone();
                    a.insert(name.clone(), value.clone());
                    next.push(a);
                }
            }
            assignments = next;
        }
        assignments
    }
}

/// Builds the full network over the store's variables: graph from the scored
/// pairs (with lattice inheritance when given), then one CPD per node with
/// its graph parents.
pub fn assemble_cbn(
    store: &VariableStore,
    scores: &[ScoredPair],
    lattice: Option<&ConceptLattice>,
    inherit_effect_side: bool,
    counts: &CooccurrenceCounts,
    mu: f64,
    run_metadata: RunMetadata,
) -> Result<CBN, CbnError> {
    let mut build = build_causal_graph(scores, lattice, inherit_effect_side, mu);

    // Variables that scored no pair still become (parentless) nodes.
    for name in store.names() {
        if !build.graph.nodes.iter().any(|n| n == name) {
            build.graph.nodes.push(name.to_string());
        }
    }
    build.graph.nodes.sort();

    let mut cpds = BTreeMap::new();
    for node in &build.graph.nodes {
        let var = store
            .get(node)
            .ok_or_else(|| CbnError::UnknownVariable(node.clone()))?;
        let parents: Vec<_> = build
            .graph
            .parents_of(node)
            .into_iter()
            .map(|p| {
                store
                    .get(p)
                    .ok_or_else(|| CbnError::UnknownVariable(p.to_string()))
            })
            .collect::<Result<_, _>>()?;
        cpds.insert(node.clone(), build_cpd(var, &parents, counts)?);
    }

    Ok(CBN {
        schema_version: CBN_SCHEMA_VERSION,
        graph: build.graph,
        cpds,
        bidirectional_sidecar: build.bidirectional,
        removed_edges: build.removed_edges,
        run_metadata,
    })
}

pub fn cbn_to_json(cbn: &CBN) -> String {
    serde_json::to_string_pretty(cbn).expect("network serializes")
}

pub fn cbn_from_json(text: &str) -> Result<CBN, serde_json::Error> {
    serde_json::from_str(text)
}

/// DOT digraph with CR-score edge labels; inherited edges render dashed.
pub fn cbn_to_dot(cbn: &CBN) -> String {
    let mut out = String::from("digraph cbn {\n");
    for node in &cbn.graph.nodes {
        out.push_str(&format!("  \"{node}\";\n"));
    }
    for edge in &cbn.graph.edges {
        let style = match edge.provenance {
            EdgeProvenance::Direct => "solid",
            EdgeProvenance::Inherited { .. } => "dashed",
        };
        out.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{:.4}\", style={}];\n",
            edge.cause, edge.effect, edge.cr_value, style
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypernymy::{LinguisticVariable, ValueEntry};
    use crate::scoring::{CRScore, RelationLabel};

    fn metadata() -> RunMetadata {
        RunMetadata {
            mu: 0.05,
            weight_mode: "cosine".into(),
            bidirectional_tau: 0.75,
            cooccurrence_unit: "sentence".into(),
            lexicon_hash: "test".into(),
            embedding_source: "fixture".into(),
            splitter: "marker-anchored".into(),
        }
    }

    fn variable(name: &str, values: &[&str]) -> LinguisticVariable {
        LinguisticVariable {
            name: name.to_string(),
            values: values
                .iter()
                .map(|v| ValueEntry {
                    value: v.to_string(),
                    count: 1,
                    plausibility: 1.0 / values.len() as f64,
                    weight: 1.0,
                    stems: vec![v.to_string()],
                })
                .collect(),
        }
    }

    fn store_of(vars: &[(&str, &[&str])]) -> VariableStore {
        let mut store = VariableStore::default();
        for (name, values) in vars {
            store
                .variables
                .insert(name.to_string(), variable(name, values));
        }
        store
    }

    fn scored(a: &str, b: &str, value: f64) -> ScoredPair {
        ScoredPair {
            a: a.into(),
            b: b.into(),
            score: CRScore {
                forward_term: value.max(0.0),
                reverse_term: (-f64::min(value, 0.0)).max(0.0),
                value,
                label: if value > 0.05 {
                    RelationLabel::ACausesB
                } else if value < -0.05 {
                    RelationLabel::BCausesA
                } else {
                    RelationLabel::None
                },
                bidirectional: false,
            },
        }
    }

    fn fixture_cbn() -> CBN {
        let store = store_of(&[
            ("alpha", &["a1", "a2"]),
            ("beta", &["b1", "b2"]),
            ("gamma", &["g1"]),
        ]);
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            10,
            [("a1", 4), ("a2", 2), ("b1", 3), ("b2", 5), ("g1", 2)]
                .iter()
                .map(|(t, c)| (t.to_string(), *c))
                .collect(),
            [("a1", "b1", 2), ("a2", "b2", 1), ("b1", "g1", 1)]
                .iter()
                .map(|(x, y, c)| ((x.to_string(), y.to_string()), *c))
                .collect(),
        );
        let scores = vec![scored("alpha", "beta", 0.4), scored("beta", "gamma", 0.3)];
        assemble_cbn(&store, &scores, None, false, &counts, 0.05, metadata()).unwrap()
    }

    #[test]
    fn assembles_graph_and_cpds() {
        let cbn = fixture_cbn();
        assert_eq!(cbn.graph.nodes, vec!["alpha", "beta", "gamma"]);
        assert_eq!(cbn.graph.edges.len(), 2);
        assert_eq!(cbn.cpds["alpha"].parents, Vec::<String>::new());
        assert_eq!(cbn.cpds["beta"].parents, vec!["alpha"]);
        assert_eq!(cbn.cpds["gamma"].parents, vec!["beta"]);
        assert!(topological_order(&cbn.graph).is_some());
        for cpd in cbn.cpds.values() {
            for row in &cpd.rows {
                assert!((row.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dot_export_has_one_arrow_per_edge() {
        let cbn = fixture_cbn();
        let dot = cbn_to_dot(&cbn);
        assert_eq!(dot.matches("->").count(), cbn.graph.edges.len());
    }

    #[test]
    fn json_round_trip_is_identity() {
        let cbn = fixture_cbn();
        let json = cbn_to_json(&cbn);
        let back = cbn_from_json(&json).unwrap();
        assert_eq!(cbn, back);
        assert_eq!(json, cbn_to_json(&back));
    }

    #[test]
    fn metadata_survives_and_runs_reproduce() {
        let a = fixture_cbn();
        let b = fixture_cbn();
        assert_eq!(cbn_to_json(&a), cbn_to_json(&b));
        assert_eq!(a.run_metadata.mu, 0.05);
        assert_eq!(a.run_metadata.lexicon_hash, "test");
    }

    #[test]
    fn conditional_matches_chain_sum() {
        let cbn = fixture_cbn();
        // P(g1 | a1) = sum_b P(b | a1) P(g1 | b), read off the CPD rows.
        let p_b_given_a1 = &cbn.cpds["beta"]
            .rows
            .iter()
            .find(|r| r.given == vec!["a1"])
            .unwrap()
            .probs;
        let p_g_given_b1 = cbn.cpds["gamma"]
            .rows
            .iter()
            .find(|r| r.given == vec!["b1"])
            .unwrap()
            .probs[0];
        let p_g_given_b2 = cbn.cpds["gamma"]
            .rows
            .iter()
            .find(|r| r.given == vec!["b2"])
            .unwrap()
            .probs[0];
        let expected = p_b_given_a1[0] * p_g_given_b1 + p_b_given_a1[1] * p_g_given_b2;

        let target = BTreeMap::from([("gamma".to_string(), "g1".to_string())]);
        let evidence = BTreeMap::from([("alpha".to_string(), "a1".to_string())]);
        let got = cbn.conditional_probability(&target, &evidence).unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "got {got}, expected {expected}"
        );

        // Conditioning on nothing gives the marginal, and the marginal over
        // all target values sums to one.
        let none = BTreeMap::new();
        let mut total = 0.0;
        for value in ["b1", "b2"] {
            let t = BTreeMap::from([("beta".to_string(), value.to_string())]);
            total += cbn.conditional_probability(&t, &none).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-9);

        let unknown = BTreeMap::from([("nope".to_string(), "x".to_string())]);
        assert!(matches!(
            cbn.conditional_probability(&unknown, &none),
            Err(CbnError::UnknownVariable(_))
        ));
    }

    #[test]
    fn single_edge_network_has_one_arrow() {
        let store = store_of(&[("alpha", &["a1"]), ("beta", &["b1"])]);
        let counts = CooccurrenceCounts::from_raw(
            CooccurrenceUnit::Sentence,
            4,
            [("a1", 2), ("b1", 2)]
                .iter()
                .map(|(t, c)| (t.to_string(), *c))
                .collect(),
            [("a1", "b1", 1)]
                .iter()
                .map(|(x, y, c): &(&str, &str, u64)| ((x.to_string(), y.to_string()), *c))
                .collect(),
        );
        let cbn = assemble_cbn(
            &store,
            &[scored("alpha", "beta", 0.4)],
            None,
            false,
            &counts,
            0.05,
            metadata(),
        )
        .unwrap();
        let dot = cbn_to_dot(&cbn);
        assert_eq!(dot.matches("->").count(), 1);
    }

    #[test]
    fn joint_factorizes_over_graph() {
        let cbn = fixture_cbn();
        let mut total = 0.0;
        for a in ["a1", "a2"] {
            for b in ["b1", "b2"] {
                total += cbn
                    .joint_probability(&BTreeMap::from([
                        ("alpha".to_string(), a.to_string()),
                        ("beta".to_string(), b.to_string()),
                        ("gamma".to_string(), "g1".to_string()),
                    ]))
                    .unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-6);
    }
}
