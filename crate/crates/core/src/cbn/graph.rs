use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lattice::ConceptLattice;
use crate::scoring::{classify_relation, RelationLabel, ScoredPair};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeProvenance {
    Direct,
    Inherited { source: (String, String) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub cause: String,
    pub effect: String,
    pub cr_value: f64,
    pub provenance: EdgeProvenance,
}

/// The directed causal graph over variables: acyclic after finalization,
/// with no self-loops and no opposed edge pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

impl CausalGraph {
    pub fn parents_of(&self, node: &str) -> Vec<&str> {
        let mut parents: Vec<&str> = self
            .edges
            .iter()
            .filter(|e| e.effect == node)
            .map(|e| e.cause.as_str())
            .collect();
        parents.sort();
        parents.dedup();
        parents
    }
}

/// A pair whose evidence runs strongly both ways; these are kept out of the
/// graph and exported alongside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidirectionalPair {
    pub a: String,
    pub b: String,
    pub forward_term: f64,
    pub reverse_term: f64,
}

/// Everything graph finalization produced, including what it had to drop.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBuild {
    pub graph: CausalGraph,
    pub bidirectional: Vec<BidirectionalPair>,
    pub removed_edges: Vec<Edge>,
}

/// Builds the DAG from scored pairs.
///
/// Edges follow the relation labels at threshold `mu`. Bi-directional pairs
/// go to the sidecar instead of the graph. With a lattice, every direct edge
/// is copied onto the cause's sub-variables (and optionally the effect's,
/// with `inherit_effect_side`). Directed cycles are then broken by repeatedly
/// deleting the weakest edge on a detected cycle.
pub fn build_causal_graph(
    scores: &[ScoredPair],
    lattice: Option<&ConceptLattice>,
    inherit_effect_side: bool,
    mu: f64,
) -> GraphBuild {
    let mut nodes: BTreeSet<String> = BTreeSet::new();
    let mut edges: BTreeMap<(String, String), Edge> = BTreeMap::new();
    let mut bidirectional = Vec::new();

    let mut sorted: Vec<&ScoredPair> = scores.iter().collect();
    sorted.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));

    for pair in &sorted {
        nodes.insert(pair.a.clone());
        nodes.insert(pair.b.clone());
        if pair.score.bidirectional {
            bidirectional.push(BidirectionalPair {
                a: pair.a.clone(),
                b: pair.b.clone(),
                forward_term: pair.score.forward_term,
                reverse_term: pair.score.reverse_term,
            });
            continue;
        }
        let label = classify_relation(pair.score.value, mu).unwrap_or(RelationLabel::None);
        let (cause, effect) = match label {
            RelationLabel::ACausesB => (pair.a.clone(), pair.b.clone()),
            RelationLabel::BCausesA => (pair.b.clone(), pair.a.clone()),
            RelationLabel::None => continue,
        };
        if cause == effect {
            continue;
        }
        edges.insert(
            (cause.clone(), effect.clone()),
            Edge {
                cause,
                effect,
                cr_value: pair.score.value.abs(),
                provenance: EdgeProvenance::Direct,
            },
        );
    }

    if let Some(lattice) = lattice {
        let direct: Vec<Edge> = edges.values().cloned().collect();
        for edge in &direct {
            let mut inherited_pairs: Vec<(String, String)> = Vec::new();
            match lattice.sub_objects(&edge.cause) {
                Ok(subs) => {
                    inherited_pairs.extend(subs.into_iter().map(|d| (d, edge.effect.clone())));
                }
                Err(e) => log::warn!("no lattice concept for `{}`: {e}", edge.cause),
            }
            if inherit_effect_side {
                match lattice.sub_objects(&edge.effect) {
                    Ok(subs) => {
                        inherited_pairs.extend(subs.into_iter().map(|d| (edge.cause.clone(), d)));
                    }
                    Err(e) => log::warn!("no lattice concept for `{}`: {e}", edge.effect),
                }
            }
            for (cause, effect) in inherited_pairs {
                if cause == effect
                    || edges.contains_key(&(cause.clone(), effect.clone()))
                    || edges.contains_key(&(effect.clone(), cause.clone()))
                {
                    continue;
                }
                nodes.insert(cause.clone());
                nodes.insert(effect.clone());
                edges.insert(
                    (cause.clone(), effect.clone()),
                    Edge {
                        cause,
                        effect,
                        cr_value: edge.cr_value,
                        provenance: EdgeProvenance::Inherited {
                            source: (edge.cause.clone(), edge.effect.clone()),
                        },
                    },
                );
            }
        }
    }

    let mut removed_edges = Vec::new();
    loop {
        let current: Vec<&Edge> = edges.values().collect();
        let Some(cycle) = find_cycle(&nodes, &current) else {
            break;
        };
        let weakest = cycle
            .iter()
            .min_by(|a, b| {
                a.cr_value
                    .total_cmp(&b.cr_value)
                    .then_with(|| (&a.cause, &a.effect).cmp(&(&b.cause, &b.effect)))
            })
            .expect("cycle is non-empty")
            .clone();
        log::warn!(
            "breaking cycle: removing edge {} -> {} (|cr| = {})",
            weakest.cause,
            weakest.effect,
            weakest.cr_value
        );
        edges.remove(&(weakest.cause.clone(), weakest.effect.clone()));
        removed_edges.push(weakest);
    }

    GraphBuild {
        graph: CausalGraph {
            nodes: nodes.into_iter().collect(),
            edges: edges.into_values().collect(),
        },
        bidirectional,
        removed_edges,
    }
}

/// Finds one directed cycle as its edge list, or None if the graph is acyclic.
/// Traversal order is fixed by the sorted node and edge order.
fn find_cycle(nodes: &BTreeSet<String>, edges: &[&Edge]) -> Option<Vec<Edge>> {
    let mut adjacency: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
    for e in edges {
        adjacency.entry(e.cause.as_str()).or_default().push(e);
    }
    for list in adjacency.values_mut() {
        list.sort_by(|a, b| a.effect.cmp(&b.effect));
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut colors: BTreeMap<&str, Color> =
        nodes.iter().map(|n| (n.as_str(), Color::White)).collect();

    fn visit<'a>(
        node: &'a str,
        adjacency: &BTreeMap<&'a str, Vec<&'a Edge>>,
        colors: &mut BTreeMap<&'a str, Color>,
        path: &mut Vec<&'a Edge>,
    ) -> Option<Vec<Edge>> {
        colors.insert(node, Color::Grey);
        for edge in adjacency.get(node).into_iter().flatten() {
            match colors
                .get(edge.effect.as_str())
                .copied()
                .unwrap_or(Color::White)
            {
                Color::Grey => {
                    // Back edge: the cycle is the path suffix from the target.
                    let mut cycle: Vec<Edge> = path
                        .iter()
                        .skip_while(|e| e.cause != edge.effect)
                        .map(|e| (*e).clone())
                        .collect();
                    cycle.push((*edge).clone());
                    return Some(cycle);
                }
                Color::White => {
                    path.push(edge);
                    if let Some(cycle) = visit(edge.effect.as_str(), adjacency, colors, path) {
                        return Some(cycle);
                    }
                    path.pop();
                }
                Color::Black => {}
            }
        }
        colors.insert(node, Color::Black);
        None
    }

    let node_list: Vec<&str> = nodes.iter().map(|n| n.as_str()).collect();
    for node in node_list {
        if colors[node] == Color::White {
            let mut path = Vec::new();
            if let Some(cycle) = visit(node, &adjacency, &mut colors, &mut path) {
                return Some(cycle);
            }
        }
    }
    None
}

/// Kahn topological sort; None when a cycle remains.
pub fn topological_order(graph: &CausalGraph) -> Option<Vec<String>> {
    let mut in_degree: BTreeMap<&str, usize> =
        graph.nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &graph.edges {
        *in_degree.get_mut(e.effect.as_str())? += 1;
        out.entry(e.cause.as_str())
            .or_default()
            .push(e.effect.as_str());
    }
    let mut ready: BTreeSet<&str> = in_degree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::new();
    while let Some(&node) = ready.iter().next() {
        ready.remove(node);
        order.push(node.to_string());
        for next in out.get(node).into_iter().flatten() {
            let d = in_degree.get_mut(next).expect("known node");
            *d -= 1;
            if *d == 0 {
                ready.insert(next);
            }
        }
    }
    (order.len() == graph.nodes.len()).then_some(order)
}
