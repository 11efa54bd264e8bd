//! Formal Concept Analysis over variables × values: context derivation,
//! concept enumeration (Close-by-One), the Hasse diagram of the
//! subconcept-superconcept order, and downward inheritance of causal links.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypernymy::VariableStore;

/// A formal context: objects (variables), attributes (values), and the
/// incidence relation between them.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalContext {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    /// Per-object sorted attribute indices.
    rows: Vec<Vec<u32>>,
    /// Per-attribute sorted object indices.
    cols: Vec<Vec<u32>>,
}

/// A closed (extent, intent) pair. Indices refer to the owning context's
/// object and attribute orderings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FormalConcept {
    pub extent: Vec<u32>,
    pub intent: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("object `{0}` is not in the context")]
    UnknownObject(String),
    #[error("attribute `{0}` is not in the context")]
    UnknownAttribute(String),
    #[error("concept id {0} is not in the lattice")]
    UnknownConcept(usize),
    #[error("duplicate concept with extent {0:?}")]
    DuplicateConcept(Vec<u32>),
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
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

fn is_subset_sorted(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j >= b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

impl FormalContext {
    /// Builds a context from explicit incidence pairs.
    pub fn new(
        objects: Vec<String>,
        attributes: Vec<String>,
        incidence: &[(usize, usize)],
    ) -> Self {
        let mut rows = vec![BTreeSet::new(); objects.len()];
        let mut cols = vec![BTreeSet::new(); attributes.len()];
        for &(o, a) in incidence {
            rows[o].insert(a as u32);
            cols[a].insert(o as u32);
        }
        FormalContext {
            objects,
            attributes,
            rows: rows.into_iter().map(|s| s.into_iter().collect()).collect(),
            cols: cols.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    /// Context with variables as objects and their value phrases as attributes.
    pub fn from_variable_store(store: &VariableStore) -> Self {
        let objects: Vec<String> = store.names().map(|s| s.to_string()).collect();
        let attributes: Vec<String> = store
            .variables
            .values()
            .flat_map(|v| v.value_phrases().map(|p| p.to_string()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let attr_idx: BTreeMap<&str, usize> = attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let mut incidence = Vec::new();
        for (o, name) in objects.iter().enumerate() {
            for phrase in store.get(name).unwrap().value_phrases() {
                incidence.push((o, attr_idx[phrase]));
            }
        }
        FormalContext::new(objects, attributes, &incidence)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn object_index(&self, name: &str) -> Result<u32, LatticeError> {
        self.objects
            .iter()
            .position(|o| o == name)
            .map(|i| i as u32)
            .ok_or_else(|| LatticeError::UnknownObject(name.to_string()))
    }

    /// Attributes shared by every object in `objects` (indices). The empty
    /// set derives to all attributes.
    pub fn derive_object_indices(&self, objects: &[u32]) -> Vec<u32> {
        match objects.split_first() {
            None => (0..self.attributes.len() as u32).collect(),
            Some((first, rest)) => {
                let mut acc = self.rows[*first as usize].clone();
                for o in rest {
                    acc = intersect_sorted(&acc, &self.rows[*o as usize]);
                }
                acc
            }
        }
    }

    /// Objects having every attribute in `attrs` (indices). The empty set
    /// derives to all objects.
    pub fn derive_attribute_indices(&self, attrs: &[u32]) -> Vec<u32> {
        match attrs.split_first() {
            None => (0..self.objects.len() as u32).collect(),
            Some((first, rest)) => {
                let mut acc = self.cols[*first as usize].clone();
                for a in rest {
                    acc = intersect_sorted(&acc, &self.cols[*a as usize]);
                }
                acc
            }
        }
    }

    /// Name-level derivation: attributes common to all named objects.
    pub fn derive_objects(&self, names: &[&str]) -> Result<Vec<String>, LatticeError> {
        let idx: Vec<u32> = names
            .iter()
            .map(|n| self.object_index(n))
            .collect::<Result<_, _>>()?;
        Ok(self
            .derive_object_indices(&idx)
            .into_iter()
            .map(|a| self.attributes[a as usize].clone())
            .collect())
    }

    /// Name-level derivation: objects having all named attributes.
    pub fn derive_attributes(&self, names: &[&str]) -> Result<Vec<String>, LatticeError> {
        let idx: Vec<u32> = names
            .iter()
            .map(|n| {
                self.attributes
                    .iter()
                    .position(|a| a == n)
                    .map(|i| i as u32)
                    .ok_or_else(|| LatticeError::UnknownAttribute(n.to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(self
            .derive_attribute_indices(&idx)
            .into_iter()
            .map(|o| self.objects[o as usize].clone())
            .collect())
    }
}

/// Enumerates every formal concept of the context with Close-by-One, in
/// lexicographic extent order.
pub fn enumerate_concepts(ctx: &FormalContext) -> Vec<FormalConcept> {
    let all: Vec<u32> = (0..ctx.object_count() as u32).collect();
    let top_intent = ctx.derive_object_indices(&all);
    let mut out = Vec::new();
    close_by_one(ctx, all, top_intent, 0, &mut out);
    out.sort();
    out
}

fn close_by_one(
    ctx: &FormalContext,
    extent: Vec<u32>,
    intent: Vec<u32>,
    start: u32,
    out: &mut Vec<FormalConcept>,
) {
    let n_attrs = ctx.attribute_count() as u32;
    out.push(FormalConcept {
        extent: extent.clone(),
        intent: intent.clone(),
    });
    for j in start..n_attrs {
        if intent.binary_search(&j).is_ok() {
            continue;
        }
        let new_extent = intersect_sorted(&extent, &ctx.cols[j as usize]);
        let new_intent = ctx.derive_object_indices(&new_extent);
        // Canonicity: closing must not introduce attributes below j.
        let canonical = new_intent
            .iter()
            .take_while(|a| **a < j)
            .all(|a| intent.binary_search(a).is_ok());
        if canonical {
            close_by_one(ctx, new_extent, new_intent, j + 1, out);
        }
    }
}

/// The concept hierarchy: concepts plus the cover (Hasse) edges of the
/// extent-inclusion order. Edge `(child, parent)` means the child is a
/// subconcept (smaller extent) of the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptLattice {
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
    pub concepts: Vec<FormalConcept>,
    pub covers: Vec<(usize, usize)>,
    children: Vec<Vec<usize>>,
}

/// How a causal link between two concepts arose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkProvenance {
    Direct,
    Inherited { source: (usize, usize) },
}

/// A directed cause → effect link between lattice concepts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CausalLink {
    pub cause: usize,
    pub effect: usize,
    pub provenance: LinkProvenance,
}

/// Builds the Hasse diagram over a distinct set of closed concepts.
pub fn build_lattice(
    ctx: &FormalContext,
    concepts: Vec<FormalConcept>,
) -> Result<ConceptLattice, LatticeError> {
    let mut seen = BTreeSet::new();
    for c in &concepts {
        if !seen.insert(c.extent.clone()) {
            return Err(LatticeError::DuplicateConcept(c.extent.clone()));
        }
    }
    let n = concepts.len();
    let mut covers = Vec::new();
    let mut children = vec![Vec::new(); n];
    for child in 0..n {
        for parent in 0..n {
            if child == parent {
                continue;
            }
            let (ce, pe) = (&concepts[child].extent, &concepts[parent].extent);
            if ce.len() >= pe.len() || !is_subset_sorted(ce, pe) {
                continue;
            }
            // Cover test: nothing strictly in between.
            let is_cover = !(0..n).any(|mid| {
                mid != child
                    && mid != parent
                    && concepts[mid].extent.len() > ce.len()
                    && concepts[mid].extent.len() < pe.len()
                    && is_subset_sorted(ce, &concepts[mid].extent)
                    && is_subset_sorted(&concepts[mid].extent, pe)
            });
            if is_cover {
                covers.push((child, parent));
                children[parent].push(child);
            }
        }
    }
    covers.sort();
    for ch in children.iter_mut() {
        ch.sort();
    }
    Ok(ConceptLattice {
        objects: ctx.objects.clone(),
        attributes: ctx.attributes.clone(),
        concepts,
        covers,
        children,
    })
}

/// Enumerates concepts and builds the lattice in one step.
pub fn lattice_from_context(ctx: &FormalContext) -> ConceptLattice {
    build_lattice(ctx, enumerate_concepts(ctx)).expect("enumeration yields distinct concepts")
}

impl ConceptLattice {
    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    fn check_id(&self, id: usize) -> Result<(), LatticeError> {
        if id >= self.concepts.len() {
            return Err(LatticeError::UnknownConcept(id));
        }
        Ok(())
    }

    /// All strict subconcepts of `id`, by downward cover reachability.
    pub fn descendants(&self, id: usize) -> Result<Vec<usize>, LatticeError> {
        self.check_id(id)?;
        let mut seen = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            for &child in &self.children[c] {
                if seen.insert(child) {
                    stack.push(child);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// The object concept of `name`: the most specific concept whose extent
    /// contains the object.
    pub fn object_concept(&self, name: &str) -> Result<usize, LatticeError> {
        let idx = self
            .objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| LatticeError::UnknownObject(name.to_string()))? as u32;
        self.concepts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.extent.binary_search(&idx).is_ok())
            .min_by_key(|(i, c)| (c.extent.len(), *i))
            .map(|(i, _)| i)
            .ok_or_else(|| LatticeError::UnknownObject(name.to_string()))
    }

    /// Objects sharing all of `name`'s attributes (and possibly more), i.e.
    /// the variables that specialize it. Excludes `name` itself.
    pub fn sub_objects(&self, name: &str) -> Result<Vec<String>, LatticeError> {
        let concept = self.object_concept(name)?;
        Ok(self.concepts[concept]
            .extent
            .iter()
            .map(|o| self.objects[*o as usize].clone())
            .filter(|o| o != name)
            .collect())
    }
}

/// Extends `direct` concept links with one inherited link per strict
/// subconcept of each cause. Direct links win over inherited ones; each
/// (cause, effect) pair appears once.
pub fn inherit_causal_relations(
    lattice: &ConceptLattice,
    direct: &[(usize, usize)],
) -> Result<Vec<CausalLink>, LatticeError> {
    let mut links: BTreeMap<(usize, usize), LinkProvenance> = BTreeMap::new();
    let mut sorted: Vec<(usize, usize)> = direct.to_vec();
    sorted.sort();
    sorted.dedup();
    for &(cause, effect) in &sorted {
        lattice.check_id(cause)?;
        lattice.check_id(effect)?;
        links.insert((cause, effect), LinkProvenance::Direct);
    }
    for &(cause, effect) in &sorted {
        for d in lattice.descendants(cause)? {
            links
                .entry((d, effect))
                .or_insert(LinkProvenance::Inherited {
                    source: (cause, effect),
                });
        }
    }
    Ok(links
        .into_iter()
        .map(|((cause, effect), provenance)| CausalLink {
            cause,
            effect,
            provenance,
        })
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct ConceptExport {
    id: usize,
    extent: Vec<String>,
    intent: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LatticeExport {
    objects: Vec<String>,
    attributes: Vec<String>,
    concepts: Vec<ConceptExport>,
    covers: Vec<(usize, usize)>,
}

#[derive(Debug, Error)]
pub enum LatticeParseError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("lattice JSON references unknown name `{0}`")]
    UnknownName(String),
    #[error("lattice JSON references concept id {0} out of range")]
    BadConceptId(usize),
}

/// Parses the JSON written by [`lattice_to_json`].
pub fn lattice_from_json(text: &str) -> Result<ConceptLattice, LatticeParseError> {
    let export: LatticeExport = serde_json::from_str(text)?;
    let object_idx: BTreeMap<&str, u32> = export
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.as_str(), i as u32))
        .collect();
    let attr_idx: BTreeMap<&str, u32> = export
        .attributes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i as u32))
        .collect();
    let lookup = |map: &BTreeMap<&str, u32>, name: &str| {
        map.get(name)
            .copied()
            .ok_or_else(|| LatticeParseError::UnknownName(name.to_string()))
    };
    let mut concepts = Vec::with_capacity(export.concepts.len());
    for c in &export.concepts {
        let extent: Vec<u32> = c
            .extent
            .iter()
            .map(|o| lookup(&object_idx, o))
            .collect::<Result<_, _>>()?;
        let intent: Vec<u32> = c
            .intent
            .iter()
            .map(|a| lookup(&attr_idx, a))
            .collect::<Result<_, _>>()?;
        concepts.push(FormalConcept { extent, intent });
    }
    let mut children = vec![Vec::new(); concepts.len()];
    for &(child, parent) in &export.covers {
        if child >= concepts.len() {
            return Err(LatticeParseError::BadConceptId(child));
        }
        if parent >= concepts.len() {
            return Err(LatticeParseError::BadConceptId(parent));
        }
        children[parent].push(child);
    }
    for ch in children.iter_mut() {
        ch.sort();
    }
    Ok(ConceptLattice {
        objects: export.objects,
        attributes: export.attributes,
        concepts,
        covers: export.covers,
        children,
    })
}

/// JSON export with names substituted for indices.
pub fn lattice_to_json(lattice: &ConceptLattice) -> String {
    let export = LatticeExport {
        objects: lattice.objects.clone(),
        attributes: lattice.attributes.clone(),
        concepts: lattice
            .concepts
            .iter()
            .enumerate()
            .map(|(id, c)| ConceptExport {
                id,
                extent: c
                    .extent
                    .iter()
                    .map(|o| lattice.objects[*o as usize].clone())
                    .collect(),
                intent: c
                    .intent
                    .iter()
                    .map(|a| lattice.attributes[*a as usize].clone())
                    .collect(),
            })
            .collect(),
        covers: lattice.covers.clone(),
    };
    serde_json::to_string_pretty(&export).expect("lattice serializes")
}

/// DOT rendering of the Hasse diagram, child → parent.
pub fn lattice_to_dot(lattice: &ConceptLattice) -> String {
    let mut out = String::from("digraph lattice {\n  rankdir=BT;\n");
    for (id, c) in lattice.concepts.iter().enumerate() {
        let extent: Vec<&str> = c
            .extent
            .iter()
            .map(|o| lattice.objects[*o as usize].as_str())
            .collect();
        out.push_str(&format!("  n{id} [label=\"{{{}}}\"];\n", extent.join(", ")));
    }
    for (child, parent) in &lattice.covers {
        out.push_str(&format!("  n{child} -> n{parent};\n"));
    }
    out.push_str("}\n");
    out
}
