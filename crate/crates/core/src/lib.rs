//! Concept-level causal knowledge extraction from text.
//!
//! The pipeline reads a raw corpus and produces a causal Bayesian network
//! over concepts:
//!
//! 1. [`corpus`] — ingestion, segmentation, normalization, embeddings;
//! 2. [`hypernymy`] — IsA extraction into linguistic variables and values;
//! 3. [`lattice`] — a formal concept lattice over variables × values, used
//!    to inherit causal links down the concept hierarchy;
//! 4. [`causaldb`] — cause/effect evidence mined around causal connectives
//!    and verbs;
//! 5. [`scoring`] — the signed causal-relation score between two variables;
//! 6. [`cbn`] — DAG assembly with NPMI-derived conditional probability
//!    tables;
//! 7. [`eval`] — accuracy/macro-F1 harness, threshold sweeps, baselines,
//!    and inter-annotator agreement.

pub mod causaldb;
pub mod cbn;
pub mod corpus;
pub mod eval;
pub mod hypernymy;
pub mod lattice;
pub mod scoring;

pub use causaldb::{
    build_gamma, compile_marker_lexicon, split_cause_effect, GammaDB, MarkerLexicon,
};
pub use cbn::{assemble_cbn, count_cooccurrences, npmi, CooccurrenceCounts, CooccurrenceUnit, CBN};
pub use corpus::{ingest_corpus, load_embeddings, CorpusStore, EmbeddingStore, IngestConfig};
pub use eval::{evaluate, fleiss_kappa, load_annotations, sweep_mu, EvalReport};
pub use hypernymy::{build_variable_store, extract_isa_pairs, IsAPair, VariableStore};
pub use lattice::{
    enumerate_concepts, lattice_from_context, lattice_from_json, ConceptLattice, FormalContext,
};
pub use scoring::{
    causal_relation, score_all_pairs, CRScore, ScoredPair, ScoringConfig, WeightMode,
};
