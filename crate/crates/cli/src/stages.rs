use std::path::{Path, PathBuf};

use anyhow::Context;

use textcbn_core::causaldb::{build_gamma, compile_marker_lexicon, gamma_index, gamma_to_jsonl};
use textcbn_core::cbn::{assemble_cbn, cbn_to_dot, cbn_to_json, count_cooccurrences, RunMetadata};
use textcbn_core::corpus::{ingest_corpus, load_embeddings, CorpusStore, IngestConfig};
use textcbn_core::eval::{
    evaluate, heuristic_baselines, load_annotations, predictions_from_scores, sweep_mu,
    sweep_to_tsv,
};
use textcbn_core::hypernymy::{
    build_variable_store, extract_isa_pairs, load_patterns, store_from_jsonl, store_to_jsonl,
    VariableStore,
};
use textcbn_core::lattice::{
    lattice_from_context, lattice_from_json, lattice_to_dot, lattice_to_json, FormalContext,
};
use textcbn_core::scoring::{score_all_pairs, scores_from_tsv, scores_to_tsv, ScoringConfig};

use crate::config::RunConfig;
use crate::manifest::sha256_file;

pub const CORPUS_FILE: &str = "corpus.json";
pub const VARIABLES_FILE: &str = "variables.jsonl";
pub const LATTICE_FILE: &str = "lattice.json";
pub const GAMMA_FILE: &str = "gamma.jsonl";
pub const GAMMA_INDEX_FILE: &str = "gamma_index.json";
pub const SCORES_FILE: &str = "scores.tsv";
pub const CBN_FILE: &str = "cbn.json";
pub const CBN_DOT_FILE: &str = "cbn.dot";
pub const EVAL_REPORT_FILE: &str = "eval_report.json";
pub const SWEEP_FILE: &str = "sweep.tsv";
pub const LATTICE_DOT_FILE: &str = "lattice.dot";
pub const BASELINES_FILE: &str = "baselines.tsv";

/// A stage failure that callers map to exit codes: a missing upstream
/// artifact exits 2, everything else exits 1.
#[derive(Debug)]
pub enum StageFailure {
    MissingArtifact { stage: &'static str, path: PathBuf },
    Failed(anyhow::Error),
}

impl From<anyhow::Error> for StageFailure {
    fn from(e: anyhow::Error) -> Self {
        StageFailure::Failed(e)
    }
}

impl std::fmt::Display for StageFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StageFailure::MissingArtifact { stage, path } => write!(
                f,
                "missing artifact from stage `{stage}`: {} (run `textcbn {stage}` first)",
                path.display()
            ),
            StageFailure::Failed(e) => write!(f, "{e:#}"),
        }
    }
}

type StageResult = Result<Vec<PathBuf>, StageFailure>;

fn require_artifact(
    config: &RunConfig,
    name: &str,
    stage: &'static str,
) -> Result<PathBuf, StageFailure> {
    let path = config.output_dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(StageFailure::MissingArtifact { stage, path })
    }
}

fn write_artifact(config: &RunConfig, name: &str, content: &str) -> Result<PathBuf, StageFailure> {
    std::fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create {}", config.output_dir.display()))?;
    let path = config.output_dir.join(name);
    std::fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn read_artifact(path: &Path) -> Result<String, StageFailure> {
    Ok(std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn load_corpus_artifact(config: &RunConfig) -> Result<CorpusStore, StageFailure> {
    let path = require_artifact(config, CORPUS_FILE, "ingest")?;
    Ok(serde_json::from_str(&read_artifact(&path)?)
        .with_context(|| format!("cannot parse {}", path.display()))?)
}

fn load_variables_artifact(config: &RunConfig) -> Result<VariableStore, StageFailure> {
    let path = require_artifact(config, VARIABLES_FILE, "variables")?;
    Ok(store_from_jsonl(&read_artifact(&path)?)
        .with_context(|| format!("cannot parse {}", path.display()))?)
}

pub fn run_ingest(config: &RunConfig) -> StageResult {
    let stopwords = config.load_stopwords()?;
    let store = ingest_corpus(&config.corpus, &IngestConfig::new(stopwords))
        .context("corpus ingestion failed")?;
    eprintln!(
        "ingested {} documents, {} sentences",
        store.documents.len(),
        store.sentence_count
    );
    let json = serde_json::to_string_pretty(&store).context("corpus serialization failed")?;
    Ok(vec![write_artifact(config, CORPUS_FILE, &json)?])
}

pub fn run_variables(config: &RunConfig) -> StageResult {
    let corpus = load_corpus_artifact(config)?;
    let stopwords = config.load_stopwords()?;
    let patterns = load_patterns(&config.patterns).context("pattern file failed to load")?;
    let embeddings =
        load_embeddings(&config.embeddings).context("embedding file failed to load")?;
    let pairs = extract_isa_pairs(&corpus, &patterns, &stopwords);
    let store = build_variable_store(
        &pairs,
        config.min_count,
        config.min_plausibility,
        &embeddings,
        config.weight_mode,
        &stopwords,
    );
    eprintln!(
        "extracted {} pairs into {} variables",
        pairs.len(),
        store.len()
    );
    Ok(vec![write_artifact(
        config,
        VARIABLES_FILE,
        &store_to_jsonl(&store),
    )?])
}

pub fn run_lattice(config: &RunConfig) -> StageResult {
    let store = load_variables_artifact(config)?;
    let ctx = FormalContext::from_variable_store(&store);
    let lattice = lattice_from_context(&ctx);
    eprintln!(
        "lattice over {} objects, {} attributes: {} concepts",
        ctx.object_count(),
        ctx.attribute_count(),
        lattice.concept_count()
    );
    let mut artifacts = vec![write_artifact(
        config,
        LATTICE_FILE,
        &lattice_to_json(&lattice),
    )?];
    if config.emit_dot {
        artifacts.push(write_artifact(
            config,
            LATTICE_DOT_FILE,
            &lattice_to_dot(&lattice),
        )?);
    }
    Ok(artifacts)
}

pub fn run_gamma(config: &RunConfig) -> StageResult {
    let corpus = load_corpus_artifact(config)?;
    let stopwords = config.load_stopwords()?;
    let lexicon = compile_marker_lexicon(&config.lexicon).context("lexicon failed to compile")?;
    let gamma = build_gamma(&corpus, &lexicon, &stopwords);
    eprintln!("mined {} cause-effect entries", gamma.len());
    let entries = write_artifact(config, GAMMA_FILE, &gamma_to_jsonl(&gamma))?;
    let index_json =
        serde_json::to_string_pretty(&gamma_index(&gamma)).context("index serialization failed")?;
    let index = write_artifact(config, GAMMA_INDEX_FILE, &index_json)?;
    Ok(vec![entries, index])
}

pub fn run_score(config: &RunConfig) -> StageResult {
    let store = load_variables_artifact(config)?;
    let gamma_path = require_artifact(config, GAMMA_FILE, "gamma")?;
    let gamma = textcbn_core::causaldb::gamma_from_jsonl(&read_artifact(&gamma_path)?)
        .with_context(|| format!("cannot parse {}", gamma_path.display()))?;
    let scoring = ScoringConfig {
        mu: config.mu,
        weight_mode: config.weight_mode,
        bidirectional_tau: config.bidirectional_tau,
    };
    let scores = score_all_pairs(&store, &gamma, &scoring).context("scoring failed")?;
    eprintln!("scored {} variable pairs", scores.len());
    Ok(vec![write_artifact(
        config,
        SCORES_FILE,
        &scores_to_tsv(&scores),
    )?])
}

pub fn run_cbn(config: &RunConfig) -> StageResult {
    let corpus = load_corpus_artifact(config)?;
    let store = load_variables_artifact(config)?;
    let lattice_path = require_artifact(config, LATTICE_FILE, "lattice")?;
    let lattice = lattice_from_json(&read_artifact(&lattice_path)?)
        .with_context(|| format!("cannot parse {}", lattice_path.display()))?;
    let scores_path = require_artifact(config, SCORES_FILE, "score")?;
    let scores = scores_from_tsv(&read_artifact(&scores_path)?)
        .with_context(|| format!("cannot parse {}", scores_path.display()))?;

    let counts = count_cooccurrences(&corpus, &store, config.cooccurrence_unit);
    let metadata = RunMetadata {
        mu: config.mu,
        weight_mode: config.weight_mode.to_string(),
        bidirectional_tau: config.bidirectional_tau,
        cooccurrence_unit: config.cooccurrence_unit.to_string(),
        lexicon_hash: sha256_file(&config.lexicon)?,
        embedding_source: config.embeddings.display().to_string(),
        splitter: "marker-anchored".to_string(),
    };
    let cbn = assemble_cbn(
        &store,
        &scores,
        Some(&lattice),
        config.inherit_effect_side,
        &counts,
        config.mu,
        metadata,
    )
    .context("network assembly failed")?;
    eprintln!(
        "network: {} nodes, {} edges, {} bidirectional pairs, {} edges removed",
        cbn.graph.nodes.len(),
        cbn.graph.edges.len(),
        cbn.bidirectional_sidecar.len(),
        cbn.removed_edges.len()
    );
    let mut artifacts = vec![write_artifact(config, CBN_FILE, &cbn_to_json(&cbn))?];
    if config.emit_dot {
        artifacts.push(write_artifact(config, CBN_DOT_FILE, &cbn_to_dot(&cbn))?);
    }
    Ok(artifacts)
}

fn load_gold(config: &RunConfig) -> Result<Vec<textcbn_core::eval::AnnotatedTuple>, StageFailure> {
    let path = config
        .annotations
        .as_ref()
        .expect("validated before dispatch");
    Ok(load_annotations(path).context("annotations failed to load")?)
}

pub fn run_evaluate(config: &RunConfig) -> StageResult {
    let scores_path = require_artifact(config, SCORES_FILE, "score")?;
    let scores = scores_from_tsv(&read_artifact(&scores_path)?)
        .with_context(|| format!("cannot parse {}", scores_path.display()))?;
    let gold = load_gold(config)?;
    let predictions =
        predictions_from_scores(&scores, config.mu).context("classification failed")?;
    let report = evaluate(&predictions, &gold).context("evaluation failed")?;
    print!("{}", report.to_text());
    let json = serde_json::to_string_pretty(&report).context("report serialization failed")?;
    let mut artifacts = vec![write_artifact(config, EVAL_REPORT_FILE, &json)?];

    if config.baselines {
        let corpus = load_corpus_artifact(config)?;
        let store = load_variables_artifact(config)?;
        let gamma_path = require_artifact(config, GAMMA_FILE, "gamma")?;
        let gamma = textcbn_core::causaldb::gamma_from_jsonl(&read_artifact(&gamma_path)?)
            .with_context(|| format!("cannot parse {}", gamma_path.display()))?;
        let pairs: Vec<(String, String)> = gold
            .iter()
            .map(|t| (t.concept_a.clone(), t.concept_b.clone()))
            .collect();
        let labels = heuristic_baselines(&gamma, &corpus, &store, &pairs);
        let mut tsv = String::from("conceptA\tconceptB\tfrequency\tprecedence\tpmi\tprec_pmi\n");
        for row in &labels {
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                row.a, row.b, row.frequency, row.precedence, row.pmi, row.prec_pmi
            ));
        }
        for (name, pick) in [
            (
                "frequency",
                (|r: &textcbn_core::eval::BaselineLabels| r.frequency) as fn(&_) -> i8,
            ),
            ("precedence", |r| r.precedence),
            ("pmi", |r| r.pmi),
            ("prec-pmi", |r| r.prec_pmi),
        ] {
            let predictions: std::collections::BTreeMap<(String, String), i8> = labels
                .iter()
                .map(|r| ((r.a.clone(), r.b.clone()), pick(r)))
                .collect();
            let report = evaluate(&predictions, &gold).context("baseline evaluation failed")?;
            println!(
                "baseline {name:<11}: accuracy {:.4}  macro F1 {:.4}",
                report.accuracy, report.macro_f1
            );
        }
        artifacts.push(write_artifact(config, BASELINES_FILE, &tsv)?);
    }
    Ok(artifacts)
}

pub fn run_sweep(config: &RunConfig) -> StageResult {
    let scores_path = require_artifact(config, SCORES_FILE, "score")?;
    let scores = scores_from_tsv(&read_artifact(&scores_path)?)
        .with_context(|| format!("cannot parse {}", scores_path.display()))?;
    let gold = load_gold(config)?;
    let sweep = sweep_mu(&scores, &gold, &config.mu_grid).context("sweep failed")?;
    let best = sweep
        .points
        .iter()
        .max_by(|a, b| a.report.macro_f1.total_cmp(&b.report.macro_f1));
    if let Some(best) = best {
        eprintln!(
            "best macro-F1 {:.4} at mu = {} (majority baseline {:.4})",
            best.report.macro_f1, best.mu, sweep.majority_f1
        );
    }
    Ok(vec![write_artifact(
        config,
        SWEEP_FILE,
        &sweep_to_tsv(&sweep),
    )?])
}

/// Runs the whole pipeline, corpus through network. The evaluation commands
/// run separately since they need gold annotations.
pub fn run_all(config: &RunConfig) -> StageResult {
    let mut artifacts = Vec::new();
    artifacts.extend(run_ingest(config)?);
    artifacts.extend(run_variables(config)?);
    artifacts.extend(run_lattice(config)?);
    artifacts.extend(run_gamma(config)?);
    artifacts.extend(run_score(config)?);
    artifacts.extend(run_cbn(config)?);
    if config.annotations.is_some() {
        eprintln!("annotations configured; run `textcbn evaluate` and `textcbn sweep` for reports");
    }
    Ok(artifacts)
}
