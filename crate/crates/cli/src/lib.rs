//! Command-line driver for the concept-causality pipeline.
//!
//! Each subcommand runs one stage and persists its artifact into the output
//! directory; stages communicate only through those files. A manifest with
//! content hashes and the config snapshot is written after every command.

pub mod config;
pub mod manifest;
pub mod stages;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;
use manifest::Manifest;
use stages::StageFailure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Read and preprocess the corpus files.
    Ingest,
    /// Extract IsA pairs and build the variable store.
    Variables,
    /// Build the formal concept lattice over variables and values.
    Lattice,
    /// Mine the cause-effect evidence database.
    Gamma,
    /// Score causal relations between all variable pairs.
    Score,
    /// Assemble the causal Bayesian network.
    Cbn,
    /// Score predictions against an annotation file.
    Evaluate,
    /// Sweep the decision threshold over a grid and emit the F1 curve.
    Sweep,
    /// Run the whole pipeline: ingest through cbn.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Variables => "variables",
            Command::Lattice => "lattice",
            Command::Gamma => "gamma",
            Command::Score => "score",
            Command::Cbn => "cbn",
            Command::Evaluate => "evaluate",
            Command::Sweep => "sweep",
            Command::All => "all",
        }
    }

    fn needs_annotations(self) -> bool {
        matches!(self, Command::Evaluate | Command::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightModeArg {
    Cosine,
    OneMinusCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Sentence,
    Document,
}

/// Extract concept-level causal relations from text and assemble a causal
/// Bayesian network.
#[derive(Debug, Parser)]
#[command(name = "textcbn", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML config file; relative paths inside it resolve against its
    /// directory. Command-line flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Corpus input file (repeatable).
    #[arg(long, global = true)]
    pub corpus: Vec<PathBuf>,

    /// Embedding file (text format with a `<vocab> <dim>` header).
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,

    /// Causal marker lexicon (TSV).
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,

    /// IsA pattern templates, one per line.
    #[arg(long, global = true)]
    pub patterns: Option<PathBuf>,

    /// Stopword list, one token per line.
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,

    /// Directory for stage artifacts and the manifest.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,

    /// Gold annotation TSV (conceptA, conceptB, label).
    #[arg(long, global = true)]
    pub annotations: Option<PathBuf>,

    /// Decision threshold in [0, 1); scores within ±mu mean no relation
    /// [default: 0.05].
    #[arg(long, global = true)]
    pub mu: Option<f64>,

    /// How value relevance derives from cosine similarity
    /// [default: cosine].
    #[arg(long, global = true, value_enum)]
    pub weight_mode: Option<WeightModeArg>,

    /// Bi-directional detection threshold in (0, 1] [default: 0.75].
    #[arg(long, global = true)]
    pub bidirectional_tau: Option<f64>,

    /// Minimum IsA pair count [default: 2].
    #[arg(long, global = true)]
    pub min_count: Option<u64>,

    /// Minimum IsA pair plausibility [default: 0.01].
    #[arg(long, global = true)]
    pub min_plausibility: Option<f64>,

    /// Co-occurrence counting unit [default: sentence].
    #[arg(long, global = true, value_enum)]
    pub cooccurrence_unit: Option<UnitArg>,

    /// Also copy causal links onto sub-variables of the effect side.
    #[arg(long, global = true)]
    pub inherit_effect_side: bool,

    /// Worker threads [default: 0 = automatic].
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Also write DOT renderings of the lattice and the network.
    #[arg(long, global = true)]
    pub emit_dot: bool,

    /// Also score the heuristic direction baselines during `evaluate`.
    #[arg(long, global = true)]
    pub baselines: bool,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Vec<String>> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path).map_err(|e| vec![e.to_string()])?,
        None => {
            let mut errors = Vec::new();
            let mut require = |field: &str, value: &Option<PathBuf>| {
                value.clone().unwrap_or_else(|| {
                    errors.push(format!("{field}: required (no config file given)"));
                    PathBuf::new()
                })
            };
            let config = RunConfig {
                corpus: cli.corpus.clone(),
                embeddings: require("--embeddings", &cli.embeddings),
                lexicon: require("--lexicon", &cli.lexicon),
                patterns: require("--patterns", &cli.patterns),
                stopwords: require("--stopwords", &cli.stopwords),
                output_dir: require("--output-dir", &cli.output_dir),
                annotations: None,
                mu: 0.05,
                weight_mode: textcbn_core::scoring::WeightMode::Cosine,
                bidirectional_tau: 0.75,
                min_count: 2,
                min_plausibility: 0.01,
                cooccurrence_unit: textcbn_core::cbn::CooccurrenceUnit::Sentence,
                inherit_effect_side: false,
                workers: 0,
                mu_grid: (0..20).map(|i| i as f64 * 0.05).collect(),
                emit_dot: false,
                baselines: false,
            };
            if cli.corpus.is_empty() {
                errors.push("--corpus: required (no config file given)".to_string());
            }
            if !errors.is_empty() {
                return Err(errors);
            }
            config
        }
    };

    if !cli.corpus.is_empty() && cli.config.is_some() {
        config.corpus = cli.corpus.clone();
    }
    if let Some(p) = &cli.embeddings {
        config.embeddings = p.clone();
    }
    if let Some(p) = &cli.lexicon {
        config.lexicon = p.clone();
    }
    if let Some(p) = &cli.patterns {
        config.patterns = p.clone();
    }
    if let Some(p) = &cli.stopwords {
        config.stopwords = p.clone();
    }
    if let Some(p) = &cli.output_dir {
        config.output_dir = p.clone();
    }
    if let Some(p) = &cli.annotations {
        config.annotations = Some(p.clone());
    }
    if let Some(mu) = cli.mu {
        config.mu = mu;
    }
    if let Some(mode) = cli.weight_mode {
        config.weight_mode = match mode {
            WeightModeArg::Cosine => textcbn_core::scoring::WeightMode::Cosine,
            WeightModeArg::OneMinusCosine => textcbn_core::scoring::WeightMode::OneMinusCosine,
        };
    }
    if let Some(tau) = cli.bidirectional_tau {
        config.bidirectional_tau = tau;
    }
    if let Some(c) = cli.min_count {
        config.min_count = c;
    }
    if let Some(p) = cli.min_plausibility {
        config.min_plausibility = p;
    }
    if let Some(unit) = cli.cooccurrence_unit {
        config.cooccurrence_unit = match unit {
            UnitArg::Sentence => textcbn_core::cbn::CooccurrenceUnit::Sentence,
            UnitArg::Document => textcbn_core::cbn::CooccurrenceUnit::Document,
        };
    }
    if cli.inherit_effect_side {
        config.inherit_effect_side = true;
    }
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if cli.emit_dot {
        config.emit_dot = true;
    }
    if cli.baselines {
        config.baselines = true;
    }
    Ok(config)
}

/// Runs one command end to end and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("config error: {e}");
            }
            return 1;
        }
    };
    if let Err(errors) = config.validate(cli.command.needs_annotations()) {
        for e in errors {
            eprintln!("config error: {e}");
        }
        return 1;
    }

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot build worker pool: {e}");
            return 1;
        }
    };

    let outcome = pool.install(|| match cli.command {
        Command::Ingest => stages::run_ingest(&config),
        Command::Variables => stages::run_variables(&config),
        Command::Lattice => stages::run_lattice(&config),
        Command::Gamma => stages::run_gamma(&config),
        Command::Score => stages::run_score(&config),
        Command::Cbn => stages::run_cbn(&config),
        Command::Evaluate => stages::run_evaluate(&config),
        Command::Sweep => stages::run_sweep(&config),
        Command::All => stages::run_all(&config),
    });

    match outcome {
        Ok(artifacts) => {
            let mut manifest = Manifest::new(cli.command.name(), (&config).into());
            for path in &artifacts {
                if let Err(e) = manifest.record(path) {
                    eprintln!("manifest error: {e:#}");
                    return 1;
                }
            }
            match manifest.write(&config.output_dir) {
                Ok(path) => {
                    eprintln!("wrote {}", path.display());
                    0
                }
                Err(e) => {
                    eprintln!("manifest error: {e:#}");
                    1
                }
            }
        }
        Err(failure @ StageFailure::MissingArtifact { .. }) => {
            eprintln!("error: {failure}");
            2
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            1
        }
    }
}
