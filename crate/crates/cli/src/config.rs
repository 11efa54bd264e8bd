use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use textcbn_core::cbn::CooccurrenceUnit;
use textcbn_core::scoring::WeightMode;

fn default_mu() -> f64 {
    0.05
}

fn default_tau() -> f64 {
    0.75
}

fn default_weight_mode() -> WeightMode {
    WeightMode::Cosine
}

fn default_min_count() -> u64 {
    2
}

fn default_min_plausibility() -> f64 {
    0.01
}

fn default_unit() -> CooccurrenceUnit {
    CooccurrenceUnit::Sentence
}

fn default_grid() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 0.05).collect()
}

/// The resolved pipeline configuration. Every field can come from the TOML
/// config file or a command-line override; relative paths in the file
/// resolve against the file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub embeddings: PathBuf,
    pub lexicon: PathBuf,
    pub patterns: PathBuf,
    pub stopwords: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub annotations: Option<PathBuf>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_weight_mode")]
    pub weight_mode: WeightMode,
    #[serde(default = "default_tau")]
    pub bidirectional_tau: f64,
    #[serde(default = "default_min_count")]
    pub min_count: u64,
    #[serde(default = "default_min_plausibility")]
    pub min_plausibility: f64,
    #[serde(default = "default_unit")]
    pub cooccurrence_unit: CooccurrenceUnit,
    #[serde(default)]
    pub inherit_effect_side: bool,
    /// 0 lets the thread pool pick.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_grid")]
    pub mu_grid: Vec<f64>,
    #[serde(default)]
    pub emit_dot: bool,
    /// Also score the heuristic direction baselines during `evaluate`.
    #[serde(default)]
    pub baselines: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_relative(base);
        Ok(config)
    }

    fn resolve_relative(&mut self, base: &Path) {
        let join = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        self.corpus = self.corpus.iter().map(&join).collect();
        self.embeddings = join(&self.embeddings);
        self.lexicon = join(&self.lexicon);
        self.patterns = join(&self.patterns);
        self.stopwords = join(&self.stopwords);
        self.output_dir = join(&self.output_dir);
        self.annotations = self.annotations.as_ref().map(&join);
    }

    /// Field-level validation; all problems are reported at once.
    pub fn validate(&self, need_annotations: bool) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.corpus.is_empty() {
            errors.push("corpus: no input files configured".to_string());
        }
        for p in &self.corpus {
            if !p.is_file() {
                errors.push(format!("corpus: {} does not exist", p.display()));
            }
        }
        for (field, path) in [
            ("embeddings", &self.embeddings),
            ("lexicon", &self.lexicon),
            ("patterns", &self.patterns),
            ("stopwords", &self.stopwords),
        ] {
            if !path.is_file() {
                errors.push(format!("{field}: {} does not exist", path.display()));
            }
        }
        if need_annotations {
            match &self.annotations {
                None => errors.push("annotations: required for this command".to_string()),
                Some(p) if !p.is_file() => {
                    errors.push(format!("annotations: {} does not exist", p.display()))
                }
                _ => {}
            }
        }
        if !(0.0..1.0).contains(&self.mu) {
            errors.push(format!("mu: {} outside [0, 1)", self.mu));
        }
        if !(self.bidirectional_tau > 0.0 && self.bidirectional_tau <= 1.0) {
            errors.push(format!(
                "bidirectional_tau: {} outside (0, 1]",
                self.bidirectional_tau
            ));
        } else if self.bidirectional_tau <= self.mu {
            errors.push(format!(
                "bidirectional_tau: {} must exceed mu ({})",
                self.bidirectional_tau, self.mu
            ));
        }
        if !(0.0..=1.0).contains(&self.min_plausibility) {
            errors.push(format!(
                "min_plausibility: {} outside [0, 1]",
                self.min_plausibility
            ));
        }
        for mu in &self.mu_grid {
            if !(0.0..1.0).contains(mu) {
                errors.push(format!("mu_grid: {mu} outside [0, 1)"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn load_stopwords(&self) -> anyhow::Result<BTreeSet<String>> {
        let text = std::fs::read_to_string(&self.stopwords).map_err(|e| {
            anyhow::anyhow!("cannot read stopwords {}: {e}", self.stopwords.display())
        })?;
        Ok(text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect())
    }
}

/// The config subset that identifies a run's inputs; worker count and output
/// location are execution details and stay out of the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSnapshot {
    pub corpus: Vec<PathBuf>,
    pub embeddings: PathBuf,
    pub lexicon: PathBuf,
    pub patterns: PathBuf,
    pub stopwords: PathBuf,
    pub annotations: Option<PathBuf>,
    pub mu: f64,
    pub weight_mode: WeightMode,
    pub bidirectional_tau: f64,
    pub min_count: u64,
    pub min_plausibility: f64,
    pub cooccurrence_unit: CooccurrenceUnit,
    pub inherit_effect_side: bool,
    pub mu_grid: Vec<f64>,
    pub emit_dot: bool,
    pub baselines: bool,
}

impl From<&RunConfig> for ConfigSnapshot {
    fn from(c: &RunConfig) -> Self {
        ConfigSnapshot {
            corpus: c.corpus.clone(),
            embeddings: c.embeddings.clone(),
            lexicon: c.lexicon.clone(),
            patterns: c.patterns.clone(),
            stopwords: c.stopwords.clone(),
            annotations: c.annotations.clone(),
            mu: c.mu,
            weight_mode: c.weight_mode,
            bidirectional_tau: c.bidirectional_tau,
            min_count: c.min_count,
            min_plausibility: c.min_plausibility,
            cooccurrence_unit: c.cooccurrence_unit,
            inherit_effect_side: c.inherit_effect_side,
            mu_grid: c.mu_grid.clone(),
            emit_dot: c.emit_dot,
            baselines: c.baselines,
        }
    }
}
