use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::preprocess::tokenize;

/// Dense word vectors with a fixed dimension.
///
/// Lookups of unknown tokens are explicit misses; nothing is silently mapped
/// to a zero vector.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("no embedding for any token of `{0}`")]
    OutOfVocabulary(String),
    #[error("`{0}` resolves to a zero vector")]
    ZeroVector(String),
}

/// Loads the text embedding format: a `<vocab_size> <dimension>` header line,
/// then one `token v1 .. vd` row per line. Duplicate tokens keep the last row.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore, EmbeddingError> {
    let content = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format_err = |line: usize, msg: String| EmbeddingError::Format {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| format_err(1, "empty embedding file".into()))?;
    let mut parts = header.split_whitespace();
    let vocab_size: usize = parts
        .next()
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| format_err(1, format!("bad header `{header}`")))?;
    let dimension: usize = parts
        .next()
        .and_then(|p| p.parse().ok())
        .filter(|d| *d > 0)
        .ok_or_else(|| format_err(1, format!("bad header `{header}`")))?;

    let mut vectors = HashMap::with_capacity(vocab_size);
    let mut rows = 0usize;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap().to_string();
        let vec: Result<Vec<f64>, _> = fields.map(|f| f.parse::<f64>()).collect();
        let vec = vec.map_err(|e| format_err(lineno, format!("bad float: {e}")))?;
        if vec.len() != dimension {
            return Err(format_err(
                lineno,
                format!("expected {dimension} components, found {}", vec.len()),
            ));
        }
        if vectors.insert(token.clone(), vec).is_some() {
            log::warn!("duplicate embedding row for `{token}`; keeping the last one");
        }
        rows += 1;
    }
    if rows != vocab_size {
        return Err(format_err(
            rows + 1,
            format!("header declares {vocab_size} rows, found {rows}"),
        ));
    }
    Ok(EmbeddingStore { dimension, vectors })
}

impl EmbeddingStore {
    pub fn new(dimension: usize) -> Self {
        EmbeddingStore {
            dimension,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, token: &str, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dimension, "vector dimension mismatch");
        self.vectors.insert(token.to_string(), vector);
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(|v| v.as_slice())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    /// Resolves a token or multiword phrase to a vector: the mean of the
    /// in-vocabulary constituent vectors.
    pub fn phrase_vector(&self, phrase: &str) -> Result<Vec<f64>, SimilarityError> {
        let tokens = tokenize(phrase);
        let mut sum = vec![0.0; self.dimension];
        let mut hits = 0usize;
        for tok in &tokens {
            if let Some(v) = self.vector(tok) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                hits += 1;
            }
        }
        if hits == 0 {
            return Err(SimilarityError::OutOfVocabulary(phrase.to_string()));
        }
        for s in sum.iter_mut() {
            *s /= hits as f64;
        }
        Ok(sum)
    }

    /// Cosine similarity of two tokens or phrases, in `[-1, 1]`.
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        let va = self.phrase_vector(a)?;
        let vb = self.phrase_vector(b)?;
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 {
            return Err(SimilarityError::ZeroVector(a.to_string()));
        }
        if nb == 0.0 {
            return Err(SimilarityError::ZeroVector(b.to_string()));
        }
        Ok(dot / (na * nb))
    }
}
