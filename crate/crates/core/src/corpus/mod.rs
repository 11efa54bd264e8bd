//! Corpus ingestion, sentence segmentation, token normalization, and the
//! embedding store backing all similarity computations.

mod embeddings;
mod preprocess;
mod segment;

pub use embeddings::{load_embeddings, EmbeddingError, EmbeddingStore, SimilarityError};
pub use preprocess::{
    preprocess_sentence, span_tokenize, stem_phrase, stem_token, tokenize, SpanToken, TokenKind,
};
pub use segment::{RuleSegmenter, Segmenter};

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifies a sentence by its document and position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceId {
    pub doc: String,
    pub idx: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    /// Position within the owning document.
    pub idx: usize,
    /// Original text of the sentence.
    pub raw: String,
    /// Lowercased word tokens, split on non-alphanumerics.
    pub tokens: Vec<String>,
    /// Stemmed non-stopword tokens, in token order.
    pub stems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

/// An immutable, preprocessed corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStore {
    pub documents: Vec<Document>,
    pub sentence_count: usize,
}

impl CorpusStore {
    pub fn sentences(&self) -> impl Iterator<Item = (&Document, &Sentence)> {
        self.documents
            .iter()
            .flat_map(|d| d.sentences.iter().map(move |s| (d, s)))
    }
}

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub stopwords: BTreeSet<String>,
    pub abbreviations: BTreeSet<String>,
}

impl IngestConfig {
    pub fn new(stopwords: BTreeSet<String>) -> Self {
        IngestConfig {
            stopwords,
            abbreviations: segment::default_abbreviations(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Utf8 { path: PathBuf, offset: usize },
    #[error("{path}:{line}: invalid document record: {msg}")]
    BadRecord {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("duplicate document id `{0}`")]
    DuplicateDocId(String),
}

/// Reads every input file into a [`CorpusStore`].
///
/// Plain-text files become one document each (id = file name); `.jsonl` /
/// `.ndjson` files contribute one document per line with fields `id` and
/// `text`. Documents are processed in input order, so the result does not
/// depend on the worker count.
pub fn ingest_corpus(paths: &[PathBuf], config: &IngestConfig) -> Result<CorpusStore, CorpusError> {
    let raw_docs: Vec<Vec<(String, String)>> = paths
        .par_iter()
        .map(|path| read_documents(path))
        .collect::<Result<_, _>>()?;

    let segmenter = RuleSegmenter::new(config.abbreviations.clone());
    let documents: Vec<Document> = raw_docs
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(id, text)| build_document(id, &text, &segmenter, &config.stopwords))
        .collect();

    let mut seen = BTreeSet::new();
    for doc in &documents {
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateDocId(doc.id.clone()));
        }
    }

    let sentence_count = documents.iter().map(|d| d.sentences.len()).sum();
    Ok(CorpusStore {
        documents,
        sentence_count,
    })
}

fn read_documents(path: &Path) -> Result<Vec<(String, String)>, CorpusError> {
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|e| CorpusError::Utf8 {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;

    let is_jsonl = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("ndjson"))
        .unwrap_or(false);

    if is_jsonl {
        let mut docs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: JsonlRecord =
                serde_json::from_str(line).map_err(|e| CorpusError::BadRecord {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            docs.push((rec.id, rec.text));
        }
        Ok(docs)
    } else {
        let id = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.to_string_lossy().into_owned());
        Ok(vec![(id, text)])
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
}

fn build_document(
    id: String,
    text: &str,
    segmenter: &RuleSegmenter,
    stopwords: &BTreeSet<String>,
) -> Document {
    let sentences = segmenter
        .split(text)
        .into_iter()
        .enumerate()
        .map(|(idx, raw)| {
            let (tokens, stems) = preprocess_sentence(&raw, stopwords);
            Sentence {
                idx,
                raw,
                tokens,
                stems,
            }
        })
        .collect();
    Document { id, sentences }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cfg(stop: &[&str]) -> IngestConfig {
        IngestConfig::new(stop.iter().map(|s| s.to_string()).collect())
    }

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn two_files_three_sentences_each() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(&dir, "a.txt", "One here. Two here. Three here.");
        let b = write_file(&dir, "b.txt", "Four here. Five here. Six here.");
        let store = ingest_corpus(&[a, b], &cfg(&[])).unwrap();
        assert_eq!(store.sentence_count, 6);
        assert_eq!(store.documents.len(), 2);
        assert_eq!(store.documents[0].id, "a.txt");
    }

    #[test]
    fn empty_file_yields_empty_document() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(&dir, "empty.txt", "");
        let store = ingest_corpus(&[a], &cfg(&[])).unwrap();
        assert_eq!(store.sentence_count, 0);
        assert_eq!(store.documents.len(), 1);
        assert!(store.documents[0].sentences.is_empty());
    }

    #[test]
    fn jsonl_documents() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(
            &dir,
            "docs.jsonl",
            "{\"id\":\"d1\",\"text\":\"Stress causes insomnia.\"}\n{\"id\":\"d2\",\"text\":\"He slept.\"}\n",
        );
        let store = ingest_corpus(&[a], &cfg(&[])).unwrap();
        assert_eq!(store.documents.len(), 2);
        assert_eq!(store.documents[0].id, "d1");
        assert_eq!(store.sentence_count, 2);
    }

    #[test]
    fn bad_jsonl_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(
            &dir,
            "docs.jsonl",
            "{\"id\":\"d1\",\"text\":\"ok\"}\nnot json\n",
        );
        let err = ingest_corpus(&[a], &cfg(&[])).unwrap_err();
        match err {
            CorpusError::BadRecord { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn invalid_utf8_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, [b'o', b'k', 0xff, b'x']).unwrap();
        let err = ingest_corpus(&[path], &cfg(&[])).unwrap_err();
        match err {
            CorpusError::Utf8 { offset, .. } => assert_eq!(offset, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let err = ingest_corpus(&[PathBuf::from("/nonexistent/xyz.txt")], &cfg(&[])).unwrap_err();
        match err {
            CorpusError::Io { path, .. } => assert!(path.ends_with("xyz.txt")),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn duplicate_doc_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_file(
            &dir,
            "docs.jsonl",
            "{\"id\":\"d\",\"text\":\"x\"}\n{\"id\":\"d\",\"text\":\"y\"}\n",
        );
        let err = ingest_corpus(&[a], &cfg(&[])).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateDocId(_)));
    }

    #[test]
    fn parallel_and_serial_ingest_agree() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for i in 0..6 {
            paths.push(write_file(
                &dir,
                &format!("d{i}.txt"),
                "Stress causes insomnia. He slept because he was tired. It rained.",
            ));
        }
        let config = cfg(&["he", "was", "it"]);

        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| ingest_corpus(&paths, &config).unwrap())
        };
        let one = run(1);
        let eight = run(8);
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&eight).unwrap()
        );
    }
}
