use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerKind {
    Discourse,
    Verb,
}

impl fmt::Display for MarkerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkerKind::Discourse => write!(f, "discourse"),
            MarkerKind::Verb => write!(f, "verb"),
        }
    }
}

/// Which side of the marker holds the cause in linear text order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerOrder {
    /// "A causes B", "A; therefore B" — text before the marker is the cause.
    CauseFirst,
    /// "B because A" — text before the marker is the effect.
    EffectFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerScope {
    /// Both clauses live in the same sentence.
    Intra,
    /// Sentence-initial occurrences may take the previous sentence as the
    /// missing side.
    Inter,
}

/// One causal marker: a token pattern plus its interpretation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerEntry {
    pub pattern: Vec<String>,
    pub kind: MarkerKind,
    pub order: MarkerOrder,
    pub scope: MarkerScope,
}

impl MarkerEntry {
    pub fn pattern_text(&self) -> String {
        self.pattern.join(" ")
    }
}

/// Causal connectives and verbs, longest pattern first so that multiword
/// markers win over their prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerLexicon {
    entries: Vec<MarkerEntry>,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("empty lexicon")]
    Empty,
}

impl MarkerLexicon {
    pub fn new(mut entries: Vec<MarkerEntry>) -> Result<Self, LexiconError> {
        if entries.is_empty() {
            return Err(LexiconError::Empty);
        }
        entries.sort_by(|a, b| {
            b.pattern
                .len()
                .cmp(&a.pattern.len())
                .then_with(|| a.pattern.cmp(&b.pattern))
                .then_with(|| a.kind.cmp(&b.kind))
        });
        Ok(MarkerLexicon { entries })
    }

    pub fn entries(&self) -> &[MarkerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the TSV lexicon format: `pattern<TAB>kind<TAB>order<TAB>scope`.
    pub fn parse(text: &str, path: &Path) -> Result<Self, LexiconError> {
        let err = |line: usize, msg: String| LexiconError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut entries = Vec::new();
        let mut seen: BTreeSet<(Vec<String>, MarkerKind)> = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(err(
                    lineno,
                    format!("expected 4 tab-separated columns, found {}", cols.len()),
                ));
            }
            let pattern: Vec<String> = cols[0]
                .split_whitespace()
                .map(|t| t.to_lowercase())
                .collect();
            if pattern.is_empty() {
                return Err(err(lineno, "empty pattern".into()));
            }
            let kind = match cols[1] {
                "discourse" => MarkerKind::Discourse,
                "verb" => MarkerKind::Verb,
                other => return Err(err(lineno, format!("unknown kind `{other}`"))),
            };
            let order = match cols[2] {
                "cause-first" => MarkerOrder::CauseFirst,
                "effect-first" => MarkerOrder::EffectFirst,
                other => return Err(err(lineno, format!("unknown order `{other}`"))),
            };
            let scope = match cols[3] {
                "intra" => MarkerScope::Intra,
                "inter" => MarkerScope::Inter,
                other => return Err(err(lineno, format!("unknown scope `{other}`"))),
            };
            if !seen.insert((pattern.clone(), kind)) {
                return Err(err(lineno, format!("duplicate marker `{}`", cols[0])));
            }
            entries.push(MarkerEntry {
                pattern,
                kind,
                order,
                scope,
            });
        }
        MarkerLexicon::new(entries)
    }
}

/// Loads and validates a lexicon TSV file.
pub fn compile_marker_lexicon(path: &Path) -> Result<MarkerLexicon, LexiconError> {
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    MarkerLexicon::parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<MarkerLexicon, LexiconError> {
        MarkerLexicon::parse(text, Path::new("test.tsv"))
    }

    #[test]
    fn parses_discourse_row() {
        let lex = parse("because\tdiscourse\teffect-first\tintra\n").unwrap();
        assert_eq!(lex.len(), 1);
        let e = &lex.entries()[0];
        assert_eq!(e.pattern, vec!["because"]);
        assert_eq!(e.kind, MarkerKind::Discourse);
        assert_eq!(e.order, MarkerOrder::EffectFirst);
        assert_eq!(e.scope, MarkerScope::Intra);
    }

    #[test]
    fn parses_verb_row() {
        let lex = parse("cause\tverb\tcause-first\tintra\n").unwrap();
        let e = &lex.entries()[0];
        assert_eq!(e.kind, MarkerKind::Verb);
        assert_eq!(e.order, MarkerOrder::CauseFirst);
    }

    #[test]
    fn empty_file_is_error() {
        assert!(matches!(parse(""), Err(LexiconError::Empty)));
        assert!(matches!(
            parse("# only a comment\n"),
            Err(LexiconError::Empty)
        ));
    }

    #[test]
    fn bad_rows_report_line() {
        let err = parse("because\tdiscourse\teffect-first\tintra\nbad row\n").unwrap_err();
        match err {
            LexiconError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
        let err = parse("x\tnoun\tcause-first\tintra\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
        let err = parse("x\tverb\tsideways\tintra\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
        let err = parse("x\tverb\tcause-first\tglobal\n").unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_pattern_kind_rejected() {
        let err = parse("cause\tverb\tcause-first\tintra\ncause\tverb\tcause-first\tintra\n")
            .unwrap_err();
        assert!(matches!(err, LexiconError::Parse { line: 2, .. }));
    }

    #[test]
    fn longest_pattern_sorts_first() {
        let lex =
            parse("cause\tverb\tcause-first\tintra\nas a result\tdiscourse\tcause-first\tinter\n")
                .unwrap();
        assert_eq!(lex.entries()[0].pattern.len(), 3);
    }
}
