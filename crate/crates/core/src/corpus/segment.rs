use std::collections::BTreeSet;

/// Splits raw document text into sentences.
pub trait Segmenter: Send + Sync {
    fn split(&self, text: &str) -> Vec<String>;
}

/// Rule-based splitter on `.`, `!`, `?` with an abbreviation guard list.
///
/// A terminator ends a sentence only when followed by whitespace or the end
/// of input. A period after a known abbreviation or a single-letter initial
/// does not end a sentence. Blank lines always split.
#[derive(Debug, Clone)]
pub struct RuleSegmenter {
    abbreviations: BTreeSet<String>,
}

pub(crate) fn default_abbreviations() -> BTreeSet<String> {
    [
        "al", "approx", "cf", "dept", "dr", "e.g", "eg", "etc", "fig", "i.e", "ie", "jr", "mr",
        "mrs", "ms", "no", "p", "pp", "prof", "sr", "st", "vol", "vs",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

impl Default for RuleSegmenter {
    fn default() -> Self {
        RuleSegmenter::new(default_abbreviations())
    }
}

impl RuleSegmenter {
    pub fn new(abbreviations: BTreeSet<String>) -> Self {
        RuleSegmenter { abbreviations }
    }

    fn is_abbreviation(&self, text: &str, dot_pos: usize) -> bool {
        // Word immediately before the period, possibly containing inner dots
        // (as in "e.g."). Single letters are treated as initials.
        let before = &text[..dot_pos];
        let start = before
            .rfind(|c: char| c.is_whitespace() || c == '(' || c == '"')
            .map(|i| i + 1)
            .unwrap_or(0);
        let word = before[start..].trim_matches(|c: char| !c.is_alphanumeric() && c != '.');
        if word.is_empty() {
            return false;
        }
        let lower = word.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        if chars.len() == 1 && chars[0].is_alphabetic() {
            return true;
        }
        self.abbreviations.contains(lower.trim_end_matches('.'))
    }
}

impl Segmenter for RuleSegmenter {
    fn split(&self, text: &str) -> Vec<String> {
        let mut sentences = Vec::new();
        let mut start = 0usize;
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut i = 0usize;

        let flush = |from: usize, to: usize, out: &mut Vec<String>| {
            let s = text[from..to].trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
        };

        while i < chars.len() {
            let (pos, ch) = chars[i];
            if ch == '.' || ch == '!' || ch == '?' {
                // Swallow runs like "?!" or "...".
                let mut j = i;
                while j + 1 < chars.len() && matches!(chars[j + 1].1, '.' | '!' | '?') {
                    j += 1;
                }
                let at_end = j + 1 >= chars.len();
                let followed_by_space = !at_end && chars[j + 1].1.is_whitespace();
                let guarded = ch == '.' && i == j && self.is_abbreviation(text, pos);
                if (at_end || followed_by_space) && !guarded {
                    let end = if at_end { text.len() } else { chars[j + 1].0 };
                    flush(start, end, &mut sentences);
                    start = end;
                }
                i = j + 1;
                continue;
            }
            // Blank line = hard boundary.
            if ch == '\n' {
                let mut j = i + 1;
                let mut saw_second = false;
                while j < chars.len() && chars[j].1.is_whitespace() {
                    if chars[j].1 == '\n' {
                        saw_second = true;
                    }
                    j += 1;
                }
                if saw_second {
                    flush(start, pos, &mut sentences);
                    start = pos;
                    i = j;
                    continue;
                }
            }
            i += 1;
        }
        flush(start, text.len(), &mut sentences);
        sentences
    }
}
