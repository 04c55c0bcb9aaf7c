//! The n-gram frequency dictionary.
//!
//! Every validated word contributes each contiguous window of 2, 3 and 4
//! graphemes. A window maps to a histogram over the lengths of the words it
//! was seen in, so a lookup answers "how often did this cluster occur inside
//! a word of this length".

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::text::{canonical, graphemes, LengthKey, WeightTable};

pub const FORMAT_VERSION: u32 = 1;
pub const MIN_CLUSTER: usize = 2;
pub const MAX_CLUSTER: usize = 4;

/// Characters replaced by whitespace before tokenizing a vocabulary entry.
pub const STRIPPED_PUNCTUATION: &[char] = &[
    ',', '_', '-', '"', '\u{201c}', '\u{201d}', '(', ')', ';', ':', '.',
];

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cluster {cluster:?} has {len} graphemes; expected 2 to 4")]
    InvalidClusterLength { cluster: String, len: usize },
    #[error("lexicon parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported lexicon version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ordered list of validated single words awaiting ingestion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VocabStack {
    words: Vec<String>,
}

impl VocabStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn extend(&mut self, other: VocabStack) {
        self.words.extend(other.words);
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }
}

/// Replaces the stripped punctuation with spaces.
pub fn strip_punctuation(raw: &str) -> String {
    raw.chars()
        .map(|c| if STRIPPED_PUNCTUATION.contains(&c) { ' ' } else { c })
        .collect()
}

/// Tokenizes one vocabulary entry into validated words.
///
/// Punctuation becomes whitespace, the entry is split on whitespace, and
/// single-grapheme tokens without diacritics (weight 1) are dropped.
pub fn normalize_entry(raw: &str, weights: &WeightTable) -> VocabStack {
    let cleaned = strip_punctuation(&canonical(raw));
    let words = cleaned
        .split_whitespace()
        .filter(|tok| {
            let g = graphemes(tok);
            !(g.len() == 1 && weights.weight(&g[0]) == 1)
        })
        .map(str::to_string)
        .collect();
    VocabStack { words }
}

/// Cluster → (word length → count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    clusters: BTreeMap<String, BTreeMap<u32, u64>>,
    word_count: u64,
    weights: WeightTable,
    length_key: LengthKey,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(WeightTable::default(), LengthKey::default())
    }
}

impl Lexicon {
    pub fn new(weights: WeightTable, length_key: LengthKey) -> Self {
        Lexicon {
            clusters: BTreeMap::new(),
            word_count: 0,
            weights,
            length_key,
        }
    }

    /// Builds a lexicon with default weights and grapheme-count length keys.
    pub fn build(stack: &VocabStack) -> Self {
        let mut lex = Lexicon::default();
        lex.ingest_all(stack);
        lex
    }

    pub fn ingest_all(&mut self, stack: &VocabStack) {
        for w in stack.words() {
            self.ingest(w);
        }
    }

    /// Adds every 2..=4 grapheme window of `word`.
    pub fn ingest(&mut self, word: &str) {
        let g = graphemes(word);
        let n = self.length_key.measure(&g, &self.weights);
        for k in MIN_CLUSTER..=MAX_CLUSTER {
            for window in g.windows(k) {
                *self
                    .clusters
                    .entry(window.concat())
                    .or_default()
                    .entry(n)
                    .or_insert(0) += 1;
            }
        }
        self.word_count += 1;
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn length_key(&self) -> LengthKey {
        self.length_key
    }

    pub fn word_count(&self) -> u64 {
        self.word_count
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clusters(&self) -> &BTreeMap<String, BTreeMap<u32, u64>> {
        &self.clusters
    }

    /// Length of `word` under this lexicon's length key.
    pub fn word_length(&self, word: &str) -> u32 {
        self.length_of(&graphemes(word))
    }

    pub fn length_of(&self, graphemes: &[String]) -> u32 {
        self.length_key.measure(graphemes, &self.weights)
    }

    /// Count of `cluster` among words of length `n`; 0 when unseen.
    pub fn prob(&self, cluster: &str, n: u32) -> Result<u64, LexiconError> {
        let g = graphemes(cluster);
        if !(MIN_CLUSTER..=MAX_CLUSTER).contains(&g.len()) {
            return Err(LexiconError::InvalidClusterLength {
                cluster: cluster.to_string(),
                len: g.len(),
            });
        }
        Ok(self.count(&g.concat(), n))
    }

    /// Unchecked lookup of an already canonical cluster key.
    pub fn count(&self, key: &str, n: u32) -> u64 {
        self.clusters
            .get(key)
            .and_then(|by_len| by_len.get(&n))
            .copied()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let file = LexiconFile {
            version: FORMAT_VERSION,
            length_key: self.length_key,
            word_count: self.word_count,
            weights: self.weights.clone(),
            clusters: self
                .clusters
                .iter()
                .map(|(k, v)| {
                    let inner = v.iter().map(|(n, c)| (n.to_string(), *c)).collect();
                    (k.clone(), inner)
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("lexicon serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
        let found = value
            .get("version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| LexiconError::Parse {
                line: 1,
                column: 1,
                message: "missing numeric \"version\"".into(),
            })?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(LexiconError::Version {
                found: found as u32,
                expected: FORMAT_VERSION,
            });
        }
        let file: LexiconFile = serde_json::from_str(text).map_err(parse_error)?;
        let mut clusters = BTreeMap::new();
        for (key, by_len) in file.clusters {
            let g = graphemes(&key);
            if !(MIN_CLUSTER..=MAX_CLUSTER).contains(&g.len()) || g.concat() != key {
                return Err(LexiconError::Parse {
                    line: 0,
                    column: 0,
                    message: format!("invalid cluster key {key:?}"),
                });
            }
            let mut inner = BTreeMap::new();
            for (n, count) in by_len {
                let n: u32 = n.parse().map_err(|_| LexiconError::Parse {
                    line: 0,
                    column: 0,
                    message: format!("cluster {key:?}: length key {n:?} is not an integer"),
                })?;
                if count == 0 {
                    return Err(LexiconError::Parse {
                        line: 0,
                        column: 0,
                        message: format!("cluster {key:?}: zero count stored"),
                    });
                }
                inner.insert(n, count);
            }
            clusters.insert(key, inner);
        }
        Ok(Lexicon {
            clusters,
            word_count: file.word_count,
            weights: file.weights,
            length_key: file.length_key,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn parse_error(e: serde_json::Error) -> LexiconError {
    LexiconError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LexiconFile {
    version: u32,
    #[serde(default)]
    length_key: LengthKey,
    #[serde(default)]
    word_count: u64,
    #[serde(default)]
    weights: WeightTable,
    clusters: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Summary of a vocabulary ingestion run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BuildSummary {
    pub entries: u64,
    pub words: u64,
    pub clusters: usize,
}

/// Streams entries (one per line) from `reader` into `lexicon`.
pub fn ingest_reader<R: BufRead>(lexicon: &mut Lexicon, reader: R) -> io::Result<u64> {
    let mut entries = 0;
    for line in reader.lines() {
        let line = line?;
        entries += 1;
        let stack = normalize_entry(&line, lexicon.weights());
        lexicon.ingest_all(&stack);
    }
    Ok(entries)
}

/// Convenience used by tests and the guide: validated words straight into a lexicon.
pub fn lexicon_from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Lexicon {
    let mut lex = Lexicon::default();
    for w in words {
        lex.ingest(w);
    }
    lex
}
