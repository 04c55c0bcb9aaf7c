//! Canonical text handling shared by the lexicon and the corrector.
//!
//! All text is brought to composed form (NFC) and split into graphemes, where a
//! grapheme is a base character followed by any trailing combining marks. A
//! grapheme also carries a *weight*: by default one plus the number of
//! combining marks in its decomposed form, so `c̆` and `ŏ` weigh 2 and `ô̆`
//! weighs 3.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Composed (NFC) form of `text`.
pub fn canonical(text: &str) -> String {
    text.nfc().collect()
}

/// Splits `text` into graphemes after canonicalization.
///
/// A leading combining mark with no base becomes a grapheme of its own.
pub fn graphemes(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for c in text.nfc() {
        match out.last_mut() {
            Some(current) if is_combining_mark(c) => current.push(c),
            _ => out.push(c.to_string()),
        }
    }
    out
}

/// Number of combining marks in the decomposed form of `grapheme`.
pub fn combining_marks(grapheme: &str) -> u32 {
    grapheme.nfd().filter(|&c| is_combining_mark(c)).count() as u32
}

/// Per-grapheme weights used for the "weighted length" of a word.
///
/// Graphemes without an explicit entry weigh `1 + combining_marks(g)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightTable {
    overrides: BTreeMap<String, u32>,
}

#[derive(Debug, thiserror::Error)]
pub enum WeightTableError {
    #[error("line {line}: expected \"grapheme<TAB>weight\"")]
    Malformed { line: usize },
    #[error("line {line}: {entry:?} is not a single grapheme")]
    NotAGrapheme { line: usize, entry: String },
    #[error("line {line}: weight must be a positive integer")]
    BadWeight { line: usize },
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_override(mut self, grapheme: &str, weight: u32) -> Self {
        self.overrides.insert(canonical(grapheme), weight.max(1));
        self
    }

    pub fn overrides(&self) -> &BTreeMap<String, u32> {
        &self.overrides
    }

    pub fn weight(&self, grapheme: &str) -> u32 {
        match self.overrides.get(grapheme) {
            Some(&w) => w,
            None => 1 + combining_marks(grapheme),
        }
    }

    /// Parses the `grapheme<TAB>weight` text format. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, WeightTableError> {
        let mut table = WeightTable::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (g, w) = raw
                .split_once('\t')
                .ok_or(WeightTableError::Malformed { line })?;
            if graphemes(g).len() != 1 {
                return Err(WeightTableError::NotAGrapheme {
                    line,
                    entry: g.to_string(),
                });
            }
            let w: u32 = w
                .trim()
                .parse()
                .ok()
                .filter(|&w| w > 0)
                .ok_or(WeightTableError::BadWeight { line })?;
            table.overrides.insert(canonical(g), w);
        }
        Ok(table)
    }
}

/// A word split into graphemes together with its weighted length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atomization {
    pub graphemes: Vec<String>,
    pub weighted_length: u32,
}

impl Atomization {
    pub fn new(word: &str, weights: &WeightTable) -> Self {
        Self::from_graphemes(graphemes(word), weights)
    }

    pub fn from_graphemes(graphemes: Vec<String>, weights: &WeightTable) -> Self {
        let weighted_length = graphemes.iter().map(|g| weights.weight(g)).sum();
        Atomization {
            graphemes,
            weighted_length,
        }
    }

    pub fn grapheme_len(&self) -> usize {
        self.graphemes.len()
    }
}

/// Which measure of a word's length keys the n-gram dictionary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthKey {
    /// Number of graphemes.
    #[default]
    Graphemes,
    /// Sum of grapheme weights.
    Weighted,
}

impl LengthKey {
    pub fn measure(self, graphemes: &[String], weights: &WeightTable) -> u32 {
        match self {
            LengthKey::Graphemes => graphemes.len() as u32,
            LengthKey::Weighted => graphemes.iter().map(|g| weights.weight(g)).sum(),
        }
    }
}

impl fmt::Display for LengthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LengthKey::Graphemes => "graphemes",
            LengthKey::Weighted => "weighted",
        })
    }
}

impl FromStr for LengthKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "graphemes" => Ok(LengthKey::Graphemes),
            "weighted" => Ok(LengthKey::Weighted),
            other => Err(format!("unknown length key {other:?}")),
        }
    }
}
