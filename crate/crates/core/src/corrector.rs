//! Sliding-window OCR post-correction over the n-gram lexicon.
//!
//! A word first goes through the general character map, which rewrites
//! glyphs that never occur in the target alphabet. The remaining errors are
//! found by sliding over grapheme positions and testing the windows 4, 3 and
//! 2 graphemes long; the first window whose count falls below the threshold is
//! replaced by its best single-grapheme substitution.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::text::{canonical, graphemes};

const DEFAULT_ALPHABET: &str = include_str!("../data/alphabet.txt");
const DEFAULT_GENERAL_MAP: &str = include_str!("../data/general_map.tsv");

#[derive(Debug, thiserror::Error)]
pub enum CorrectorError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("alphabet lists {0:?} twice")]
    DuplicateGrapheme(String),
    #[error("general map sends {source_g:?} to {target:?}, which is itself remapped")]
    ChainedMapping { source_g: String, target: String },
    #[error("general map lists {0:?} twice")]
    DuplicateMapping(String),
    #[error("invalid correction config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unconditional grapheme replacements applied before the window search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralCharMap {
    mapping: BTreeMap<String, String>,
}

impl Default for GeneralCharMap {
    fn default() -> Self {
        GeneralCharMap::parse(DEFAULT_GENERAL_MAP).expect("bundled general map is valid")
    }
}

impl GeneralCharMap {
    pub fn empty() -> Self {
        GeneralCharMap {
            mapping: BTreeMap::new(),
        }
    }

    pub fn new<I, S, T>(pairs: I) -> Result<Self, CorrectorError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut mapping = BTreeMap::new();
        for (s, t) in pairs {
            let s = canonical(s.as_ref());
            if mapping.insert(s.clone(), canonical(t.as_ref())).is_some() {
                return Err(CorrectorError::DuplicateMapping(s));
            }
        }
        for (s, t) in &mapping {
            if mapping.contains_key(t) {
                return Err(CorrectorError::ChainedMapping {
                    source_g: s.clone(),
                    target: t.clone(),
                });
            }
        }
        Ok(GeneralCharMap { mapping })
    }

    /// `source<TAB>target` per line; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, CorrectorError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let (s, t) = raw.split_once('\t').ok_or(CorrectorError::Format {
                line: idx + 1,
                message: "expected \"source<TAB>target\"".into(),
            })?;
            for side in [s, t] {
                if graphemes(side).len() != 1 {
                    return Err(CorrectorError::Format {
                        line: idx + 1,
                        message: format!("{side:?} is not a single grapheme"),
                    });
                }
            }
            pairs.push((s.to_string(), t.to_string()));
        }
        GeneralCharMap::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorrectorError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Default pairs extended (and overridden) by `extra`.
    pub fn extended_with(&self, extra: &GeneralCharMap) -> Result<Self, CorrectorError> {
        let mut merged = self.mapping.clone();
        merged.extend(extra.mapping.clone());
        GeneralCharMap::new(merged)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn get(&self, grapheme: &str) -> Option<&str> {
        self.mapping.get(grapheme).map(String::as_str)
    }

    pub fn apply_graphemes(&self, word: &mut [String]) {
        for g in word.iter_mut() {
            if let Some(t) = self.mapping.get(g.as_str()) {
                *g = t.clone();
            }
        }
    }
}

/// Replaces every mapped grapheme of `word`, left to right, in one pass.
pub fn apply_general_map(word: &str, map: &GeneralCharMap) -> String {
    let mut g = graphemes(word);
    map.apply_graphemes(&mut g);
    g.concat()
}

/// Substitution candidates, in the order they are tried.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    graphemes: Vec<String>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::parse(DEFAULT_ALPHABET).expect("bundled alphabet is valid")
    }
}

impl Alphabet {
    pub fn new<I, S>(items: I) -> Result<Self, CorrectorError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out: Vec<String> = Vec::new();
        for (idx, item) in items.into_iter().enumerate() {
            let g = canonical(item.as_ref());
            if graphemes(&g).len() != 1 {
                return Err(CorrectorError::Format {
                    line: idx + 1,
                    message: format!("{g:?} is not a single grapheme"),
                });
            }
            if out.contains(&g) {
                return Err(CorrectorError::DuplicateGrapheme(g));
            }
            out.push(g);
        }
        if out.is_empty() {
            return Err(CorrectorError::EmptyAlphabet);
        }
        Ok(Alphabet { graphemes: out })
    }

    /// One grapheme per line; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, CorrectorError> {
        Alphabet::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorrectorError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn graphemes(&self) -> &[String] {
        &self.graphemes
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }
}

/// What the window search does when a flagged window has no acceptable
/// substitution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnresolvedWindow {
    /// Leave the window as is and move to the next position.
    #[default]
    Advance,
    /// Keep testing shorter windows at the same position.
    TryShorter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionConfig {
    pub thres: u64,
    pub max_window: usize,
    pub min_window: usize,
    pub unresolved: UnresolvedWindow,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            thres: 5,
            max_window: 4,
            min_window: 2,
            unresolved: UnresolvedWindow::Advance,
        }
    }
}

impl CorrectionConfig {
    pub fn validate(&self) -> Result<(), CorrectorError> {
        if self.thres < 1 {
            return Err(CorrectorError::Config("thres must be at least 1".into()));
        }
        if self.min_window < 2 || self.max_window > 4 || self.min_window > self.max_window {
            return Err(CorrectorError::Config(format!(
                "window range {}..={} must lie within 2..=4",
                self.min_window, self.max_window
            )));
        }
        Ok(())
    }
}

/// Best single-grapheme substitution of `sub` for words of length `n`.
///
/// Candidates are scanned by position, then alphabet order, and only a
/// strictly higher count displaces the current best. The original is returned
/// unless the best count reaches the threshold.
pub fn correct_subword(
    sub: &[String],
    n: u32,
    lex: &Lexicon,
    abc: &Alphabet,
    cfg: &CorrectionConfig,
) -> Vec<String> {
    let mut best: Vec<String> = sub.to_vec();
    let mut max_prob = lex.count(&sub.concat(), n);
    let mut candidate: Vec<String> = sub.to_vec();
    for i in 0..sub.len() {
        for g in abc.graphemes() {
            candidate[i].clone_from(g);
            let current = lex.count(&candidate.concat(), n);
            if current > max_prob {
                max_prob = current;
                best.clone_from(&candidate);
            }
        }
        candidate[i].clone_from(&sub[i]);
    }
    if max_prob < cfg.thres {
        sub.to_vec()
    } else {
        best
    }
}

/// Lexicon, alphabet, general map and thresholds bundled for repeated use.
#[derive(Debug, Clone)]
pub struct Corrector {
    pub lexicon: Lexicon,
    pub alphabet: Alphabet,
    pub general_map: GeneralCharMap,
    pub config: CorrectionConfig,
}

impl Corrector {
    pub fn new(
        lexicon: Lexicon,
        alphabet: Alphabet,
        general_map: GeneralCharMap,
        config: CorrectionConfig,
    ) -> Result<Self, CorrectorError> {
        config.validate()?;
        Ok(Corrector {
            lexicon,
            alphabet,
            general_map,
            config,
        })
    }

    /// Corrects a single whitespace-free token.
    pub fn correct_word(&self, word: &str) -> String {
        let mut g = graphemes(word);
        self.general_map.apply_graphemes(&mut g);
        let n = self.lexicon.length_of(&g);
        let len = g.len();
        let cfg = &self.config;
        let mut i = 0;
        while i < len {
            // windows that would run past the end are skipped, not a stop
            for j in (cfg.min_window..=cfg.max_window).rev().filter(|j| i + j <= len) {
                let window = &g[i..i + j];
                if self.lexicon.count(&window.concat(), n) < cfg.thres {
                    let fixed = correct_subword(window, n, &self.lexicon, &self.alphabet, cfg);
                    let changed = fixed != window;
                    g.splice(i..i + j, fixed);
                    if changed || cfg.unresolved == UnresolvedWindow::Advance {
                        break;
                    }
                }
            }
            i += 1;
        }
        g.concat()
    }

    /// Corrects each whitespace-separated token, keeping whitespace runs as they are.
    pub fn correct_text(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut token = String::new();
        for c in text.chars() {
            if c.is_whitespace() {
                if !token.is_empty() {
                    out.push_str(&self.correct_word(&token));
                    token.clear();
                }
                out.push(c);
            } else {
                token.push(c);
            }
        }
        if !token.is_empty() {
            out.push_str(&self.correct_word(&token));
        }
        out
    }
}
