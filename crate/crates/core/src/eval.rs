//! Word accuracy against a ground-truth transcription.
//!
//! Both sides are NFC-normalized, stripped of the same punctuation the
//! vocabulary builder removes, and split on whitespace. Tokens are compared
//! by position; when the counts differ the shorter side is padded with
//! misses and a warning is recorded.

use serde::{Serialize, Serializer};

use crate::lexicon::strip_punctuation;
use crate::text::canonical;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("ground truth has no words")]
    EmptyGroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Hypothesis is raw recognition output.
    Before,
    /// Hypothesis is corrected output.
    After,
}

pub const TOKENIZATION: &str = "nfc, punctuation stripped, whitespace split, positional";

/// `correct / total` rounded half-up to four decimals, computed exactly.
pub fn accuracy_4dp(correct: u64, total: u64) -> String {
    assert!(total > 0 && correct <= total);
    let scaled = (correct as u128 * 20000 + total as u128) / (2 * total as u128);
    format!("{}.{:04}", scaled / 10000, scaled % 10000)
}

fn ser_accuracy<S: Serializer>(v: &Option<(u64, u64)>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some((c, t)) => {
            let raw = serde_json::value::RawValue::from_string(accuracy_4dp(*c, *t))
                .map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        }
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalReport {
    pub total_words: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct_before: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correct_after: Option<u64>,
    #[serde(serialize_with = "ser_accuracy", skip_serializing_if = "Option::is_none")]
    pub accuracy_before: Option<(u64, u64)>,
    #[serde(serialize_with = "ser_accuracy", skip_serializing_if = "Option::is_none")]
    pub accuracy_after: Option<(u64, u64)>,
    pub tokenization: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn accuracy(&self, mode: EvalMode) -> Option<String> {
        let v = match mode {
            EvalMode::Before => self.accuracy_before,
            EvalMode::After => self.accuracy_after,
        };
        v.map(|(c, t)| accuracy_4dp(c, t))
    }

    /// Takes the scores `other` has and this report lacks.
    pub fn merge(mut self, other: EvalReport) -> EvalReport {
        self.correct_before = self.correct_before.or(other.correct_before);
        self.correct_after = self.correct_after.or(other.correct_after);
        self.accuracy_before = self.accuracy_before.or(other.accuracy_before);
        self.accuracy_after = self.accuracy_after.or(other.accuracy_after);
        self.warnings.extend(other.warnings);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn eval_tokens(text: &str) -> Vec<String> {
    canonical(&strip_punctuation(text))
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

pub fn run_evaluate(hypothesis: &str, truth: &str, mode: EvalMode) -> Result<EvalReport, EvalError> {
    let truth = eval_tokens(truth);
    if truth.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let hyp = eval_tokens(hypothesis);
    let mut warnings = Vec::new();
    if hyp.len() != truth.len() {
        warnings.push(format!(
            "length mismatch: {} hypothesis tokens for {} truth tokens",
            hyp.len(),
            truth.len()
        ));
    }
    let total = truth.len() as u64;
    let correct = truth.iter().zip(&hyp).filter(|(t, h)| t == h).count() as u64;
    let score = Some((correct, total));
    let (before, after) = match mode {
        EvalMode::Before => (score, None),
        EvalMode::After => (None, score),
    };
    Ok(EvalReport {
        total_words: total,
        correct_before: before.map(|s| s.0),
        correct_after: after.map(|s| s.0),
        accuracy_before: before,
        accuracy_after: after,
        tokenization: TOKENIZATION,
        warnings,
    })
}
