//! Tokenization, perplexity, scoring backends and the synonym-stability
//! protocol.

mod import;
mod ngram;
mod stability;

pub use import::{import_token_logprobs, ImportReport, ImportedScores};
pub use ngram::{train_ngram, NGramModel, BOS, BOS_TOKEN, DEFAULT_DISCOUNT, EOS, EOS_TOKEN, UNK, UNK_FLOOR, UNK_TOKEN};
pub use stability::{synonym_stability, StabilityCurve, StabilityTrial, SynonymLexicon};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::{CoreError, Result};

/// Lowercased word tokens; each punctuation or symbol character is its own
/// token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() && !c.is_control() {
            out.push(c.to_lowercase().collect());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Lowercased word tokens with punctuation dropped.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(text).into_iter().filter(|t| t.chars().any(char::is_alphanumeric)).collect()
}

/// exp of the negative mean natural-log probability.
pub fn perplexity(logprobs: &[f64]) -> Result<f64> {
    if logprobs.is_empty() {
        return Err(CoreError::InvalidLogprobs("empty logprob sequence".into()));
    }
    if let Some(bad) = logprobs.iter().find(|v| !v.is_finite() || **v > 0.0) {
        return Err(CoreError::InvalidLogprobs(format!("logprob {bad} is not a finite value <= 0")));
    }
    let t = logprobs.len() as f64;
    Ok((-compensated_sum(logprobs) / t).exp())
}

/// Neumaier summation; keeps long abstracts within a few ulps of the exact
/// mean.
fn compensated_sum(x: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &v in x {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub doc_id: String,
    pub model_id: String,
    pub tokens: Vec<String>,
    pub logprobs: Vec<f64>,
    pub perplexity: f64,
}

impl ScoredDocument {
    pub fn new(doc_id: String, model_id: String, tokens: Vec<String>, logprobs: Vec<f64>) -> Result<Self> {
        if tokens.len() != logprobs.len() {
            return Err(CoreError::InvalidLogprobs(format!("{} tokens but {} logprobs", tokens.len(), logprobs.len())));
        }
        let perplexity = perplexity(&logprobs)?;
        Ok(Self { doc_id, model_id, tokens, logprobs, perplexity })
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }
}

pub trait ScoringBackend: Sync {
    fn model_id(&self) -> &str;
    fn score(&self, doc: &PaperRecord) -> Result<ScoredDocument>;
}

/// The built-in n-gram model under a caller-chosen identifier.
#[derive(Debug, Clone)]
pub struct NGramBackend {
    pub model: NGramModel,
    pub model_id: String,
}

impl NGramBackend {
    pub fn new(model: NGramModel, model_id: impl Into<String>) -> Self {
        Self { model, model_id: model_id.into() }
    }

    pub fn score_text(&self, doc_id: &str, text: &str) -> Result<ScoredDocument> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(CoreError::Unscoreable(doc_id.to_string()));
        }
        let logprobs = self.model.score_tokens(&tokens);
        ScoredDocument::new(doc_id.to_string(), self.model_id.clone(), tokens, logprobs)
    }
}

impl ScoringBackend for NGramBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn score(&self, doc: &PaperRecord) -> Result<ScoredDocument> {
        self.score_text(&doc.doc_id, &doc.abstract_text)
    }
}

/// Scores one paper's abstract.
pub fn score_document(backend: &dyn ScoringBackend, doc: &PaperRecord) -> Result<ScoredDocument> {
    if doc.abstract_text.trim().is_empty() {
        return Err(CoreError::Unscoreable(doc.doc_id.clone()));
    }
    backend.score(doc)
}

/// Scores many papers in parallel, preserving input order. Unscoreable
/// documents are returned by id instead of failing the batch.
pub fn score_all<'a>(
    backend: &dyn ScoringBackend,
    docs: impl IntoParallelIterator<Item = &'a PaperRecord>,
) -> (Vec<ScoredDocument>, Vec<String>) {
    let results: Vec<(String, Result<ScoredDocument>)> =
        docs.into_par_iter().map(|d| (d.doc_id.clone(), score_document(backend, d))).collect();
    let mut scored = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (id, r) in results {
        match r {
            Ok(s) => scored.push(s),
            Err(e) => {
                log::warn!("{id}: {e}");
                skipped.push(id);
            }
        }
    }
    (scored, skipped)
}
