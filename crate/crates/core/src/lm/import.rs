use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::{ScoredDocument, ScoringBackend};
use crate::corpus::PaperRecord;
use crate::{CoreError, Result};

#[derive(Deserialize)]
struct LogprobLine {
    doc_id: String,
    model_id: String,
    tokens: Vec<String>,
    logprobs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImportReport {
    pub loaded: usize,
    /// (1-based line number, reason)
    pub rejected: Vec<(usize, String)>,
}

/// Reads logprobs.jsonl. Perplexity is always recomputed from the logprobs;
/// any value the file carries is ignored.
pub fn import_token_logprobs<R: BufRead>(reader: R) -> Result<(Vec<ScoredDocument>, ImportReport)> {
    let mut docs = Vec::new();
    let mut report = ImportReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<LogprobLine>(&line)
            .map_err(CoreError::from)
            .and_then(|l| ScoredDocument::new(l.doc_id, l.model_id, l.tokens, l.logprobs));
        match parsed {
            Ok(d) => docs.push(d),
            Err(e) => report.rejected.push((i + 1, e.to_string())),
        }
    }
    report.loaded = docs.len();
    Ok((docs, report))
}

/// Externally scored documents served as a backend, keyed by doc_id.
#[derive(Debug, Clone)]
pub struct ImportedScores {
    model_id: String,
    docs: HashMap<String, ScoredDocument>,
}

impl ImportedScores {
    /// All documents must share one model_id; later duplicates are dropped.
    pub fn new(docs: Vec<ScoredDocument>) -> Result<Self> {
        let model_id = docs
            .first()
            .map(|d| d.model_id.clone())
            .ok_or_else(|| CoreError::InvalidInput("no imported documents".into()))?;
        let mut map = HashMap::with_capacity(docs.len());
        for d in docs {
            if d.model_id != model_id {
                return Err(CoreError::InvalidInput(format!("mixed model ids {model_id} and {}", d.model_id)));
            }
            map.entry(d.doc_id.clone()).or_insert(d);
        }
        Ok(Self { model_id, docs: map })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

impl ScoringBackend for ImportedScores {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn score(&self, doc: &PaperRecord) -> Result<ScoredDocument> {
        self.docs
            .get(&doc.doc_id)
            .cloned()
            .ok_or_else(|| CoreError::Unscoreable(format!("{}: no imported logprobs", doc.doc_id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recomputes_and_rejects() {
        let input = concat!(
            r#"{"doc_id":"a","model_id":"m","tokens":["a","b"],"logprobs":[-1.0,-3.0],"perplexity":99}"#,
            "\n",
            r#"{"doc_id":"b","model_id":"m","tokens":["a","b","c"],"logprobs":[-1.0,-3.0]}"#,
            "\n",
            r#"{"doc_id":"c","model_id":"m","tokens":["a"],"logprobs":[0.5]}"#,
            "\n",
            r#"{"doc_id":"d","model_id":"m","tokens":[],"logprobs":[]}"#,
            "\n{oops\n"
        );
        let (docs, report) = import_token_logprobs(input.as_bytes()).unwrap();
        assert_eq!(docs.len(), 1);
        assert!((docs[0].perplexity - 2f64.exp()).abs() < 1e-12);
        let lines: Vec<usize> = report.rejected.iter().map(|r| r.0).collect();
        assert_eq!(lines, [2, 3, 4, 5]);
        assert!(report.rejected[0].1.contains("3 tokens but 2 logprobs"));
    }

    #[test]
    fn mixed_models_rejected() {
        let a = ScoredDocument::new("a".into(), "m1".into(), vec!["x".into()], vec![-1.0]).unwrap();
        let b = ScoredDocument::new("b".into(), "m2".into(), vec!["x".into()], vec![-1.0]).unwrap();
        assert!(ImportedScores::new(vec![a, b]).is_err());
    }
}
