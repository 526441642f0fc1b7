use std::collections::{HashMap, HashSet};

use super::Corpus;

/// Reverse citation graph over the corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CitationIndex {
    cited_by: HashMap<String, Vec<String>>,
    /// Reference entries pointing at ids absent from the corpus.
    pub unresolved: usize,
    /// Reference entries that resolved (after per-paper de-duplication).
    pub resolved: usize,
}

impl CitationIndex {
    /// Citing doc_ids of `doc_id`, in corpus order. Empty for unknown ids.
    pub fn cited_by(&self, doc_id: &str) -> &[String] {
        self.cited_by.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn citation_count(&self, doc_id: &str) -> usize {
        self.cited_by(doc_id).len()
    }
}

/// Builds the cited-by lists. A paper listing the same reference twice cites
/// it once; self-citations are kept.
pub fn resolve_citations(corpus: &Corpus) -> CitationIndex {
    let mut index = CitationIndex::default();
    for p in corpus.iter() {
        let mut seen = HashSet::new();
        for r in &p.reference_ids {
            if !seen.insert(r.as_str()) {
                continue;
            }
            if corpus.contains(r) {
                index.resolved += 1;
                index.cited_by.entry(r.clone()).or_default().push(p.doc_id.clone());
            } else {
                index.unresolved += 1;
            }
        }
    }
    index
}
