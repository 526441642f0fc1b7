//! Paper and review records, streaming ingestion, citation resolution and
//! two-year journal impact factors.

mod citations;
mod ingest;
mod jif;

pub use citations::{resolve_citations, CitationIndex};
pub use ingest::{
    ingest_papers, ingest_reviews, parse_cutoff, parse_date, write_papers, write_reviews, IngestReport, SkipReason,
};
pub use jif::{compute_jif, paper_jif, JournalMetrics};

use std::collections::{BTreeSet, HashMap};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Research,
    Review,
}

impl DocType {
    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Research => "research",
            DocType::Review => "review",
        }
    }

    /// Whether the item counts in a JIF denominator.
    pub fn is_citable(self) -> bool {
        matches!(self, DocType::Research | DocType::Review)
    }
}

/// One publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRecord {
    pub doc_id: String,
    pub title: String,
    pub abstract_text: String,
    pub pub_date: NaiveDate,
    pub journal_id: String,
    pub doc_type: DocType,
    pub retracted: bool,
    pub field_groups: BTreeSet<String>,
    pub funders: BTreeSet<String>,
    pub reference_ids: Vec<String>,
}

impl PaperRecord {
    pub fn year(&self) -> i32 {
        self.pub_date.year()
    }
}

/// Peer-review data attached to one paper.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewBundle {
    pub doc_id: String,
    pub ratings: Vec<f64>,
    pub confidences: Vec<f64>,
    pub comments: Vec<String>,
    pub received_date: Option<NaiveDate>,
    pub accepted_date: Option<NaiveDate>,
}

/// Immutable, id-indexed collection of papers in ingestion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    papers: Vec<PaperRecord>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids.
    pub fn from_records(papers: Vec<PaperRecord>) -> crate::Result<Self> {
        let mut index = HashMap::with_capacity(papers.len());
        for (i, p) in papers.iter().enumerate() {
            if index.insert(p.doc_id.clone(), i).is_some() {
                return Err(crate::CoreError::InvalidInput(format!("duplicate doc_id {}", p.doc_id)));
            }
        }
        Ok(Self { papers, index })
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&PaperRecord> {
        self.index.get(doc_id).map(|&i| &self.papers[i])
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.index.contains_key(doc_id)
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PaperRecord> {
        self.papers.iter()
    }
}

/// Keeps exactly the records published strictly after `cutoff`.
pub fn filter_post_cutoff(corpus: &Corpus, cutoff: NaiveDate) -> Corpus {
    let kept: Vec<PaperRecord> = corpus.iter().filter(|p| p.pub_date > cutoff).cloned().collect();
    Corpus::from_records(kept).expect("subset of a valid corpus has unique ids")
}
