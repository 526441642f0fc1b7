//! Line-delimited JSON readers and writers for papers and reviews.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{Corpus, DocType, PaperRecord, ReviewBundle};
use crate::{CoreError, Result};

/// Why an input line was not loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkipReason {
    Malformed,
    MissingAbstract,
    BadDate,
    DuplicateId,
    DateOrder,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Malformed => "malformed line",
            SkipReason::MissingAbstract => "missing abstract",
            SkipReason::BadDate => "bad date",
            SkipReason::DuplicateId => "duplicate id",
            SkipReason::DateOrder => "accepted before received",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub loaded: usize,
    pub skipped: BTreeMap<SkipReason, usize>,
    /// (1-based line number, reason, detail)
    pub diagnostics: Vec<(usize, SkipReason, String)>,
}

impl IngestReport {
    fn skip(&mut self, line: usize, reason: SkipReason, detail: impl Into<String>) {
        *self.skipped.entry(reason).or_default() += 1;
        self.diagnostics.push((line, reason, detail.into()));
    }

    pub fn skipped_for(&self, reason: SkipReason) -> usize {
        self.skipped.get(&reason).copied().unwrap_or(0)
    }

    pub fn total_skipped(&self) -> usize {
        self.skipped.values().sum()
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "loaded {} records", self.loaded)?;
        for (reason, n) in &self.skipped {
            write!(f, "; skipped {n} ({reason})")?;
        }
        Ok(())
    }
}

/// Parses "YYYY-MM-DD" or "YYYY-MM" (day 01).
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    match s.len() {
        10 => NaiveDate::parse_from_str(s, "%Y-%m-%d").ok(),
        7 => NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d").ok(),
        _ => None,
    }
}

/// Parses a cutoff. A bare "YYYY-MM" means the last day of that month.
pub fn parse_cutoff(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if s.len() == 7 {
        let first = parse_date(s)?;
        let next = first.checked_add_months(chrono::Months::new(1))?;
        next.pred_opt()
    } else {
        parse_date(s)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PaperLine {
    doc_id: String,
    #[serde(default)]
    title: String,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    pub_date: String,
    #[serde(default)]
    journal_id: String,
    #[serde(default = "default_doc_type")]
    doc_type: DocType,
    #[serde(default)]
    retracted: bool,
    #[serde(default)]
    field_groups: Vec<String>,
    #[serde(default)]
    funders: Vec<String>,
    #[serde(default)]
    reference_ids: Vec<String>,
}

fn default_doc_type() -> DocType {
    DocType::Research
}

/// Reads papers.jsonl. Bad lines are counted in the report, never fatal;
/// only I/O failures abort.
pub fn ingest_papers<R: BufRead>(reader: R) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut papers = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: PaperLine = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                report.skip(lineno, SkipReason::Malformed, e.to_string());
                continue;
            }
        };
        if raw.abstract_text.trim().is_empty() {
            report.skip(lineno, SkipReason::MissingAbstract, raw.doc_id);
            continue;
        }
        let Some(pub_date) = parse_date(&raw.pub_date) else {
            report.skip(lineno, SkipReason::BadDate, format!("{}: {:?}", raw.doc_id, raw.pub_date));
            continue;
        };
        if !seen.insert(raw.doc_id.clone()) {
            report.skip(lineno, SkipReason::DuplicateId, raw.doc_id);
            continue;
        }
        papers.push(PaperRecord {
            doc_id: raw.doc_id,
            title: raw.title,
            abstract_text: raw.abstract_text,
            pub_date,
            journal_id: raw.journal_id,
            doc_type: raw.doc_type,
            retracted: raw.retracted,
            field_groups: raw.field_groups.into_iter().collect(),
            funders: raw.funders.into_iter().collect(),
            reference_ids: raw.reference_ids,
        });
    }
    report.loaded = papers.len();
    Ok((Corpus::from_records(papers)?, report))
}

/// Writes the corpus back in papers.jsonl form (dates at day precision).
pub fn write_papers<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for p in corpus.iter() {
        let line = PaperLine {
            doc_id: p.doc_id.clone(),
            title: p.title.clone(),
            abstract_text: p.abstract_text.clone(),
            pub_date: p.pub_date.format("%Y-%m-%d").to_string(),
            journal_id: p.journal_id.clone(),
            doc_type: p.doc_type,
            retracted: p.retracted,
            field_groups: p.field_groups.iter().cloned().collect(),
            funders: p.funders.iter().cloned().collect(),
            reference_ids: p.reference_ids.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ReviewLine {
    doc_id: String,
    #[serde(default)]
    ratings: Vec<f64>,
    #[serde(default)]
    confidences: Vec<f64>,
    #[serde(default)]
    comments: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    received_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accepted_date: Option<String>,
}

/// Reads reviews.jsonl into bundles keyed by doc_id (sorted).
pub fn ingest_reviews<R: BufRead>(reader: R) -> Result<(BTreeMap<String, ReviewBundle>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: ReviewLine = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                report.skip(lineno, SkipReason::Malformed, e.to_string());
                continue;
            }
        };
        let parse_opt = |d: &Option<String>| -> std::result::Result<Option<NaiveDate>, ()> {
            match d.as_deref().map(str::trim) {
                None | Some("") => Ok(None),
                Some(s) => parse_date(s).map(Some).ok_or(()),
            }
        };
        let (Ok(received), Ok(accepted)) = (parse_opt(&raw.received_date), parse_opt(&raw.accepted_date)) else {
            report.skip(lineno, SkipReason::BadDate, raw.doc_id);
            continue;
        };
        if let (Some(r), Some(a)) = (received, accepted) {
            if a < r {
                report.skip(lineno, SkipReason::DateOrder, raw.doc_id);
                continue;
            }
        }
        if out.contains_key(&raw.doc_id) {
            report.skip(lineno, SkipReason::DuplicateId, raw.doc_id);
            continue;
        }
        out.insert(
            raw.doc_id.clone(),
            ReviewBundle {
                doc_id: raw.doc_id,
                ratings: raw.ratings,
                confidences: raw.confidences,
                comments: raw.comments,
                received_date: received,
                accepted_date: accepted,
            },
        );
    }
    report.loaded = out.len();
    Ok((out, report))
}

pub fn write_reviews<'a, W: Write>(reviews: impl IntoIterator<Item = &'a ReviewBundle>, mut out: W) -> Result<()> {
    for r in reviews {
        let line = ReviewLine {
            doc_id: r.doc_id.clone(),
            ratings: r.ratings.clone(),
            confidences: r.confidences.clone(),
            comments: r.comments.clone(),
            received_date: r.received_date.map(|d| d.format("%Y-%m-%d").to_string()),
            accepted_date: r.accepted_date.map(|d| d.format("%Y-%m-%d").to_string()),
        };
        serde_json::to_writer(&mut out, &line).map_err(CoreError::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
