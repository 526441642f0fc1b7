//! Inter- versus intra-disciplinary references and citations.

use std::collections::BTreeSet;

use perplex_stats::{fit_negbin, Design, RegressionFit};

use super::QuantileBinning;
use crate::corpus::{CitationIndex, Corpus};
use crate::{CoreError, Result};

/// Offset count used in place of zero intradisciplinary links.
pub const ZERO_INTRA_OFFSET: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discipline {
    Intra,
    Inter,
}

/// Intra iff every group of the other paper is among the focal paper's.
pub fn interdisciplinary_classify(focal: &BTreeSet<String>, other: &BTreeSet<String>) -> Discipline {
    if other.is_empty() {
        log::debug!("linked paper without field groups classified intra");
    }
    if other.is_subset(focal) {
        Discipline::Intra
    } else {
        Discipline::Inter
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounts {
    pub intra: u64,
    pub inter: u64,
}

impl LinkCounts {
    fn add(&mut self, d: Discipline) {
        match d {
            Discipline::Intra => self.intra += 1,
            Discipline::Inter => self.inter += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.intra + self.inter
    }

    /// inter / intra, absent when there are no intra links.
    pub fn ratio(&self) -> Option<f64> {
        (self.intra > 0).then(|| self.inter as f64 / self.intra as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaperLinks {
    pub doc_id: String,
    pub references: LinkCounts,
    pub citations: LinkCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinRatio {
    pub bin: usize,
    pub references: LinkCounts,
    pub citations: LinkCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterdisciplinarityProfile {
    pub bins: Vec<BinRatio>,
    pub papers: Vec<PaperLinks>,
    /// Inter reference count on log perplexity, offset ln(intra).
    pub reference_fit: Option<RegressionFit>,
    pub citation_fit: Option<RegressionFit>,
    /// Reference entries of binned papers that did not resolve.
    pub unresolved_references: usize,
    pub notes: Vec<String>,
}

fn offset(intra: u64) -> f64 {
    if intra == 0 {
        ZERO_INTRA_OFFSET.ln()
    } else {
        (intra as f64).ln()
    }
}

fn fit_links(
    binning: &QuantileBinning,
    papers: &[PaperLinks],
    pick: fn(&PaperLinks) -> LinkCounts,
) -> Result<RegressionFit> {
    let used: Vec<&PaperLinks> = papers.iter().filter(|p| pick(p).total() > 0).collect();
    let y: Vec<f64> = used.iter().map(|p| pick(p).inter as f64).collect();
    let off: Vec<f64> = used.iter().map(|p| offset(pick(p).intra)).collect();
    let x = used.iter().map(|p| binning.log_score(&p.doc_id)).collect::<Result<Vec<_>>>()?;
    let design = Design::with_intercept(y.len()).column("log_perplexity", x);
    Ok(fit_negbin(&y, &design, &off)?)
}

/// Classifies every resolved reference and citation of each binned paper.
/// Papers with no resolved links of a kind are left out of that kind's fit.
pub fn interdisciplinarity_profile(
    corpus: &Corpus,
    index: &CitationIndex,
    binning: &QuantileBinning,
) -> Result<InterdisciplinarityProfile> {
    let mut papers = Vec::with_capacity(binning.len());
    let mut bins: Vec<BinRatio> = (0..binning.k())
        .map(|bin| BinRatio { bin, references: LinkCounts::default(), citations: LinkCounts::default() })
        .collect();
    let mut unresolved = 0;
    let mut empty_focal = 0;
    for b in 0..binning.k() {
        for id in binning.members(b) {
            let focal =
                corpus.get(id).ok_or_else(|| CoreError::InvalidInput(format!("binned document {id} not in corpus")))?;
            if focal.field_groups.is_empty() {
                empty_focal += 1;
            }
            let mut refs = LinkCounts::default();
            let mut seen = BTreeSet::new();
            for r in &focal.reference_ids {
                if !seen.insert(r) {
                    continue;
                }
                match corpus.get(r) {
                    Some(other) => refs.add(interdisciplinary_classify(&focal.field_groups, &other.field_groups)),
                    None => unresolved += 1,
                }
            }
            let mut cites = LinkCounts::default();
            for c in index.cited_by(id) {
                if let Some(other) = corpus.get(c) {
                    cites.add(interdisciplinary_classify(&focal.field_groups, &other.field_groups));
                }
            }
            let bin = &mut bins[b];
            bin.references.intra += refs.intra;
            bin.references.inter += refs.inter;
            bin.citations.intra += cites.intra;
            bin.citations.inter += cites.inter;
            papers.push(PaperLinks { doc_id: id.clone(), references: refs, citations: cites });
        }
    }
    if papers.iter().all(|p| p.references.total() == 0) {
        return Err(CoreError::InvalidInput("no resolvable references among binned papers".into()));
    }
    let mut notes = Vec::new();
    if empty_focal > 0 {
        log::warn!("{empty_focal} binned papers have no field groups");
        notes.push(format!("{empty_focal} papers without field groups"));
    }
    let reference_fit =
        fit_links(binning, &papers, |p| p.references).map_err(|e| notes.push(format!("reference fit: {e}"))).ok();
    let citation_fit =
        fit_links(binning, &papers, |p| p.citations).map_err(|e| notes.push(format!("citation fit: {e}"))).ok();
    Ok(InterdisciplinarityProfile {
        bins,
        papers,
        reference_fit,
        citation_fit,
        unresolved_references: unresolved,
        notes,
    })
}
