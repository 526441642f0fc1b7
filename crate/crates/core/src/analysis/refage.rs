//! Age, popularity and venue impact of the works papers build on.

use std::collections::{BTreeMap, BTreeSet};

use super::QuantileBinning;
use crate::corpus::{CitationIndex, Corpus, JournalMetrics};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAgeBin {
    pub bin: usize,
    pub references: usize,
    /// Mean of focal year minus reference year.
    pub mean_age: Option<f64>,
    /// Mean citation count of the referenced papers.
    pub mean_popularity: Option<f64>,
    /// Mean JIF over references whose journal has one.
    pub mean_reference_jif: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAgeProfile {
    pub bins: Vec<ReferenceAgeBin>,
    pub unresolved: usize,
    pub without_jif: usize,
}

/// Averages are over all resolved references of the bin's papers.
pub fn reference_age_profile(
    corpus: &Corpus,
    index: &CitationIndex,
    binning: &QuantileBinning,
    jif: &BTreeMap<String, JournalMetrics>,
) -> ReferenceAgeProfile {
    let mut unresolved = 0;
    let mut without_jif = 0;
    let mut bins = Vec::with_capacity(binning.k());
    for b in 0..binning.k() {
        let (mut n, mut age, mut pop) = (0usize, 0.0, 0.0);
        let (mut nj, mut jsum) = (0usize, 0.0);
        for id in binning.members(b) {
            let Some(focal) = corpus.get(id) else { continue };
            let mut seen = BTreeSet::new();
            for r in &focal.reference_ids {
                if !seen.insert(r) {
                    continue;
                }
                let Some(other) = corpus.get(r) else {
                    unresolved += 1;
                    continue;
                };
                n += 1;
                age += f64::from(focal.year() - other.year());
                pop += index.citation_count(r) as f64;
                match jif.get(&other.journal_id) {
                    Some(m) => {
                        nj += 1;
                        jsum += m.jif;
                    }
                    None => without_jif += 1,
                }
            }
        }
        let avg = |s: f64, c: usize| (c > 0).then(|| s / c as f64);
        bins.push(ReferenceAgeBin {
            bin: b,
            references: n,
            mean_age: avg(age, n),
            mean_popularity: avg(pop, n),
            mean_reference_jif: avg(jsum, nj),
        });
    }
    ReferenceAgeProfile { bins, unresolved, without_jif }
}
