//! Perplexity-binned analysis pipelines.

mod dispersion;
mod extreme;
mod groups;
mod interdisc;
mod jifcite;
mod lexical;
mod refage;
mod review;

pub use dispersion::{binned_variance_fit, dispersion_profile, BinDispersion, BinnedVarianceFit, DispersionProfile};
pub use extreme::{
    extreme_flags, extreme_share_profile, extreme_share_profile_with_controls, journal_extreme_flags, BinProportion,
    ExtremeShareProfile, Tail,
};
pub use groups::{group_profiles, GroupProfile, GroupProfiles};
pub use interdisc::{
    interdisciplinarity_profile, interdisciplinary_classify, BinRatio, Discipline, InterdisciplinarityProfile,
    LinkCounts, PaperLinks,
};
pub use jifcite::{jif_citation_by_bin, JifCitationBin, JifCitationProfile, DEFAULT_LOWESS_FRAC};
pub use lexical::{
    term_set_tests, uncertainty_word_rate, word_ratio_analysis, LexiconRatio, Orientation, TermSetTest,
    UncertaintyResult, WordFrequency, DEFAULT_MIN_COUNT, DEFAULT_UNCERTAINTY_LEXICON,
};
pub use refage::{reference_age_profile, ReferenceAgeBin, ReferenceAgeProfile};
pub use review::{review_variability, top_bottom_welch, ReviewMetrics};

use std::collections::{BTreeMap, HashMap};

use perplex_stats::{contingency_test, ContingencyResult, StatsError, TestResult};

use crate::{CoreError, Result};

/// doc_id → value.
pub type DocValues = BTreeMap<String, f64>;

/// Number of bins pooled at each end for top-versus-bottom comparisons.
pub const EXTREME_BINS: usize = 3;

/// Rank-based assignment of documents to `k` near-equal bins, lowest scores
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBinning {
    k: usize,
    bins: Vec<Vec<String>>,
    assignment: HashMap<String, usize>,
    scores: HashMap<String, f64>,
}

/// Sorts by (score, doc_id) and puts rank r in bin ⌊r·k/n⌋.
pub fn quantile_bins(scores: &DocValues, k: usize) -> Result<QuantileBinning> {
    if k < 2 {
        return Err(CoreError::InvalidInput(format!("need at least 2 bins, got {k}")));
    }
    if scores.len() < k {
        return Err(CoreError::InvalidInput(format!("{} documents cannot fill {k} bins", scores.len())));
    }
    if let Some((id, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
        return Err(CoreError::InvalidInput(format!("score for {id} is {v}")));
    }
    let mut order: Vec<(&String, f64)> = scores.iter().map(|(id, &v)| (id, v)).collect();
    // BTreeMap iteration is already id-ascending, so a stable sort on score
    // keeps the id tie-break.
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    let n = order.len();
    let mut bins = vec![Vec::new(); k];
    let mut assignment = HashMap::with_capacity(n);
    for (rank, (id, _)) in order.into_iter().enumerate() {
        let b = rank * k / n;
        bins[b].push(id.clone());
        assignment.insert(id.clone(), b);
    }
    Ok(QuantileBinning { k, bins, assignment, scores: scores.iter().map(|(id, &v)| (id.clone(), v)).collect() })
}

impl QuantileBinning {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn bin_of(&self, doc_id: &str) -> Option<usize> {
        self.assignment.get(doc_id).copied()
    }

    pub fn score(&self, doc_id: &str) -> Option<f64> {
        self.scores.get(doc_id).copied()
    }

    /// Members of bin `b` in ascending score order.
    pub fn members(&self, b: usize) -> &[String] {
        &self.bins[b]
    }

    pub fn bin_sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }

    /// All binned ids in ascending rank order.
    pub fn ranked_ids(&self) -> impl Iterator<Item = &String> {
        self.bins.iter().flatten()
    }

    /// How many bins to pool at each end: three, or fewer when k < 6.
    pub fn extreme_width(&self) -> usize {
        EXTREME_BINS.min(self.k / 2)
    }

    /// (bottom, top) pooled members.
    pub fn extremes(&self) -> (Vec<&String>, Vec<&String>) {
        let w = self.extreme_width();
        let bottom = self.bins[..w].iter().flatten().collect();
        let top = self.bins[self.k - w..].iter().flatten().collect();
        (bottom, top)
    }

    /// Natural log of the score; scores must be positive.
    pub fn log_score(&self, doc_id: &str) -> Result<f64> {
        let s = self.score(doc_id).ok_or_else(|| CoreError::InvalidInput(format!("{doc_id} is not binned")))?;
        if s <= 0.0 {
            return Err(CoreError::InvalidInput(format!("score {s} for {doc_id} has no logarithm")));
        }
        Ok(s.ln())
    }

    /// Keeps only the listed documents and re-bins them.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> Result<Self> {
        let sub: DocValues = ids.into_iter().filter_map(|id| self.score(id).map(|s| (id.clone(), s))).collect();
        quantile_bins(&sub, self.k)
    }
}

/// Pearson χ² on a 2×2 table, treating a zero marginal (no variation in one
/// factor) as no association instead of an error.
pub(crate) fn chi2_2x2(table: [[f64; 2]; 2]) -> Result<ContingencyResult> {
    let rows: Vec<Vec<f64>> = table.iter().map(|r| r.to_vec()).collect();
    match contingency_test(&rows) {
        Ok(r) => Ok(r),
        Err(StatsError::Degenerate(_)) => {
            let mut test = TestResult::new(0.0, 1.0);
            test.df = Some(1.0);
            test.effect_size = Some(0.0);
            Ok(ContingencyResult { test, expected: rows.clone(), residuals: vec![vec![0.0; 2]; 2] })
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(n: usize, f: impl Fn(usize) -> f64) -> DocValues {
        (0..n).map(|i| (format!("d{i:05}"), f(i))).collect()
    }

    #[test]
    fn equal_bins() {
        let b = quantile_bins(&scores(100, |i| i as f64), 10).unwrap();
        assert!(b.bin_sizes().iter().all(|&s| s == 10));
        let b = quantile_bins(&scores(8005, |i| ((i * 7919) % 8005) as f64), 10).unwrap();
        assert!(b.bin_sizes().iter().all(|&s| s == 800 || s == 801));
    }

    #[test]
    fn ties_follow_doc_id() {
        let b = quantile_bins(&scores(25, |_| 1.0), 5).unwrap();
        assert_eq!(b.members(0), ["d00000", "d00001", "d00002", "d00003", "d00004"]);
        assert_eq!(b.bin_of("d00024"), Some(4));
    }

    #[test]
    fn bins_monotone_in_rank() {
        let b = quantile_bins(&scores(97, |i| ((i * 31) % 97) as f64 * 0.5), 7).unwrap();
        let mut last = 0;
        for id in b.ranked_ids() {
            let bin = b.bin_of(id).unwrap();
            assert!(bin >= last);
            last = bin;
        }
        let sizes = b.bin_sizes();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn too_few_documents() {
        assert!(quantile_bins(&scores(5, |i| i as f64), 10).is_err());
        assert!(quantile_bins(&scores(5, |i| i as f64), 1).is_err());
    }
}
