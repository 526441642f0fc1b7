//! Journal impact and citations across perplexity bins.

use perplex_stats::describe::mean;
use perplex_stats::{correlation, fit_linear, lowess, CorrelationKind, Design, RegressionFit, TestResult};

use super::{DocValues, QuantileBinning};
use crate::Result;

pub const DEFAULT_LOWESS_FRAC: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct JifCitationBin {
    pub bin: usize,
    /// Members with a JIF.
    pub n: usize,
    pub mean_jif: f64,
    pub mean_citations: f64,
    /// Pearson r of citations on JIF within the bin.
    pub pearson_r: Option<f64>,
    pub r_squared: Option<f64>,
    /// Citations smoothed against JIF.
    pub lowess: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JifCitationProfile {
    pub bins: Vec<JifCitationBin>,
    /// Bins where no member has a JIF.
    pub omitted_bins: Vec<usize>,
    /// Citations on log perplexity and its square
    /// (terms "log_perplexity", "log_perplexity_sq").
    pub quadratic: Option<RegressionFit>,
    /// Pearson correlation of log perplexity with JIF.
    pub jif_correlation: Option<TestResult>,
    pub notes: Vec<String>,
}

/// `citations` should cover every binned document; missing entries count as
/// zero citations.
pub fn jif_citation_by_bin(
    binning: &QuantileBinning,
    jif: &DocValues,
    citations: &DocValues,
    lowess_frac: f64,
) -> Result<JifCitationProfile> {
    let mut bins = Vec::new();
    let mut omitted = Vec::new();
    let mut notes = Vec::new();
    for b in 0..binning.k() {
        let (mut js, mut cs) = (Vec::new(), Vec::new());
        for id in binning.members(b) {
            if let Some(&j) = jif.get(id) {
                js.push(j);
                cs.push(citations.get(id).copied().unwrap_or(0.0));
            }
        }
        if js.is_empty() {
            omitted.push(b);
            continue;
        }
        let r = correlation(CorrelationKind::Pearson, &js, &cs).ok().map(|t| t.statistic);
        let curve = lowess(&js, &cs, lowess_frac).unwrap_or_else(|e| {
            notes.push(format!("bin {b} lowess: {e}"));
            Vec::new()
        });
        bins.push(JifCitationBin {
            bin: b,
            n: js.len(),
            mean_jif: mean(&js),
            mean_citations: mean(&cs),
            pearson_r: r,
            r_squared: r.map(|r| r * r),
            lowess: curve,
        });
    }

    let ids: Vec<&String> = binning.ranked_ids().collect();
    let x = ids.iter().map(|id| binning.log_score(id)).collect::<Result<Vec<_>>>()?;
    let y: Vec<f64> = ids.iter().map(|id| citations.get(*id).copied().unwrap_or(0.0)).collect();
    let design = Design::with_intercept(x.len())
        .column("log_perplexity", x.clone())
        .column("log_perplexity_sq", x.iter().map(|v| v * v).collect());
    let quadratic = fit_linear(&y, &design).map_err(|e| notes.push(format!("quadratic: {e}"))).ok();

    let (mut xj, mut yj) = (Vec::new(), Vec::new());
    for (id, lx) in ids.iter().zip(&x) {
        if let Some(&j) = jif.get(*id) {
            xj.push(*lx);
            yj.push(j);
        }
    }
    let jif_correlation =
        correlation(CorrelationKind::Pearson, &xj, &yj).map_err(|e| notes.push(format!("jif correlation: {e}"))).ok();
    Ok(JifCitationProfile { bins, omitted_bins: omitted, quadratic, jif_correlation, notes })
}
