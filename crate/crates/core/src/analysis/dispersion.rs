//! Spread of a per-document value across perplexity bins.

use perplex_stats::describe::{mean, std_dev, variance};
use perplex_stats::{fit_linear, fligner_killeen, levene, white_test, Design, RegressionFit, TestResult};

use super::{quantile_bins, DocValues, QuantileBinning};
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BinDispersion {
    pub bin: usize,
    pub n: usize,
    pub mean: f64,
    /// Sample SD; 0 for a single member.
    pub sd: f64,
}

/// OLS of log within-bin variance on the bin index scaled to [0, 1]
/// (term "bin_index").
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedVarianceFit {
    pub bins: usize,
    pub bins_used: usize,
    /// Bins with fewer than two values or zero variance.
    pub bins_omitted: usize,
    pub fit: RegressionFit,
}

impl BinnedVarianceFit {
    pub fn slope(&self) -> perplex_stats::Term {
        self.fit.term("bin_index").expect("design has a bin_index column")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    pub bins: Vec<BinDispersion>,
    /// White's test of the value against log perplexity.
    pub white: Option<TestResult>,
    pub binned: Option<BinnedVarianceFit>,
    /// Top pooled bins against bottom pooled bins.
    pub levene: Option<TestResult>,
    pub fligner: Option<TestResult>,
    pub notes: Vec<String>,
}

fn lookup<'a>(values: &DocValues, ids: impl IntoIterator<Item = &'a String>) -> Result<Vec<f64>> {
    ids.into_iter()
        .map(|id| {
            values.get(id).copied().ok_or_else(|| CoreError::InvalidInput(format!("no value for binned document {id}")))
        })
        .collect()
}

/// Bins documents by `scores` into `variance_bins` quantile bins and regresses
/// ln(variance of `values` within bin) on i/(B−1).
pub fn binned_variance_fit(scores: &DocValues, values: &DocValues, variance_bins: usize) -> Result<BinnedVarianceFit> {
    let binning = quantile_bins(scores, variance_bins)?;
    let denom = (variance_bins - 1) as f64;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut omitted = 0;
    for b in 0..variance_bins {
        let v = lookup(values, binning.members(b))?;
        let var = if v.len() >= 2 { variance(&v) } else { 0.0 };
        if var > 0.0 && var.is_finite() {
            x.push(b as f64 / denom);
            y.push(var.ln());
        } else {
            omitted += 1;
        }
    }
    if y.len() < 3 {
        return Err(CoreError::InvalidInput(format!("only {} of {variance_bins} variance bins usable", y.len())));
    }
    let design = Design::with_intercept(x.len()).column("bin_index", x);
    let fit = fit_linear(&y, &design)?;
    Ok(BinnedVarianceFit { bins: variance_bins, bins_used: y.len(), bins_omitted: omitted, fit })
}

pub fn dispersion_profile(
    binning: &QuantileBinning,
    values: &DocValues,
    variance_bins: usize,
) -> Result<DispersionProfile> {
    let mut bins = Vec::with_capacity(binning.k());
    for b in 0..binning.k() {
        let v = lookup(values, binning.members(b))?;
        bins.push(BinDispersion {
            bin: b,
            n: v.len(),
            mean: mean(&v),
            sd: if v.len() >= 2 { std_dev(&v) } else { 0.0 },
        });
    }
    let mut notes = Vec::new();
    let ids: Vec<&String> = binning.ranked_ids().collect();
    let y = lookup(values, ids.iter().copied())?;
    let x = ids.iter().map(|id| binning.log_score(id)).collect::<Result<Vec<_>>>()?;
    let white = white_test(&y, &x).map_err(|e| notes.push(format!("white: {e}"))).ok();

    let scores: DocValues = ids.iter().map(|id| ((*id).clone(), binning.score(id).unwrap_or_default())).collect();
    let sub_values: DocValues = ids.iter().zip(&y).map(|(id, &v)| ((*id).clone(), v)).collect();
    let binned = binned_variance_fit(&scores, &sub_values, variance_bins)
        .map_err(|e| notes.push(format!("binned variance: {e}")))
        .ok();

    let (bottom, top) = binning.extremes();
    let bottom = lookup(values, bottom)?;
    let top = lookup(values, top)?;
    let levene = levene(&top, &bottom).map_err(|e| notes.push(format!("levene: {e}"))).ok();
    let fligner = fligner_killeen(&top, &bottom).map_err(|e| notes.push(format!("fligner: {e}"))).ok();
    Ok(DispersionProfile { bins, white, binned, levene, fligner, notes })
}
