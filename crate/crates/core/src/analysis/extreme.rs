//! Share of flagged documents per perplexity bin.

use std::collections::{BTreeMap, BTreeSet};

use perplex_stats::{fit_logistic, ContingencyResult, Design, RegressionFit};

use super::{chi2_2x2, DocValues, QuantileBinning};
use crate::corpus::JournalMetrics;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinProportion {
    pub bin: usize,
    pub n: usize,
    pub flagged: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeShareProfile {
    pub bins: Vec<BinProportion>,
    /// [[top flagged, top unflagged], [bottom flagged, bottom unflagged]]
    pub pooled: [[f64; 2]; 2],
    pub chi2: ContingencyResult,
    /// Flag regressed on natural-log perplexity (term "log_perplexity").
    pub logistic: Option<RegressionFit>,
    pub logistic_note: Option<String>,
}

/// Flags the `share` fraction of documents at one end of `values`, ranking
/// by (value, doc_id). At least one document is flagged.
pub fn extreme_flags(values: &DocValues, share: f64, tail: Tail) -> BTreeMap<String, bool> {
    let mut order: Vec<(&String, f64)> = values.iter().map(|(k, &v)| (k, v)).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));
    if tail == Tail::Upper {
        order.reverse();
    }
    let m = ((share * order.len() as f64).ceil() as usize).clamp(1, order.len().max(1));
    order.iter().enumerate().map(|(i, (id, _))| ((*id).clone(), i < m)).collect()
}

/// Flags papers whose journal sits in the top or bottom `share` of journals
/// ranked by JIF (ties broken by journal id). `papers` yields
/// (doc_id, journal_id); papers in journals without a JIF are left out.
pub fn journal_extreme_flags<'a>(
    papers: impl IntoIterator<Item = (&'a str, &'a str)>,
    jif: &BTreeMap<String, JournalMetrics>,
    share: f64,
    tail: Tail,
) -> BTreeMap<String, bool> {
    let journal_values: DocValues = jif.iter().map(|(j, m)| (j.clone(), m.jif)).collect();
    let flagged: BTreeSet<String> =
        extreme_flags(&journal_values, share, tail).into_iter().filter_map(|(j, f)| f.then_some(j)).collect();
    papers
        .into_iter()
        .filter(|(_, j)| jif.contains_key(*j))
        .map(|(d, j)| (d.to_string(), flagged.contains(j)))
        .collect()
}

pub fn extreme_share_profile(binning: &QuantileBinning, flag: &BTreeMap<String, bool>) -> Result<ExtremeShareProfile> {
    extreme_share_profile_with_controls(binning, flag, &[])
}

/// As [`extreme_share_profile`], with categorical controls added to the
/// logistic fit as treatment-coded dummies.
pub fn extreme_share_profile_with_controls(
    binning: &QuantileBinning,
    flag: &BTreeMap<String, bool>,
    controls: &[(&str, &BTreeMap<String, String>)],
) -> Result<ExtremeShareProfile> {
    let flag_of = |id: &String| {
        flag.get(id).copied().ok_or_else(|| CoreError::InvalidInput(format!("no flag for binned document {id}")))
    };
    let mut bins = Vec::with_capacity(binning.k());
    for b in 0..binning.k() {
        let members = binning.members(b);
        let mut flagged = 0;
        for id in members {
            flagged += usize::from(flag_of(id)?);
        }
        bins.push(BinProportion {
            bin: b,
            n: members.len(),
            flagged,
            proportion: flagged as f64 / members.len() as f64,
        });
    }
    let w = binning.extreme_width();
    let pool = |range: std::ops::Range<usize>| {
        let (f, n) = bins[range].iter().fold((0, 0), |(f, n), b| (f + b.flagged, n + b.n));
        [f as f64, (n - f) as f64]
    };
    let pooled = [pool(binning.k() - w..binning.k()), pool(0..w)];
    let chi2 = chi2_2x2(pooled)?;

    let ids: Vec<&String> = binning.ranked_ids().collect();
    let y: Vec<f64> = ids.iter().map(|id| f64::from(u8::from(flag[*id]))).collect();
    let (logistic, logistic_note) = if y.iter().all(|&v| v == y[0]) {
        (None, Some("flag is constant".to_string()))
    } else {
        let mut design = Design::with_intercept(ids.len());
        design.push("log_perplexity", ids.iter().map(|id| binning.log_score(id)).collect::<Result<Vec<_>>>()?);
        for (name, map) in controls {
            let labels: Vec<String> =
                ids.iter().map(|id| map.get(*id).cloned().unwrap_or_else(|| "NA".to_string())).collect();
            design.push_dummies(name, &labels);
        }
        match fit_logistic(&y, &design) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(ExtremeShareProfile { bins, pooled, chi2, logistic, logistic_note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::quantile_bins;
    use perplex_stats::contingency_test;

    fn setup(n: usize) -> (QuantileBinning, DocValues) {
        let scores: DocValues = (0..n).map(|i| (format!("d{i:04}"), 1.0 + i as f64)).collect();
        (quantile_bins(&scores, 10).unwrap(), scores)
    }

    #[test]
    fn constant_flag() {
        let (b, s) = setup(100);
        let flag = s.keys().map(|k| (k.clone(), true)).collect();
        let p = extreme_share_profile(&b, &flag).unwrap();
        assert!(p.bins.iter().all(|x| x.proportion == 1.0));
        assert_eq!(p.chi2.test.statistic, 0.0);
        assert!(p.logistic.is_none());
    }

    #[test]
    fn above_median_flag() {
        let (b, s) = setup(100);
        let flag = s.iter().map(|(k, &v)| (k.clone(), v > 50.5)).collect();
        let p = extreme_share_profile(&b, &flag).unwrap();
        for x in &p.bins {
            assert_eq!(x.proportion, if x.bin >= 5 { 1.0 } else { 0.0 });
        }
        let direct = contingency_test(&[p.pooled[0].to_vec(), p.pooled[1].to_vec()]).unwrap();
        assert_eq!(direct.test.statistic, p.chi2.test.statistic);
        // perfectly separated by log perplexity
        assert!(p.logistic.is_none() && p.logistic_note.is_some());
    }

    #[test]
    fn missing_flag_is_error() {
        let (b, _) = setup(20);
        assert!(extreme_share_profile(&b, &BTreeMap::new()).is_err());
    }

    #[test]
    fn extreme_flag_counts() {
        let v: DocValues = (0..200).map(|i| (format!("x{i:03}"), i as f64)).collect();
        let up = extreme_flags(&v, 0.05, Tail::Upper);
        assert_eq!(up.values().filter(|f| **f).count(), 10);
        assert!(up["x199"] && !up["x189"] && up["x190"]);
        let lo = extreme_flags(&v, 0.01, Tail::Lower);
        assert!(lo["x000"] && lo["x001"] && !lo["x002"]);
    }
}
