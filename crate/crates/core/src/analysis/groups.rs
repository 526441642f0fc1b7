//! Where labelled subsets (funders, awards, document types) fall across bins.

use std::collections::{BTreeMap, BTreeSet};

use perplex_stats::{fit_logistic, mann_whitney_u, Design, RegressionFit, TestResult};

use super::QuantileBinning;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupProfile {
    pub label: String,
    pub n: usize,
    pub counts: Vec<usize>,
    /// counts / n, summing to 1.
    pub shares: Vec<f64>,
    /// Membership on log perplexity over all binned documents.
    pub logistic: Option<RegressionFit>,
    /// Labelled against unlabelled perplexities.
    pub mann_whitney: Option<TestResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupProfiles {
    pub profiles: Vec<GroupProfile>,
    /// Labels with fewer than two binned documents.
    pub skipped: Vec<String>,
}

/// `labels` maps doc_id to the labels it carries; documents absent from the
/// binning are ignored.
pub fn group_profiles(binning: &QuantileBinning, labels: &BTreeMap<String, BTreeSet<String>>) -> Result<GroupProfiles> {
    let mut members: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (doc, ls) in labels {
        if binning.bin_of(doc).is_none() {
            continue;
        }
        for l in ls {
            members.entry(l.as_str()).or_default().insert(doc.as_str());
        }
    }
    let ids: Vec<&String> = binning.ranked_ids().collect();
    let logs = ids.iter().map(|id| binning.log_score(id)).collect::<Result<Vec<_>>>()?;

    let mut profiles = Vec::new();
    let mut skipped = Vec::new();
    for (label, docs) in members {
        if docs.len() < 2 {
            log::warn!("label {label}: fewer than 2 papers, skipped");
            skipped.push(label.to_string());
            continue;
        }
        let mut counts = vec![0usize; binning.k()];
        for d in &docs {
            counts[binning.bin_of(d).expect("filtered above")] += 1;
        }
        let n = docs.len();
        let shares = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mut notes = Vec::new();

        let y: Vec<f64> = ids.iter().map(|id| f64::from(u8::from(docs.contains(id.as_str())))).collect();
        let design = Design::with_intercept(ids.len()).column("log_perplexity", logs.clone());
        let logistic = fit_logistic(&y, &design).map_err(|e| notes.push(format!("logistic: {e}"))).ok();

        let mut inside = Vec::with_capacity(n);
        let mut outside = Vec::with_capacity(ids.len() - n);
        for id in &ids {
            let s = binning.score(id).expect("binned");
            if docs.contains(id.as_str()) {
                inside.push(s);
            } else {
                outside.push(s);
            }
        }
        let mann_whitney = mann_whitney_u(&inside, &outside).map_err(|e| notes.push(format!("mann-whitney: {e}"))).ok();
        profiles.push(GroupProfile { label: label.to_string(), n, counts, shares, logistic, mann_whitney, notes });
    }
    Ok(GroupProfiles { profiles, skipped })
}
