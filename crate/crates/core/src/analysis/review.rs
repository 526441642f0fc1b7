//! Per-paper peer-review metrics.

use std::collections::BTreeMap;

use perplex_stats::describe::mean;
use perplex_stats::{welch_t, TestResult};

use super::{DocValues, QuantileBinning};
use crate::corpus::ReviewBundle;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ReviewMetrics {
    pub doc_id: String,
    pub perplexity: f64,
    pub n_ratings: usize,
    /// Highest minus lowest rating.
    pub disparity: Option<f64>,
    pub mean_rating: Option<f64>,
    pub mean_confidence: Option<f64>,
    /// Days from received to accepted.
    pub delay_days: Option<i64>,
}

/// Joins review bundles to scored documents, in doc_id order. Bundles without
/// a score are dropped.
pub fn review_variability(reviews: &BTreeMap<String, ReviewBundle>, scores: &DocValues) -> Vec<ReviewMetrics> {
    reviews
        .iter()
        .filter_map(|(id, r)| {
            let ppl = *scores.get(id)?;
            let ratings: Vec<f64> = r.ratings.iter().copied().filter(|v| v.is_finite()).collect();
            let confidences: Vec<f64> = r.confidences.iter().copied().filter(|v| v.is_finite()).collect();
            let disparity = (!ratings.is_empty()).then(|| {
                let hi = ratings.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = ratings.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            });
            Some(ReviewMetrics {
                doc_id: id.clone(),
                perplexity: ppl,
                n_ratings: ratings.len(),
                disparity,
                mean_rating: (!ratings.is_empty()).then(|| mean(&ratings)),
                mean_confidence: (!confidences.is_empty()).then(|| mean(&confidences)),
                delay_days: match (r.received_date, r.accepted_date) {
                    (Some(a), Some(b)) => Some((b - a).num_days()),
                    _ => None,
                },
            })
        })
        .collect()
}

/// Welch's t comparing `values` in the pooled top bins against the pooled
/// bottom bins. Documents without a value are ignored.
pub fn top_bottom_welch(binning: &QuantileBinning, values: &DocValues) -> Result<TestResult> {
    let (bottom, top) = binning.extremes();
    let pick = |ids: Vec<&String>| -> Vec<f64> { ids.into_iter().filter_map(|id| values.get(id).copied()).collect() };
    let (top, bottom) = (pick(top), pick(bottom));
    if top.len() < 2 || bottom.len() < 2 {
        return Err(CoreError::InvalidInput("too few valued documents in the extreme bins".into()));
    }
    Ok(welch_t(&top, &bottom)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_date;

    #[test]
    fn disparity_and_delay() {
        let mut reviews = BTreeMap::new();
        reviews.insert(
            "a".to_string(),
            ReviewBundle {
                doc_id: "a".into(),
                ratings: vec![3.0, 5.0, 8.0],
                confidences: vec![2.0, 4.0],
                comments: vec![],
                received_date: parse_date("2023-01-01"),
                accepted_date: parse_date("2023-03-02"),
            },
        );
        reviews.insert(
            "b".to_string(),
            ReviewBundle {
                doc_id: "b".into(),
                ratings: vec![6.0],
                confidences: vec![],
                comments: vec![],
                received_date: None,
                accepted_date: None,
            },
        );
        let scores: DocValues = [("a".to_string(), 10.0), ("b".to_string(), 20.0)].into();
        let m = review_variability(&reviews, &scores);
        assert_eq!(m[0].disparity, Some(5.0));
        assert_eq!(m[0].delay_days, Some(60));
        assert_eq!(m[0].mean_confidence, Some(3.0));
        assert_eq!(m[1].disparity, Some(0.0));
        assert_eq!(m[1].delay_days, None);
        assert_eq!(m[1].mean_confidence, None);
    }
}
