//! Word-frequency contrasts between high- and low-perplexity groups.

use std::collections::{BTreeMap, BTreeSet};

use perplex_stats::TestResult;

use super::chi2_2x2;
use crate::lm::word_tokens;
use crate::{CoreError, Result};

pub const DEFAULT_MIN_COUNT: u64 = 20;
pub const DEFAULT_UNCERTAINTY_LEXICON: [&str; 4] = ["perhaps", "maybe", "likely", "might"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// More frequent in the high group (r > 1).
    High,
    Low,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::High => "high",
            Orientation::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconRatio {
    pub word: String,
    pub count_high: u64,
    pub count_low: u64,
    pub freq_high: f64,
    pub freq_low: f64,
    /// freq_high / freq_low
    pub r: f64,
    /// max(r, 1/r)
    pub display_value: f64,
    pub orientation: Orientation,
}

impl LexiconRatio {
    fn new(word: String, count_high: u64, total_high: u64, count_low: u64, total_low: u64) -> Self {
        let freq_high = count_high as f64 / total_high as f64;
        let freq_low = count_low as f64 / total_low as f64;
        let r = freq_high / freq_low;
        let (display_value, orientation) = if r > 1.0 { (r, Orientation::High) } else { (1.0 / r, Orientation::Low) };
        Self { word, count_high, count_low, freq_high, freq_low, r, display_value, orientation }
    }
}

fn count_words<S: AsRef<str>>(texts: &[S]) -> (BTreeMap<String, u64>, u64) {
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for t in texts {
        for w in word_tokens(t.as_ref()) {
            *counts.entry(w).or_default() += 1;
            total += 1;
        }
    }
    (counts, total)
}

/// Frequency ratios for words seen at least `min_count` times in each group,
/// sorted by |ln r| descending then word.
pub fn word_ratio_analysis<S: AsRef<str>>(high: &[S], low: &[S], min_count: u64) -> Result<Vec<LexiconRatio>> {
    if high.is_empty() || low.is_empty() {
        return Err(CoreError::InvalidInput("both text groups must be nonempty".into()));
    }
    let (ch, th) = count_words(high);
    let (cl, tl) = count_words(low);
    if th == 0 || tl == 0 {
        return Err(CoreError::InvalidInput("a text group has no word tokens".into()));
    }
    let min_count = min_count.max(1);
    let mut out: Vec<LexiconRatio> = ch
        .iter()
        .filter_map(|(w, &a)| {
            let b = *cl.get(w)?;
            (a >= min_count && b >= min_count).then(|| LexiconRatio::new(w.clone(), a, th, b, tl))
        })
        .collect();
    out.sort_by(|a, b| b.r.ln().abs().total_cmp(&a.r.ln().abs()).then_with(|| a.word.cmp(&b.word)));
    Ok(out)
}

/// 2×2 χ² of set-member tokens versus all other tokens across the groups.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSetTest {
    pub name: String,
    pub hits_high: u64,
    pub tokens_high: u64,
    pub hits_low: u64,
    pub tokens_low: u64,
    pub test: TestResult,
    /// Adjusted residual of the (high, hit) cell.
    pub residual_high: f64,
}

pub fn term_set_tests<S: AsRef<str>>(
    high: &[S],
    low: &[S],
    sets: &[(String, BTreeSet<String>)],
) -> Result<Vec<TermSetTest>> {
    if high.is_empty() || low.is_empty() {
        return Err(CoreError::InvalidInput("both text groups must be nonempty".into()));
    }
    let (ch, th) = count_words(high);
    let (cl, tl) = count_words(low);
    sets.iter()
        .map(|(name, terms)| {
            let hh: u64 = terms.iter().filter_map(|t| ch.get(t)).sum();
            let hl: u64 = terms.iter().filter_map(|t| cl.get(t)).sum();
            let r = chi2_2x2([[hh as f64, (th - hh) as f64], [hl as f64, (tl - hl) as f64]])?;
            Ok(TermSetTest {
                name: name.clone(),
                hits_high: hh,
                tokens_high: th,
                hits_low: hl,
                tokens_low: tl,
                residual_high: r.residuals[0][0],
                test: r.test,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordFrequency {
    pub word: String,
    pub count_high: u64,
    pub freq_high: f64,
    pub count_low: u64,
    pub freq_low: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyResult {
    pub hits_high: u64,
    pub tokens_high: u64,
    pub hits_low: u64,
    pub tokens_low: u64,
    pub test: TestResult,
    pub per_word: Vec<WordFrequency>,
}

/// Lexicon hits against total word tokens in review comments of the two
/// groups, compared with a 2×2 χ².
pub fn uncertainty_word_rate<S: AsRef<str>>(
    comments_high: &[S],
    comments_low: &[S],
    lexicon: &BTreeSet<String>,
) -> Result<UncertaintyResult> {
    if lexicon.is_empty() {
        return Err(CoreError::InvalidInput("uncertainty lexicon is empty".into()));
    }
    let (ch, th) = count_words(comments_high);
    let (cl, tl) = count_words(comments_low);
    if th == 0 || tl == 0 {
        return Err(CoreError::InvalidInput("a comment group has no word tokens".into()));
    }
    let per_word: Vec<WordFrequency> = lexicon
        .iter()
        .map(|w| {
            let a = ch.get(w).copied().unwrap_or(0);
            let b = cl.get(w).copied().unwrap_or(0);
            WordFrequency {
                word: w.clone(),
                count_high: a,
                freq_high: a as f64 / th as f64,
                count_low: b,
                freq_low: b as f64 / tl as f64,
            }
        })
        .collect();
    let hh: u64 = per_word.iter().map(|w| w.count_high).sum();
    let hl: u64 = per_word.iter().map(|w| w.count_low).sum();
    let r = chi2_2x2([[hh as f64, (th - hh) as f64], [hl as f64, (tl - hl) as f64]])?;
    Ok(UncertaintyResult { hits_high: hh, tokens_high: th, hits_low: hl, tokens_low: tl, test: r.test, per_word })
}
