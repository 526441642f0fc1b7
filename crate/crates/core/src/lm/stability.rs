//! Perplexity sensitivity to random synonym substitution.

use std::collections::HashMap;
use std::io::BufRead;

use perplex_stats::{describe, polyfit};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{perplexity, NGramBackend, ScoringBackend};
use crate::corpus::PaperRecord;
use crate::{CoreError, Result};

/// Groups of interchangeable lowercase words.
#[derive(Debug, Clone, Default)]
pub struct SynonymLexicon {
    groups: Vec<Vec<String>>,
    index: HashMap<String, usize>,
}

impl SynonymLexicon {
    /// Groups with fewer than two distinct words are dropped. A word listed in
    /// several groups belongs to the first.
    pub fn from_groups(groups: Vec<Vec<String>>) -> Self {
        let mut lex = Self::default();
        for g in groups {
            let mut words: Vec<String> = Vec::new();
            for w in g {
                let w = w.trim().to_lowercase();
                if !w.is_empty() && !words.contains(&w) && !lex.index.contains_key(&w) {
                    words.push(w);
                }
            }
            if words.len() < 2 {
                continue;
            }
            let gi = lex.groups.len();
            for w in &words {
                lex.index.insert(w.clone(), gi);
            }
            lex.groups.push(words);
        }
        lex
    }

    /// One tab-separated group per line.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut groups = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            groups.push(line.split('\t').map(str::to_string).collect());
        }
        Ok(Self::from_groups(groups))
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Other members of the word's group.
    pub fn alternatives<'a>(&'a self, word: &'a str) -> Option<impl Iterator<Item = &'a str> + 'a> {
        let g = &self.groups[*self.index.get(word)?];
        Some(g.iter().filter(move |w| *w != word).map(String::as_str))
    }

    pub fn covers(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTrial {
    pub doc_id: String,
    pub rep: usize,
    pub k: usize,
    /// (token position, replacement word)
    pub replacements: Vec<(usize, String)>,
    pub base_perplexity: f64,
    pub new_perplexity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCurve {
    pub ks: Vec<usize>,
    pub mean_abs_delta: Vec<f64>,
    /// Trials contributing to each k.
    pub trial_counts: Vec<usize>,
    /// Ascending-power coefficients of a quadratic in k (needs max_k ≥ 3).
    pub quadratic: Option<[f64; 3]>,
    /// Standard deviation of unmodified perplexities across the sample.
    pub reference_sd: f64,
    /// (doc, rep, k) combinations skipped for lack of k covered words.
    pub skipped: usize,
    pub trials: Vec<StabilityTrial>,
}

fn trial_rng(seed: u64, doc: usize, rep: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((doc as u64) << 32) ^ ((rep as u64) << 16) ^ k as u64);
    rng
}

/// For each k in 1..=max_k and each repetition, swaps k distinct
/// lexicon-covered tokens of every document for random group mates and
/// records the absolute perplexity change.
pub fn synonym_stability(
    backend: &NGramBackend,
    sample_docs: &[&PaperRecord],
    lexicon: &SynonymLexicon,
    max_k: usize,
    reps: usize,
    seed: u64,
) -> Result<StabilityCurve> {
    if max_k == 0 || reps == 0 {
        return Err(CoreError::InvalidInput("max_k and reps must be positive".into()));
    }
    let prepared: Vec<(Vec<String>, f64)> = sample_docs
        .iter()
        .map(|d| {
            let s = backend.score(d)?;
            Ok((s.tokens, s.perplexity))
        })
        .collect::<Result<_>>()?;

    let per_doc: Vec<(Vec<StabilityTrial>, usize)> = prepared
        .par_iter()
        .enumerate()
        .map(|(di, (tokens, base))| {
            let covered: Vec<usize> = (0..tokens.len()).filter(|&i| lexicon.covers(&tokens[i])).collect();
            let mut trials = Vec::new();
            let mut skipped = 0;
            for rep in 0..reps {
                for k in 1..=max_k {
                    if covered.len() < k {
                        skipped += 1;
                        continue;
                    }
                    let mut rng = trial_rng(seed, di, rep, k);
                    let mut picks: Vec<usize> =
                        sample(&mut rng, covered.len(), k).into_iter().map(|i| covered[i]).collect();
                    picks.sort_unstable();
                    let mut modified = tokens.clone();
                    let mut replacements = Vec::with_capacity(k);
                    for pos in picks {
                        let alts: Vec<&str> = lexicon.alternatives(&tokens[pos]).expect("covered").collect();
                        let w = alts[rng.random_range(0..alts.len())].to_string();
                        modified[pos] = w.clone();
                        replacements.push((pos, w));
                    }
                    let new =
                        perplexity(&backend.model.score_tokens(&modified)).expect("model probabilities are in (0, 1]");
                    trials.push(StabilityTrial {
                        doc_id: sample_docs[di].doc_id.clone(),
                        rep,
                        k,
                        replacements,
                        base_perplexity: *base,
                        new_perplexity: new,
                    });
                }
            }
            (trials, skipped)
        })
        .collect();

    let mut sums = vec![0.0; max_k];
    let mut counts = vec![0usize; max_k];
    let mut skipped = 0;
    let mut trials = Vec::new();
    for (t, s) in per_doc {
        skipped += s;
        for tr in t {
            sums[tr.k - 1] += (tr.new_perplexity - tr.base_perplexity).abs();
            counts[tr.k - 1] += 1;
            trials.push(tr);
        }
    }
    let mean_abs_delta: Vec<f64> =
        sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 }).collect();
    let ks: Vec<usize> = (1..=max_k).collect();
    let quadratic = if max_k >= 3 {
        let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        polyfit(&x, &mean_abs_delta, 2).ok().map(|c| [c[0], c[1], c[2]])
    } else {
        None
    };
    let base: Vec<f64> = prepared.iter().map(|p| p.1).collect();
    let reference_sd = if base.len() >= 2 { describe::std_dev(&base) } else { 0.0 };
    Ok(StabilityCurve { ks, mean_abs_delta, trial_counts: counts, quadratic, reference_sd, skipped, trials })
}
