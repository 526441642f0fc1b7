//! Interpolated Kneser-Ney n-gram model.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

pub const BOS: u32 = 0;
pub const EOS: u32 = 1;
pub const UNK: u32 = 2;
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";
/// Training tokens seen fewer times than this map to UNK.
pub const UNK_FLOOR: u64 = 2;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Clone, Default)]
struct ContextStats {
    total: f64,
    types: f64,
}

#[derive(Debug, Clone, Default)]
struct Level {
    counts: HashMap<Box<[u32]>, f64>,
    contexts: HashMap<Box<[u32]>, ContextStats>,
}

#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    words: Vec<String>,
    ids: HashMap<String, u32>,
    /// Raw counts of full-order n-grams, the only persisted statistics.
    top: HashMap<Box<[u32]>, u64>,
    /// levels[m - 1] holds the adjusted counts used at order m.
    levels: Vec<Level>,
}

#[derive(Serialize, Deserialize)]
struct Persisted {
    order: usize,
    discount: f64,
    vocabulary: Vec<String>,
    counts: Vec<(Vec<u32>, u64)>,
}

/// Trains on already-tokenized documents.
pub fn train_ngram<S: AsRef<[String]>>(docs: &[S], order: usize, discount: f64) -> Result<NGramModel> {
    if order < 1 {
        return Err(CoreError::InvalidInput("n-gram order must be at least 1".into()));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(CoreError::InvalidInput(format!("discount {discount} outside (0, 1)")));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for t in d.as_ref() {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    if freq.is_empty() {
        return Err(CoreError::EmptyCorpus);
    }
    let mut kept: Vec<&str> = freq.iter().filter(|(_, &c)| c >= UNK_FLOOR).map(|(w, _)| *w).collect();
    kept.sort_unstable();
    let words: Vec<String> = kept.into_iter().map(str::to_string).collect();
    let ids = id_map(&words);

    let mut top: HashMap<Box<[u32]>, u64> = HashMap::new();
    for d in docs {
        let seq = padded(order, d.as_ref().iter().map(|t| lookup(&ids, t)));
        for w in seq.windows(order) {
            *top.entry(w.into()).or_default() += 1;
        }
    }
    Ok(NGramModel::from_top(order, discount, words, ids, top))
}

fn id_map(words: &[String]) -> HashMap<String, u32> {
    let mut ids: HashMap<String, u32> = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32 + 3)).collect();
    ids.insert(BOS_TOKEN.into(), BOS);
    ids.insert(EOS_TOKEN.into(), EOS);
    ids.insert(UNK_TOKEN.into(), UNK);
    ids
}

fn lookup(ids: &HashMap<String, u32>, t: &str) -> u32 {
    match ids.get(t) {
        Some(&BOS) | None => UNK,
        Some(&id) => id,
    }
}

fn padded(order: usize, ids: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut seq = vec![BOS; order - 1];
    seq.extend(ids);
    seq.push(EOS);
    seq
}

impl NGramModel {
    fn from_top(
        order: usize,
        discount: f64,
        words: Vec<String>,
        ids: HashMap<String, u32>,
        top: HashMap<Box<[u32]>, u64>,
    ) -> Self {
        // raw[m - 1]: raw counts of m-grams, by suffix aggregation of the top level
        let mut raw: Vec<HashMap<Box<[u32]>, u64>> = vec![HashMap::new(); order];
        raw[order - 1] = top.clone();
        for m in (1..order).rev() {
            let (lo, hi) = raw.split_at_mut(m);
            for (g, &c) in &hi[0] {
                *lo[m - 1].entry(g[1..].into()).or_default() += c;
            }
        }

        let mut levels = vec![Level::default(); order];
        for m in 1..=order {
            let level = &mut levels[m - 1];
            if m == order {
                for (g, &c) in &raw[m - 1] {
                    level.counts.insert(g.clone(), c as f64);
                }
            } else {
                // continuation counts: distinct left extensions
                for g in raw[m].keys() {
                    let s = &g[1..];
                    if m >= 2 && s[0] == BOS {
                        continue;
                    }
                    *level.counts.entry(s.into()).or_default() += 1.0;
                }
                if m >= 2 {
                    for (s, &c) in &raw[m - 1] {
                        if s[0] == BOS {
                            level.counts.insert(s.clone(), c as f64);
                        }
                    }
                }
            }
            let mut contexts: HashMap<Box<[u32]>, ContextStats> = HashMap::new();
            for (g, &c) in &level.counts {
                let e = contexts.entry(g[..m - 1].into()).or_default();
                e.total += c;
                e.types += 1.0;
            }
            level.contexts = contexts;
        }
        // Floating sums above depend on hash iteration order only through
        // integer-valued additions, which are exact.
        Self { order, discount, words, ids, top, levels }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Words in the vocabulary, excluding sentinels, in id order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Size of the predicted vocabulary: words, EOS and UNK.
    pub fn predicted_vocab_size(&self) -> usize {
        self.words.len() + 2
    }

    pub fn token_id(&self, token: &str) -> u32 {
        lookup(&self.ids, token)
    }

    /// Token string for an id (sentinels included).
    pub fn token(&self, id: u32) -> &str {
        match id {
            BOS => BOS_TOKEN,
            EOS => EOS_TOKEN,
            UNK => UNK_TOKEN,
            _ => &self.words[id as usize - 3],
        }
    }

    /// Conditional probability of `word` given `context` ids (any length;
    /// only the last order-1 are used, shorter contexts use lower orders).
    pub fn prob_ids(&self, context: &[u32], word: u32) -> f64 {
        let h = &context[context.len().saturating_sub(self.order - 1)..];
        self.prob_level(h.len() + 1, h, word)
    }

    fn prob_level(&self, m: usize, h: &[u32], w: u32) -> f64 {
        let uniform = 1.0 / self.predicted_vocab_size() as f64;
        if m == 0 {
            return uniform;
        }
        let level = &self.levels[m - 1];
        let lower = |s: &Self| if m == 1 { uniform } else { s.prob_level(m - 1, &h[1..], w) };
        let Some(ctx) = level.contexts.get(h) else {
            return lower(self);
        };
        let mut key = Vec::with_capacity(m);
        key.extend_from_slice(h);
        key.push(w);
        let c = level.counts.get(key.as_slice()).copied().unwrap_or(0.0);
        let d = self.discount;
        (c - d).max(0.0) / ctx.total + d * ctx.types / ctx.total * lower(self)
    }

    /// Probability of `word` after the token strings in `context`.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|t| self.token_id(t)).collect();
        let w = if word == EOS_TOKEN { EOS } else { self.token_id(word) };
        self.prob_ids(&ids, w)
    }

    /// Natural-log probability of each token, starting from an all-BOS
    /// context. No terminal EOS is scored.
    pub fn score_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        let mut ctx = vec![BOS; self.order - 1];
        let mut out = Vec::with_capacity(tokens.len());
        for t in tokens {
            let id = self.token_id(t.as_ref());
            out.push(self.prob_ids(&ctx, id).ln());
            if !ctx.is_empty() {
                ctx.remove(0);
                ctx.push(id);
            }
        }
        out
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let mut counts: Vec<(Vec<u32>, u64)> = self.top.iter().map(|(g, &c)| (g.to_vec(), c)).collect();
        counts.sort_unstable();
        let p = Persisted { order: self.order, discount: self.discount, vocabulary: self.words.clone(), counts };
        serde_json::to_writer(out, &p)?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let p: Persisted = serde_json::from_reader(input)?;
        if p.order < 1 || !(p.discount > 0.0 && p.discount < 1.0) {
            return Err(CoreError::InvalidInput("model file has invalid order or discount".into()));
        }
        let max_id = p.vocabulary.len() as u32 + 3;
        let mut top = HashMap::with_capacity(p.counts.len());
        for (g, c) in p.counts {
            if g.len() != p.order || g.iter().any(|&i| i >= max_id) || c == 0 {
                return Err(CoreError::InvalidInput("model file has malformed n-gram entry".into()));
            }
            top.insert(g.into_boxed_slice(), c);
        }
        if top.is_empty() {
            return Err(CoreError::InvalidInput("model file has no counts".into()));
        }
        let ids = id_map(&p.vocabulary);
        Ok(Self::from_top(p.order, p.discount, p.vocabulary, ids, top))
    }

    /// Raw full-order counts, sorted, for inspection.
    pub fn top_counts(&self) -> BTreeMap<Vec<u32>, u64> {
        self.top.iter().map(|(g, &c)| (g.to_vec(), c)).collect()
    }
}
