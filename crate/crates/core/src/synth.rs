//! Synthetic corpora with planted perplexity effects.
//!
//! Each post-cutoff ("focal") paper draws a latent surprise level u ∈ [0, 1).
//! Its abstract swaps a fraction `max_injection · u` of tokens for words that
//! never occur in the pre-cutoff history, so an n-gram model trained on the
//! history scores it as less predictable. The same u raises the chance of
//! landing in a top- or bottom-tier journal, the spread of reviewer ratings,
//! the share of references outside the paper's field group, and the rate of
//! hedging words in review comments.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::corpus::{DocType, PaperRecord, ReviewBundle};
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub focal_papers: usize,
    pub journals: usize,
    pub field_groups: usize,
    pub history_per_journal: usize,
    pub common_words: usize,
    pub rare_words: usize,
    pub abstract_tokens: (usize, usize),
    /// Injection rate at u → 1.
    pub max_injection: f64,
    /// Fraction of journals in each extreme prestige tier.
    pub tier_share: f64,
    pub references: (usize, usize),
    pub focal_references: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            focal_papers: 10_000,
            journals: 200,
            field_groups: 21,
            history_per_journal: 60,
            common_words: 3000,
            rare_words: 2000,
            abstract_tokens: (60, 110),
            max_injection: 0.25,
            tier_share: 0.05,
            references: (10, 20),
            focal_references: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    /// History papers first, then focal papers in date order.
    pub papers: Vec<PaperRecord>,
    pub reviews: Vec<ReviewBundle>,
    /// Focal doc_id → latent surprise u.
    pub surprise: BTreeMap<String, f64>,
    /// Groups of interchangeable common words.
    pub synonyms: Vec<Vec<String>>,
    pub cutoff: NaiveDate,
}

pub const FUNDERS: [&str; 5] = ["DFG", "ERC", "NIH", "NSF", "NSFC"];
pub const AWARD_FUNDER: &str = "NSF";
const COMMENT_WORDS: [&str; 24] = [
    "the",
    "paper",
    "method",
    "results",
    "clear",
    "novel",
    "baseline",
    "weak",
    "strong",
    "experiments",
    "writing",
    "contribution",
    "analysis",
    "section",
    "related",
    "work",
    "should",
    "compare",
    "good",
    "limited",
    "evaluation",
    "interesting",
    "unclear",
    "convincing",
];
const HEDGES: [&str; 4] = ["perhaps", "maybe", "likely", "might"];

fn make_word(mut i: usize, onsets: &[&str], vowels: &[&str], min_syll: usize) -> String {
    let mut w = String::new();
    let mut syll = 0;
    loop {
        w.push_str(onsets[i % onsets.len()]);
        i /= onsets.len();
        w.push_str(vowels[i % vowels.len()]);
        i /= vowels.len();
        syll += 1;
        if i == 0 && syll >= min_syll {
            break;
        }
    }
    w
}

fn vocabulary(n: usize, rare: bool) -> Vec<String> {
    // The two onset sets share no letters, so the vocabularies are disjoint.
    let (onsets, vowels): (&[&str], &[&str]) = if rare {
        (&["qu", "x", "zh", "kv", "j"], &["y", "oo", "ae"])
    } else {
        (&["b", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t"], &["a", "e", "i", "o", "u"])
    };
    (0..n).map(|i| make_word(i, onsets, vowels, if rare { 3 } else { 2 })).collect()
}

struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn zipf(n: usize, s: f64) -> Self {
        Self::from_weights((1..=n).map(|r| (r as f64).powf(-s)))
    }

    fn from_weights(w: impl Iterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = w
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        Self { cdf }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }
}

struct Journal {
    id: String,
    group: usize,
    prestige: f64,
    tier: i8,
}

fn random_date(rng: &mut impl Rng, start: NaiveDate, end: NaiveDate) -> NaiveDate {
    let span = (end - start).num_days() as u64;
    start + Days::new(rng.random_range(0..=span))
}

fn text(
    rng: &mut impl Rng,
    len: usize,
    common: &[String],
    zipf: &Sampler,
    topic: &[String],
    rare: &[String],
    injection: f64,
) -> String {
    let mut out = String::new();
    for i in 0..len {
        if i > 0 {
            out.push(' ');
        }
        let w = if rng.random::<f64>() < injection {
            &rare[rng.random_range(0..rare.len())]
        } else if rng.random::<f64>() < 0.15 {
            &topic[rng.random_range(0..topic.len())]
        } else {
            &common[zipf.sample(rng)]
        };
        out.push_str(w);
        if i + 1 == len {
            out.push('.');
        } else if rng.random::<f64>() < 0.06 {
            out.push(if rng.random::<bool>() { ',' } else { '.' });
        }
    }
    out
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    if cfg.journals < 20 || cfg.field_groups < 2 || cfg.focal_papers < 20 || cfg.history_per_journal == 0 {
        return Err(CoreError::InvalidInput("synthetic corpus configuration too small".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let common = vocabulary(cfg.common_words, false);
    let rare = vocabulary(cfg.rare_words, true);
    let zipf = Sampler::zipf(common.len(), 1.05);
    let groups: Vec<String> = (0..cfg.field_groups).map(|g| format!("G{:02}", g + 1)).collect();
    let topic_words: Vec<Vec<String>> = (0..cfg.field_groups)
        .map(|g| {
            (0..60)
                .map(|i| format!("{}{}", common[(g * 131 + i * 17) % common.len()], groups[g].to_lowercase()))
                .collect()
        })
        .collect();

    let tier_n = ((cfg.journals as f64 * cfg.tier_share).round() as usize).max(1);
    let mut journals: Vec<Journal> = (0..cfg.journals)
        .map(|j| {
            let (tier, prestige) = if j < tier_n {
                (1, 8.0 * (1.0 + 0.05 * j as f64))
            } else if j >= cfg.journals - tier_n {
                (-1, 0.1 * (1.0 + 0.05 * (j - (cfg.journals - tier_n)) as f64))
            } else {
                let t = (j - tier_n) as f64 / (cfg.journals - 2 * tier_n) as f64;
                (0, 0.6 + 1.8 * t)
            };
            Journal { id: format!("J{:03}", j + 1), group: j % cfg.field_groups, prestige, tier }
        })
        .collect();
    journals.sort_by(|a, b| a.id.cmp(&b.id));
    let by_group: Vec<Vec<usize>> =
        (0..cfg.field_groups).map(|g| (0..journals.len()).filter(|&j| journals[j].group == g).collect()).collect();
    let top: Vec<usize> = (0..journals.len()).filter(|&j| journals[j].tier == 1).collect();
    let bottom: Vec<usize> = (0..journals.len()).filter(|&j| journals[j].tier == -1).collect();
    let middle: Vec<usize> = (0..journals.len()).filter(|&j| journals[j].tier == 0).collect();

    let d = |y, m, dd| NaiveDate::from_ymd_opt(y, m, dd).expect("valid literal date");
    let cutoff = d(2023, 3, 31);
    let mut papers = Vec::new();
    // history[j] = indices into papers
    let mut history: Vec<Vec<usize>> = vec![Vec::new(); journals.len()];
    for (j, journal) in journals.iter().enumerate() {
        for i in 0..cfg.history_per_journal {
            let len = rng.random_range(cfg.abstract_tokens.0..=cfg.abstract_tokens.1);
            let doc_id = format!("H{:03}-{:03}", j + 1, i + 1);
            history[j].push(papers.len());
            papers.push(PaperRecord {
                doc_id,
                title: text(&mut rng, 8, &common, &zipf, &topic_words[journal.group], &rare, 0.0),
                abstract_text: text(&mut rng, len, &common, &zipf, &topic_words[journal.group], &rare, 0.0),
                pub_date: random_date(&mut rng, d(2021, 1, 1), d(2022, 12, 31)),
                journal_id: journal.id.clone(),
                doc_type: if rng.random::<f64>() < 0.1 { DocType::Review } else { DocType::Research },
                retracted: false,
                field_groups: BTreeSet::from([groups[journal.group].clone()]),
                funders: BTreeSet::new(),
                reference_ids: Vec::new(),
            });
        }
    }

    let journal_sampler = |js: &[usize]| Sampler::from_weights(js.iter().map(|&j| journals[j].prestige));
    let group_samplers: Vec<Sampler> = by_group.iter().map(|js| journal_sampler(js)).collect();
    let all_journals: Vec<usize> = (0..journals.len()).collect();
    let all_sampler = journal_sampler(&all_journals);

    let mut dates: Vec<NaiveDate> =
        (0..cfg.focal_papers).map(|_| random_date(&mut rng, d(2023, 4, 1), d(2023, 12, 31))).collect();
    dates.sort();
    let mut surprise = BTreeMap::new();
    let mut reviews = Vec::with_capacity(cfg.focal_papers);
    let mut focal_cum: Vec<f64> = Vec::with_capacity(cfg.focal_papers);
    let focal_start = papers.len();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    for (i, &pub_date) in dates.iter().enumerate() {
        let u: f64 = rng.random();
        let doc_id = format!("F{:05}", i + 1);
        let p_tier = 0.01 + 0.12 * u;
        let jx = {
            let r: f64 = rng.random();
            let pool = if r < p_tier {
                &top
            } else if r < 2.0 * p_tier {
                &bottom
            } else {
                &middle
            };
            pool[rng.random_range(0..pool.len())]
        };
        let journal = &journals[jx];
        let mut field_groups = BTreeSet::from([groups[journal.group].clone()]);
        if rng.random::<f64>() < 0.2 {
            field_groups.insert(groups[rng.random_range(0..groups.len())].clone());
        }

        let n_refs = rng.random_range(cfg.references.0..=cfg.references.1);
        let p_inter = 0.1 + 0.4 * u;
        let mut refs = Vec::with_capacity(n_refs + cfg.focal_references);
        for _ in 0..n_refs {
            let rj = if rng.random::<f64>() < p_inter {
                // outside the focal paper's groups
                loop {
                    let cand = all_journals[all_sampler.sample(&mut rng)];
                    if !field_groups.contains(&groups[journals[cand].group]) {
                        break cand;
                    }
                }
            } else {
                let g = journal.group;
                by_group[g][group_samplers[g].sample(&mut rng)]
            };
            let h = &history[rj];
            refs.push(papers[h[rng.random_range(0..h.len())]].doc_id.clone());
        }
        if let Some(&total) = focal_cum.last() {
            for _ in 0..cfg.focal_references {
                let target = rng.random::<f64>() * total;
                let k = focal_cum.partition_point(|&c| c < target).min(focal_cum.len() - 1);
                let cand = &papers[focal_start + k];
                if cand.pub_date < pub_date {
                    refs.push(cand.doc_id.clone());
                }
            }
        }
        // citation attractiveness peaks at intermediate surprise
        let attract = (-6.0 * (u - 0.5) * (u - 0.5)).exp();
        focal_cum.push(focal_cum.last().copied().unwrap_or(0.0) + attract);

        let mut funders = BTreeSet::new();
        for f in FUNDERS {
            let p = if f == AWARD_FUNDER { 0.05 + 0.2 * u } else { 0.1 };
            if rng.random::<f64>() < p {
                funders.insert(f.to_string());
            }
        }

        let len = rng.random_range(cfg.abstract_tokens.0..=cfg.abstract_tokens.1);
        let injection = cfg.max_injection * u;
        papers.push(PaperRecord {
            doc_id: doc_id.clone(),
            title: text(&mut rng, 8, &common, &zipf, &topic_words[journal.group], &rare, injection),
            abstract_text: text(&mut rng, len, &common, &zipf, &topic_words[journal.group], &rare, injection),
            pub_date,
            journal_id: journal.id.clone(),
            doc_type: if rng.random::<f64>() < 0.1 { DocType::Review } else { DocType::Research },
            retracted: rng.random::<f64>() < 0.002 + 0.004 * u,
            field_groups,
            funders,
            reference_ids: refs,
        });
        surprise.insert(doc_id.clone(), u);

        let quality = 5.5 + normal.sample(&mut rng);
        let spread = 0.6 + 1.8 * u;
        let n_rev = rng.random_range(3..=5);
        let ratings: Vec<f64> =
            (0..n_rev).map(|_| (quality + spread * normal.sample(&mut rng)).round().clamp(1.0, 10.0)).collect();
        let confidences: Vec<f64> =
            (0..n_rev).map(|_| (4.0 - 1.2 * u + 0.7 * normal.sample(&mut rng)).round().clamp(1.0, 5.0)).collect();
        let hedge_rate = 0.01 + 0.04 * u;
        let comments: Vec<String> = (0..n_rev)
            .map(|_| {
                (0..30)
                    .map(|_| {
                        if rng.random::<f64>() < hedge_rate {
                            HEDGES[rng.random_range(0..HEDGES.len())]
                        } else {
                            COMMENT_WORDS[rng.random_range(0..COMMENT_WORDS.len())]
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let delay = LogNormal::new(4.5, 0.3 + 0.5 * u).expect("positive sigma").sample(&mut rng).round() as u64;
        let received = pub_date - Days::new(delay + 30);
        reviews.push(ReviewBundle {
            doc_id,
            ratings,
            confidences,
            comments,
            received_date: Some(received),
            accepted_date: Some(received + Days::new(delay)),
        });
    }

    let synonyms = (0..40).map(|i| vec![common[20 + 2 * i].clone(), common[21 + 2 * i].clone()]).collect();
    Ok(SynthCorpus { papers, reviews, surprise, synonyms, cutoff })
}
