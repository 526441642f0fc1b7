use std::collections::{BTreeMap, BTreeSet};

use perplex_core::analysis::*;
use perplex_core::corpus::{compute_jif, parse_date, resolve_citations, Corpus, DocType, PaperRecord};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn id(i: usize) -> String {
    format!("d{i:05}")
}

/// n documents with ln perplexity ~ N(3, 0.5).
fn log_scores(rng: &mut impl Rng, n: usize) -> DocValues {
    let nd = Normal::new(3.0, 0.5).unwrap();
    (0..n).map(|i| (id(i), f64::exp(nd.sample(rng)))).collect()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[test]
fn extreme_share_recovers_planted_odds_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let scores = log_scores(&mut rng, 20_000);
    let beta = 2f64.ln();
    let flag: BTreeMap<String, bool> =
        scores.iter().map(|(k, &s)| (k.clone(), rng.random::<f64>() < logistic(-4.0 + beta * s.ln()))).collect();
    let b = quantile_bins(&scores, 10).unwrap();
    let p = extreme_share_profile(&b, &flag).unwrap();
    let t = p.logistic.unwrap().term("log_perplexity").unwrap();
    assert!((t.coefficient - beta).abs() < 3.0 * t.standard_error, "{t:?}");
    assert!(p.bins.iter().all(|x| (0.0..=1.0).contains(&x.proportion)));
    assert!(p.bins[9].proportion > p.bins[0].proportion);
}

#[test]
fn group_profiles_simulations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let scores = log_scores(&mut rng, 20_000);
    let b = quantile_bins(&scores, 10).unwrap();
    let beta = 2.5f64.ln();
    let labels: BTreeMap<String, BTreeSet<String>> = scores
        .iter()
        .map(|(k, &s)| {
            let mut l = BTreeSet::new();
            if rng.random::<f64>() < 0.3 {
                l.insert("uniform".to_string());
            }
            if rng.random::<f64>() < logistic(-3.0 + beta * s.ln()) {
                l.insert("planted".to_string());
            }
            (k.clone(), l)
        })
        .collect();
    let g = group_profiles(&b, &labels).unwrap();
    for p in &g.profiles {
        assert!((p.shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let t = p.logistic.as_ref().unwrap().term("log_perplexity").unwrap();
        match p.label.as_str() {
            "uniform" => {
                assert!(p.shares.iter().all(|s| (s - 0.1).abs() < 0.02));
                assert!(t.coefficient.abs() < 3.0 * t.standard_error);
            }
            "planted" => {
                assert!((t.coefficient - beta).abs() < 3.0 * t.standard_error);
                assert!(p.mann_whitney.as_ref().unwrap().p_value < 1e-6);
            }
            _ => unreachable!(),
        }
    }
}

fn paper(id: &str, year: i32, journal: &str, groups: &[&str], refs: &[&str]) -> PaperRecord {
    PaperRecord {
        doc_id: id.into(),
        title: String::new(),
        abstract_text: "x".into(),
        pub_date: parse_date(&format!("{year}-06-01")).unwrap(),
        journal_id: journal.into(),
        doc_type: DocType::Research,
        retracted: false,
        field_groups: groups.iter().map(|s| s.to_string()).collect(),
        funders: BTreeSet::new(),
        reference_ids: refs.iter().map(|s| s.to_string()).collect(),
    }
}

/// Five focal papers in two bins ({f1, f2, f3} and {f4, f5}) and five
/// referenced works.
fn hand_corpus() -> (Corpus, QuantileBinning) {
    let c = Corpus::from_records(vec![
        paper("r1", 2020, "JA", &["Phys"], &[]),
        paper("r2", 2021, "JA", &["Chem"], &[]),
        paper("r3", 2019, "JB", &["Phys", "Chem"], &[]),
        paper("r4", 2022, "JB", &["Bio"], &[]),
        paper("r5", 2021, "JC", &["Phys"], &["r1"]),
        paper("f1", 2024, "JA", &["Phys"], &["r1", "r2", "gone"]),
        paper("f2", 2024, "JA", &["Phys", "Chem"], &["r3", "r2", "r1"]),
        paper("f3", 2023, "JB", &["Chem"], &["r4", "r4"]),
        paper("f4", 2024, "JB", &["Bio"], &["r4", "r5", "f1"]),
        paper("f5", 2024, "JC", &["Phys"], &["r5"]),
    ])
    .unwrap();
    let scores: DocValues = [("f1", 2.0), ("f2", 3.0), ("f3", 10.0), ("f4", 20.0), ("f5", 30.0)]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    (c, quantile_bins(&scores, 2).unwrap())
}

#[test]
fn interdisciplinarity_manual_counts() {
    let (c, b) = hand_corpus();
    let idx = resolve_citations(&c);
    let p = interdisciplinarity_profile(&c, &idx, &b).unwrap();
    // f1 {Phys}: r1 intra, r2 inter. f2 {Phys,Chem}: r3 r2 r1 intra. f3 {Chem}: r4 inter (once).
    assert_eq!(p.bins[0].references, LinkCounts { intra: 4, inter: 2 });
    // f4 {Bio}: r4 intra, r5 inter, f1 inter. f5 {Phys}: r5 intra.
    assert_eq!(p.bins[1].references, LinkCounts { intra: 2, inter: 2 });
    assert_eq!(p.bins[0].references.ratio(), Some(0.5));
    assert_eq!(p.bins[1].references.ratio(), Some(1.0));
    // f1 is cited by f4 ({Bio} not within {Phys})
    assert_eq!(p.bins[0].citations, LinkCounts { intra: 0, inter: 1 });
    assert_eq!(p.unresolved_references, 1);
}

#[test]
fn same_group_references_give_zero_ratio() {
    let mut papers = Vec::new();
    for i in 0..40 {
        papers.push(paper(&format!("r{i}"), 2021, "J", &["Phys"], &[]));
    }
    for i in 0..40 {
        let refs = [format!("r{i}"), format!("r{}", (i + 1) % 40)];
        let refs: Vec<&str> = refs.iter().map(String::as_str).collect();
        papers.push(paper(&format!("f{i:02}"), 2024, "J", &["Phys"], &refs));
    }
    let c = Corpus::from_records(papers).unwrap();
    let scores: DocValues = (0..40).map(|i| (format!("f{i:02}"), 1.0 + i as f64)).collect();
    let b = quantile_bins(&scores, 10).unwrap();
    let p = interdisciplinarity_profile(&c, &resolve_citations(&c), &b).unwrap();
    assert!(p.bins.iter().all(|x| x.references.ratio() == Some(0.0)));
}

#[test]
fn interdisciplinarity_without_references_is_error() {
    let c =
        Corpus::from_records(vec![paper("a", 2024, "J", &["X"], &[]), paper("b", 2024, "J", &["X"], &["zz"])]).unwrap();
    let scores: DocValues = [("a".to_string(), 2.0), ("b".to_string(), 3.0)].into();
    let b = quantile_bins(&scores, 2).unwrap();
    assert!(interdisciplinarity_profile(&c, &resolve_citations(&c), &b).is_err());
}

#[test]
fn planted_interdisciplinary_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut papers: Vec<PaperRecord> = (0..50).map(|i| paper(&format!("in{i}"), 2021, "J", &["A"], &[])).collect();
    papers.extend((0..50).map(|i| paper(&format!("out{i}"), 2021, "K", &["B"], &[])));
    let mut scores = DocValues::new();
    for i in 0..3000 {
        let ppl: f64 = (2.0 + 2.0 * rng.random::<f64>()).exp();
        let rate = 0.05 * ppl.powf(0.5);
        let intra = rng.random_range(1..10usize);
        let inter = Poisson::new(rate * intra as f64).unwrap().sample(&mut rng) as usize;
        let refs: Vec<String> = (0..intra)
            .map(|j| format!("in{}", (i + j) % 50))
            .chain((0..inter).map(|j| format!("out{}", (i * 7 + j) % 50)))
            .collect();
        let r: Vec<&str> = refs.iter().map(String::as_str).collect();
        let id = format!("f{i:04}");
        papers.push(paper(&id, 2024, "J", &["A"], &r));
        scores.insert(id, ppl);
    }
    let c = Corpus::from_records(papers).unwrap();
    let b = quantile_bins(&scores, 10).unwrap();
    let p = interdisciplinarity_profile(&c, &resolve_citations(&c), &b).unwrap();
    let t = p.reference_fit.unwrap().term("log_perplexity").unwrap();
    assert!(t.exponentiated.unwrap() > 1.0 && t.p_value < 0.01);
    // distinct references saturate at 50 per target set, so only the sign is checked
}

#[test]
fn reference_age_manual() {
    let (c, b) = hand_corpus();
    let idx = resolve_citations(&c);
    let jif = compute_jif(&c, &idx, 2023);
    let p = reference_age_profile(&c, &idx, &b, &jif);
    // bin 0: f1 (2024) -> r1 2020, r2 2021; f2 (2024) -> r3 2019, r2 2021, r1 2020;
    // f3 (2023) -> r4 2022
    let ages0 = [4.0, 3.0, 5.0, 3.0, 4.0, 1.0];
    assert_eq!(p.bins[0].references, 6);
    assert!((p.bins[0].mean_age.unwrap() - ages0.iter().sum::<f64>() / 6.0).abs() < 1e-12);
    // popularity: r1 cited by r5, f1, f2 = 3; r2 by f1, f2 = 2; r3 by f2 = 1; r4 by f3, f4 = 2
    let pop0 = [3.0, 2.0, 1.0, 2.0, 3.0, 2.0];
    assert!((p.bins[0].mean_popularity.unwrap() - pop0.iter().sum::<f64>() / 6.0).abs() < 1e-12);
    // bin 1: f4 (2024) -> r4 2022, r5 2021, f1 2024; f5 (2024) -> r5 2021
    let ages1 = [2.0, 3.0, 0.0, 3.0];
    assert!((p.bins[1].mean_age.unwrap() - ages1.iter().sum::<f64>() / 4.0).abs() < 1e-12);
    // JIF 2023: JA items 2021-2022 = r2, cited in 2023 by nobody -> 0; JB: r4 cited by f3 -> 1/1;
    // JC: r5 -> 0/1. bin 1 references: r4 (JB 1), r5 (JC 0), f1 (JA 0), r5 (JC 0)
    assert!((p.bins[1].mean_reference_jif.unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(p.unresolved, 1);
}

#[test]
fn reference_age_zero_when_same_year() {
    let mut papers = Vec::new();
    for i in 0..20 {
        papers.push(paper(&format!("r{i}"), 2024, "J", &["A"], &[]));
        papers.push(paper(&format!("f{i:02}"), 2024, "J", &["A"], &[&format!("r{i}")]));
    }
    let c = Corpus::from_records(papers).unwrap();
    let scores: DocValues = (0..20).map(|i| (format!("f{i:02}"), 1.0 + i as f64)).collect();
    let b = quantile_bins(&scores, 10).unwrap();
    let p = reference_age_profile(&c, &resolve_citations(&c), &b, &BTreeMap::new());
    assert!(p.bins.iter().all(|x| x.mean_age == Some(0.0)));
}

#[test]
fn jif_citation_manual_means() {
    let scores: DocValues = (0..30).map(|i| (id(i), 1.0 + i as f64)).collect();
    let jif: DocValues = (0..30).filter(|i| i % 7 != 0).map(|i| (id(i), (i % 5) as f64 + 0.5)).collect();
    let cites: DocValues = (0..30).map(|i| (id(i), ((i * 3) % 11) as f64)).collect();
    let b = quantile_bins(&scores, 3).unwrap();
    let p = jif_citation_by_bin(&b, &jif, &cites, 0.8).unwrap();
    for bin in &p.bins {
        let members: Vec<usize> = (bin.bin * 10..bin.bin * 10 + 10).filter(|i| i % 7 != 0).collect();
        let mj = members.iter().map(|&i| (i % 5) as f64 + 0.5).sum::<f64>() / members.len() as f64;
        let mc = members.iter().map(|&i| ((i * 3) % 11) as f64).sum::<f64>() / members.len() as f64;
        assert_eq!(bin.n, members.len());
        assert!((bin.mean_jif - mj).abs() < 1e-12);
        assert!((bin.mean_citations - mc).abs() < 1e-12);
        assert!(!bin.lowess.is_empty());
    }
    assert!(p.omitted_bins.is_empty());
}

#[test]
fn quadratic_citation_term() {
    let nd = Normal::new(0.0, 1.0).unwrap();
    let mut rejections = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores = log_scores(&mut rng, 400);
        let cites: DocValues = scores.keys().map(|k| (k.clone(), 5.0 + nd.sample(&mut rng))).collect();
        let b = quantile_bins(&scores, 10).unwrap();
        let p = jif_citation_by_bin(&b, &DocValues::new(), &cites, 0.5).unwrap();
        if p.quadratic.unwrap().term("log_perplexity_sq").unwrap().p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 200.0;
    assert!((0.02..=0.08).contains(&rate), "size {rate}");

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let scores = log_scores(&mut rng, 3000);
    let cites: DocValues =
        scores.iter().map(|(k, &s)| (k.clone(), 20.0 - 4.0 * (s.ln() - 3.0).powi(2) + nd.sample(&mut rng))).collect();
    let b = quantile_bins(&scores, 10).unwrap();
    let q = jif_citation_by_bin(&b, &DocValues::new(), &cites, 0.5).unwrap().quadratic.unwrap();
    let t = q.term("log_perplexity_sq").unwrap();
    assert!(t.coefficient < 0.0 && t.p_value < 0.001);
}

#[test]
fn binned_variance_size() {
    let nd = Normal::new(0.0, 1.0).unwrap();
    let mut rejections = 0;
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let scores = log_scores(&mut rng, 1000);
        let values: DocValues = scores.keys().map(|k| (k.clone(), nd.sample(&mut rng))).collect();
        let f = binned_variance_fit(&scores, &values, 20).unwrap();
        if f.slope().p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / 200.0;
    assert!((0.02..=0.08).contains(&rate), "size {rate}");
}

#[test]
fn disparity_planted_in_reviews() {
    use perplex_core::corpus::ReviewBundle;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scores = log_scores(&mut rng, 2000);
    let nd = Normal::new(0.0, 1.0).unwrap();
    let reviews: BTreeMap<String, ReviewBundle> = scores
        .iter()
        .map(|(k, &s)| {
            let spread = 0.5 * s.ln();
            let ratings = (0..4).map(|_| 5.0 + spread * nd.sample(&mut rng)).collect();
            (
                k.clone(),
                ReviewBundle {
                    doc_id: k.clone(),
                    ratings,
                    confidences: vec![3.0],
                    comments: vec![],
                    received_date: None,
                    accepted_date: None,
                },
            )
        })
        .collect();
    let metrics = review_variability(&reviews, &scores);
    let disparity: DocValues = metrics.iter().map(|m| (m.doc_id.clone(), m.disparity.unwrap())).collect();
    let b = quantile_bins(&scores, 10).unwrap();
    let w = top_bottom_welch(&b, &disparity).unwrap();
    assert!(w.statistic > 0.0 && w.p_value < 0.05);
}

#[test]
fn uncertainty_planted_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lex: BTreeSet<String> = DEFAULT_UNCERTAINTY_LEXICON.iter().map(|s| s.to_string()).collect();
    let mut gen = |rate: f64| -> Vec<String> {
        (0..500)
            .map(|_| {
                (0..40).map(|_| if rng.random::<f64>() < rate { "maybe" } else { "fine" }).collect::<Vec<_>>().join(" ")
            })
            .collect()
    };
    let high = gen(0.04);
    let low = gen(0.02);
    let r = uncertainty_word_rate(&high, &low, &lex).unwrap();
    assert!(r.test.p_value < 1e-6);
    assert!(r.hits_high > r.hits_low);
}

proptest! {
    #[test]
    fn same_groups_are_intra(groups in prop::collection::btree_set("[a-z]{1,6}", 1..6)) {
        prop_assert_eq!(interdisciplinary_classify(&groups, &groups), Discipline::Intra);
    }

    #[test]
    fn ratio_display_at_least_one(a in 1u64..200, b in 1u64..200, extra_a in 0u64..500, extra_b in 0u64..500) {
        let high = vec![format!("{}{}", "w ".repeat(a as usize), "z ".repeat(extra_a as usize + 1))];
        let low = vec![format!("{}{}", "w ".repeat(b as usize), "z ".repeat(extra_b as usize + 1))];
        for r in word_ratio_analysis(&high, &low, 1).unwrap() {
            prop_assert!(r.display_value >= 1.0);
            prop_assert!((r.r * (1.0 / r.r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bin_sizes_balanced(n in 2usize..400, k in 2usize..20, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scores: DocValues = (0..n).map(|i| (id(i), (rng.random_range(0..10)) as f64)).collect();
        let b = quantile_bins(&scores, k).unwrap();
        let sizes = b.bin_sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut prev = f64::NEG_INFINITY;
        for id in b.ranked_ids() {
            let s = b.score(id).unwrap();
            prop_assert!(s >= prev);
            prev = s;
        }
    }
}
