//! Acceptance suite. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use perplex_core::analysis::{binned_variance_fit, DocValues};
use perplex_core::corpus::{parse_date, DocType, PaperRecord};
use perplex_core::lm::{
    perplexity, synonym_stability, tokenize, train_ngram, NGramBackend, NGramModel, ScoringBackend, SynonymLexicon,
};
use perplex_stats::regression::polyfit;
use perplex_stats::{fit_logistic, fit_negbin, mann_whitney_u, welch_t_summary, white_test, Design};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "perplexity formula", budget: Duration::from_secs(1), run: perplexity_formula },
        Criterion { id: 2, title: "welch summary rows", budget: Duration::from_secs(1), run: welch_rows },
        Criterion { id: 3, title: "glm closed forms", budget: Duration::from_secs(10), run: glm_closed_forms },
        Criterion { id: 4, title: "mann-whitney exact", budget: Duration::from_secs(60), run: mann_whitney_exact },
        Criterion { id: 5, title: "heteroskedasticity size and power", budget: Duration::from_secs(60), run: hetero },
        Criterion { id: 6, title: "planted effects end to end", budget: Duration::from_secs(120), run: planted },
        Criterion { id: 7, title: "synonym stability", budget: Duration::from_secs(60), run: stability },
        Criterion { id: 8, title: "byte-identical reruns", budget: Duration::from_secs(300), run: determinism },
    ];
    // Panics are reported on the criterion line instead.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > c.budget => Err(format!("{d}; took {elapsed:.2?}, budget {:?}", c.budget)),
            other => other,
        };
        match outcome {
            Ok(d) => println!("criterion {} [{}]: PASS ({d}; {elapsed:.2?})", c.id, c.title),
            Err(e) => {
                failed += 1;
                println!("criterion {} [{}]: FAIL ({e})", c.id, c.title);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

/// Running-mean form of exp(−mean), sharing no code with the library.
fn ppl_oracle(lp: &[f64]) -> f64 {
    let mut m = 0.0;
    for (i, v) in lp.iter().enumerate() {
        m += (v - m) / (i + 1) as f64;
    }
    (-m).exp()
}

fn perplexity_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let len = rng.random_range(1..=400);
        let lp: Vec<f64> = (0..len).map(|_| -rng.random_range(0.0..20.0)).collect();
        let got = perplexity(&lp).map_err(|e| e.to_string())?;
        let want = ppl_oracle(&lp);
        worst = worst.max((got - want).abs() / want);
    }
    ensure(worst <= 1e-10, || format!("max relative error {worst:e} > 1e-10"))?;

    // A uniform model over V outcomes assigns ln(1/V) to every token. ln V is
    // itself rounded, so exp of the mean carries at most (ln V + 1)·ε of
    // relative error plus a few ulps from the sum.
    let mut max_ulps = 0i64;
    let mut exact = 0;
    let mut total = 0;
    for v in [2u32, 10, 100] {
        let vf = f64::from(v);
        let bound = (4.0 * vf.ln() + 1.0) * f64::EPSILON;
        for t in 1..=500 {
            let got = perplexity(&vec![-vf.ln(); t]).map_err(|e| e.to_string())?;
            ensure((got / vf - 1.0).abs() <= bound, || format!("V={v}, T={t}: {got} outside rounding bound"))?;
            let ulps = (got.to_bits() as i64 - vf.to_bits() as i64).abs();
            max_ulps = max_ulps.max(ulps);
            exact += usize::from(ulps == 0);
            total += 1;
        }
    }
    Ok(format!(
        "50 sequences max rel err {worst:.1e}; uniform V in {{2,10,100}}: {exact}/{total} bit-exact, max {max_ulps} ulp"
    ))
}

// ---------------------------------------------------------------- 2

fn welch_rows() -> Outcome {
    let a = welch_t_summary(13.20, 3.95, 33, 9.63, 3.72, 20).map_err(|e| e.to_string())?;
    let d = a.effect_size.ok_or("no effect size")?;
    ensure((a.statistic - 3.31).abs() <= 0.01, || format!("t = {}", a.statistic))?;
    ensure((d - 0.92).abs() <= 0.01, || format!("d = {d}"))?;
    let b = welch_t_summary(18.70, 6.20, 33, 13.62, 7.48, 1_784_177).map_err(|e| e.to_string())?;
    ensure((b.statistic - 4.70).abs() <= 0.01, || format!("t = {}", b.statistic))?;
    Ok(format!("t {:.3}, d {d:.3}; t {:.3}", a.statistic, b.statistic))
}

// ---------------------------------------------------------------- 3

fn glm_closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_or = 0.0f64;
    let mut positive = 0;
    for _ in 0..200 {
        let cells: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..50));
        if cells.contains(&0) {
            continue;
        }
        positive += 1;
        let [a, b, c, d] = cells;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (xv, yv, k) in [(1.0, 1.0, a), (1.0, 0.0, b), (0.0, 1.0, c), (0.0, 0.0, d)] {
            x.extend(std::iter::repeat_n(xv, k));
            y.extend(std::iter::repeat_n(yv, k));
        }
        let design = Design::with_intercept(y.len()).column("x", x);
        let fit = fit_logistic(&y, &design).map_err(|e| format!("{cells:?}: {e}"))?;
        let or = fit.term("x").and_then(|t| t.exponentiated).ok_or("no odds ratio")?;
        let want = (a * d) as f64 / (b * c) as f64;
        worst_or = worst_or.max((or - want).abs());
    }
    ensure(worst_or <= 1e-6, || format!("odds ratio off by {worst_or:e}"))?;

    let mut worst_irr = 0.0f64;
    for inst in 0..50 {
        let n = rng.random_range(20..200);
        let rate = rng.random_range(0.2..5.0);
        let (y, m): (Vec<f64>, Vec<f64>) = if inst < 25 {
            // Counts exactly proportional to exposure up to rounding; the
            // fitted dispersion collapses to the Poisson limit.
            (0..n)
                .map(|_| {
                    let m = rng.random_range(1.0..10.0f64).round();
                    ((rate * m).round().max(1.0), m)
                })
                .unzip()
        } else {
            let m = rng.random_range(1.0..5.0);
            let shape = rng.random_range(0.5..5.0);
            let gamma = Gamma::new(shape, rate * m / shape).map_err(|e| e.to_string())?;
            (0..n)
                .map(|_| {
                    let lambda: f64 = gamma.sample(&mut rng);
                    (Poisson::new(lambda.max(1e-9)).map(|p| p.sample(&mut rng)).unwrap_or(0.0), m)
                })
                .unzip()
        };
        let offset: Vec<f64> = m.iter().map(|v| v.ln()).collect();
        let fit = fit_negbin(&y, &Design::with_intercept(n), &offset).map_err(|e| format!("instance {inst}: {e}"))?;
        let irr = fit.term("intercept").and_then(|t| t.exponentiated).ok_or("no IRR")?;
        let want = y.iter().sum::<f64>() / m.iter().sum::<f64>();
        worst_irr = worst_irr.max((irr - want).abs());
    }
    ensure(worst_irr <= 1e-6, || format!("IRR off by {worst_irr:e}"))?;
    Ok(format!("{positive} positive tables, max |OR err| {worst_or:.1e}; 50 NB fits, max |IRR err| {worst_irr:.1e}"))
}

// ---------------------------------------------------------------- 4

fn pairwise_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided p by enumerating every way to relabel the pooled values.
fn enumerate_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let n1 = a.len();
    let observed = pairwise_u(a, b);
    let (mut le, mut ge, mut total) = (0u128, 0u128, 0u128);
    let mut idx: Vec<usize> = (0..n1).collect();
    loop {
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        for (i, v) in pooled.iter().enumerate() {
            if idx.contains(&i) {
                ga.push(*v);
            } else {
                gb.push(*v);
            }
        }
        let u = pairwise_u(&ga, &gb);
        total += 1;
        le += u128::from(u <= observed);
        ge += u128::from(u >= observed);
        // Advance to the next n1-subset in lexicographic order.
        let Some(i) = (0..n1).rev().find(|&i| idx[i] != i + n - n1) else {
            return (2.0 * le.min(ge) as f64 / total as f64).min(1.0);
        };
        idx[i] += 1;
        for j in i + 1..n1 {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn mann_whitney_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0;
    for n1 in 1..=36usize {
        for n2 in 1..=36usize {
            if n1 * n2 > 36 {
                continue;
            }
            let draws: [fn(&mut ChaCha8Rng) -> f64; 3] =
                [|r| r.random::<f64>(), |r| f64::from(r.random_range(0..3)), |r| f64::from(r.random_range(0..8)) / 2.0];
            for draw in draws {
                for _ in 0..3 {
                    let a: Vec<f64> = (0..n1).map(|_| draw(&mut rng)).collect();
                    let b: Vec<f64> = (0..n2).map(|_| draw(&mut rng)).collect();
                    let r = mann_whitney_u(&a, &b).map_err(|e| e.to_string())?;
                    let want_u = pairwise_u(&a, &b);
                    let want_p = enumerate_p(&a, &b);
                    ensure(r.statistic == want_u, || format!("{a:?} vs {b:?}: U {} != {want_u}", r.statistic))?;
                    ensure(r.p_value == want_p, || format!("{a:?} vs {b:?}: p {} != {want_p}", r.p_value))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} samples with n1*n2 <= 36, exact equality"))
}

// ---------------------------------------------------------------- 5

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("d{i:05}")).collect()
}

fn hetero() -> Outcome {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let trials = 200u64;
    let (mut white_rej, mut binned_rej) = (0, 0);
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let n = 500;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v + normal.sample(&mut rng)).collect();
        white_rej += usize::from(white_test(&y, &x).map_err(|e| e.to_string())?.p_value < 0.05);

        let ids = ids(1000);
        let scores: DocValues = ids.iter().map(|id| (id.clone(), rng.random_range(1.0..10.0))).collect();
        let values: DocValues = ids.iter().map(|id| (id.clone(), normal.sample(&mut rng))).collect();
        let fit = binned_variance_fit(&scores, &values, 20).map_err(|e| e.to_string())?;
        binned_rej += usize::from(fit.slope().p_value < 0.05);
    }
    let white_size = white_rej as f64 / trials as f64;
    let binned_size = binned_rej as f64 / trials as f64;
    ensure((white_size - 0.05).abs() <= 0.03, || format!("White size {white_size}"))?;
    ensure((binned_size - 0.05).abs() <= 0.03, || format!("binned size {binned_size}"))?;

    let power_trials = 50u64;
    let (mut white_pow, mut binned_pow) = (0, 0);
    for seed in 0..power_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let n = 5000;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v + v * normal.sample(&mut rng)).collect();
        white_pow += usize::from(white_test(&y, &x).map_err(|e| e.to_string())?.p_value < 0.05);

        let ids = ids(n);
        let scores: DocValues = ids.iter().cloned().zip(x.iter().copied()).collect();
        let values: DocValues = ids.iter().cloned().zip(y.iter().copied()).collect();
        let fit = binned_variance_fit(&scores, &values, 20).map_err(|e| e.to_string())?;
        binned_pow += usize::from(fit.slope().p_value < 0.05);
    }
    let white_power = white_pow as f64 / power_trials as f64;
    let binned_power = binned_pow as f64 / power_trials as f64;
    ensure(white_power > 0.95, || format!("White power {white_power}"))?;
    ensure(binned_power > 0.95, || format!("binned power {binned_power}"))?;
    Ok(format!(
        "size White {white_size:.3}, binned {binned_size:.3} over {trials} seeds; power at n=5000 White {white_power:.2}, binned {binned_power:.2}"
    ))
}

// ---------------------------------------------------------------- CLI helpers

fn cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["perplex", "--quiet"];
    full.extend_from_slice(args);
    match perplex_cli::run(full.iter().map(|s| s.to_string())) {
        0 => Ok(()),
        code => Err(format!("`perplex {}` exited {code}", args.join(" "))),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// (analysis, term) → (statistic, p_value, exp_estimate) from a *_tests.csv.
fn stat_row(file: &Path, analysis: &str, term: &str) -> Result<(f64, f64, Option<f64>), String> {
    let mut rdr = csv::Reader::from_path(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or(format!("no {name} column"));
    let (ia, it, is, ip, ie) =
        (col("analysis")?, col("term")?, col("statistic")?, col("p_value")?, col("exp_estimate")?);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if &rec[ia] == analysis && &rec[it] == term {
            let f = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("{analysis}/{term}: {e}"));
            let exp = if rec[ie].is_empty() { None } else { Some(f(ie)?) };
            return Ok((f(is)?, f(ip)?, exp));
        }
    }
    Err(format!("{}: no row {analysis}/{term}", file.display()))
}

// ---------------------------------------------------------------- 6

fn planted() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path();
    let o = path_str(out);
    let base = ["--out", o, "--seed", "42", "--cutoff", "2023-03"];
    let with = |extra: &[&'static str]| -> Vec<&str> { base.iter().copied().chain(extra.iter().copied()).collect() };
    cli(&with(&["synth", "--focal-papers", "10000"]))?;
    let papers = out.join("papers.jsonl");
    let reviews = out.join("reviews.jsonl");
    let mut args = with(&["ingest", "--papers"]);
    args.push(path_str(&papers));
    args.extend(["--reviews", path_str(&reviews)]);
    cli(&args)?;
    cli(&with(&["train-lm"]))?;
    let model = out.join("model.json");
    let mut args = with(&["score", "--model"]);
    args.push(path_str(&model));
    cli(&args)?;
    cli(&with(&["analyze", "extreme-share", "--flag", "jif-top"]))?;
    cli(&with(&["analyze", "extreme-share", "--flag", "jif-bottom"]))?;
    cli(&with(&["analyze", "review"]))?;
    cli(&with(&["analyze", "interdisciplinarity"]))?;

    let mut detail = Vec::new();
    for flag in ["jif_top", "jif_bottom"] {
        let (_, p, or) = stat_row(&out.join(format!("extreme_share_{flag}_tests.csv")), "logistic", "log_perplexity")?;
        let or = or.ok_or("no odds ratio")?;
        ensure(or > 1.0 && p < 0.01, || format!("{flag}: OR {or}, p {p}"))?;
        detail.push(format!("{flag} OR {or:.2} p {p:.1e}"));
    }
    let (t, p, _) = stat_row(&out.join("review_tests.csv"), "welch_top_vs_bottom", "disparity")?;
    ensure(t > 0.0 && p < 0.05, || format!("disparity t {t}, p {p}"))?;
    detail.push(format!("disparity t {t:.2} p {p:.1e}"));
    let (_, p, irr) = stat_row(&out.join("interdisciplinarity_tests.csv"), "references_negbin", "log_perplexity")?;
    let irr = irr.ok_or("no IRR")?;
    ensure(irr > 1.0 && p < 0.01, || format!("reference IRR {irr}, p {p}"))?;
    detail.push(format!("reference IRR {irr:.2} p {p:.1e}"));
    Ok(detail.join(", "))
}

// ---------------------------------------------------------------- 7

fn paper(id: &str, text: &str) -> PaperRecord {
    PaperRecord {
        doc_id: id.into(),
        title: String::new(),
        abstract_text: text.into(),
        pub_date: parse_date("2023-06-01").unwrap(),
        journal_id: "J".into(),
        doc_type: DocType::Research,
        retracted: false,
        field_groups: BTreeSet::new(),
        funders: BTreeSet::new(),
        reference_ids: vec![],
    }
}

fn toy_model(docs: &[&str]) -> NGramModel {
    let train: Vec<Vec<String>> = docs.iter().map(|s| tokenize(s)).collect();
    train_ngram(&train, 3, 0.75).expect("toy model trains")
}

fn stability() -> Outcome {
    // Twins share every context, so swapping one for the other is invisible.
    let mut twin_docs = Vec::new();
    for s in ["the fox runs over the hill .", "a fox is quick and the fox is red .", "we saw the fox near a river ."] {
        twin_docs.push(s.to_string());
        twin_docs.push(s.replace("fox", "vixen"));
    }
    let refs: Vec<&str> = twin_docs.iter().map(String::as_str).collect();
    let twins = NGramBackend::new(toy_model(&refs), "kn3");
    let lex = SynonymLexicon::from_groups(vec![vec!["fox".into(), "vixen".into()]]);
    let docs = [paper("a", "the fox saw a fox over the river"), paper("b", "a vixen is quick near the fox")];
    let doc_refs: Vec<&PaperRecord> = docs.iter().collect();
    let curve = synonym_stability(&twins, &doc_refs, &lex, 3, 5, 7).map_err(|e| e.to_string())?;
    let twin_max = curve.trials.iter().map(|t| (t.new_perplexity - t.base_perplexity).abs()).fold(0.0, f64::max);
    ensure(!curve.trials.is_empty(), || "no twin trials".into())?;
    ensure(twin_max < 1e-12, || format!("twin swap moved perplexity by {twin_max:e}"))?;

    let backend = NGramBackend::new(
        toy_model(&[
            "models of the cell predict growth in the tissue .",
            "large models predict small changes in the cell .",
            "the tissue shows rapid growth and big changes .",
            "small cells show slow growth in large tissue .",
            "we predict rapid changes in big models .",
            "little cells show fast growth .",
        ]),
        "kn3",
    );
    let lex = SynonymLexicon::from_groups(vec![
        vec!["large".into(), "big".into()],
        vec!["rapid".into(), "fast".into(), "quick".into()],
        vec!["small".into(), "little".into()],
        vec!["growth".into(), "changes".into()],
    ]);
    let texts = [
        "large models show rapid growth and small changes .",
        "small cells predict big changes in the large tissue .",
        "the tissue shows rapid growth in small big cells .",
        "big models of small cells show fast growth .",
        "we predict slow growth and rapid changes in large tissue .",
        "little cells , big models , quick changes , large growth .",
    ];
    let docs: Vec<PaperRecord> = texts.iter().enumerate().map(|(i, t)| paper(&format!("t{i}"), t)).collect();
    let doc_refs: Vec<&PaperRecord> = docs.iter().collect();
    let max_k = 5;
    let curve = synonym_stability(&backend, &doc_refs, &lex, max_k, 4, 2024).map_err(|e| e.to_string())?;

    // Re-apply each recorded swap and rescore from scratch.
    let mut sums = vec![0.0f64; max_k];
    let mut counts = vec![0usize; max_k];
    for t in &curve.trials {
        let doc = docs.iter().find(|d| d.doc_id == t.doc_id).ok_or("unknown trial doc")?;
        let base_tokens = backend.score(doc).map_err(|e| e.to_string())?.tokens;
        let mut tokens = base_tokens.clone();
        for (pos, w) in &t.replacements {
            ensure(lex.alternatives(&base_tokens[*pos]).is_some_and(|mut a| a.any(|x| x == w)), || {
                format!("{w} is not a synonym of {}", base_tokens[*pos])
            })?;
            tokens[*pos] = w.clone();
        }
        let base = perplexity(&backend.model.score_tokens(&base_tokens)).map_err(|e| e.to_string())?;
        let new = perplexity(&backend.model.score_tokens(&tokens)).map_err(|e| e.to_string())?;
        sums[t.k - 1] += (new - base).abs();
        counts[t.k - 1] += 1;
    }
    let expect: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 }).collect();
    ensure(counts == curve.trial_counts, || format!("trial counts {counts:?} vs {:?}", curve.trial_counts))?;
    ensure(expect == curve.mean_abs_delta, || format!("curve {:?} vs recomputed {expect:?}", curve.mean_abs_delta))?;
    let ks: Vec<f64> = (1..=max_k).map(|k| k as f64).collect();
    let quad = polyfit(&ks, &expect, 2).map_err(|e| e.to_string())?;
    let fitted = curve.quadratic.ok_or("no quadratic fit")?;
    ensure(quad.as_slice() == fitted.as_slice(), || format!("quadratic {fitted:?} vs {quad:?}"))?;
    let sign = if fitted[2] < 0.0 {
        "negative"
    } else if fitted[2] > 0.0 {
        "positive"
    } else {
        "zero"
    };
    Ok(format!(
        "twin max delta {twin_max:e}; {} trials match recomputation exactly; k^2 coefficient {:.4} ({sign})",
        curve.trials.len(),
        fitted[2]
    ))
}

// ---------------------------------------------------------------- 8

fn pipeline_once(root: &Path, config: &Path, logprobs: &Path) -> Result<(), String> {
    let out = root.join("out");
    let imported = root.join("imported");
    let (o, c) = (path_str(&out), path_str(config));
    cli(&["--config", c, "--out", o, "synth", "--focal-papers", "800"])?;
    let papers = out.join("papers.jsonl");
    let reviews = out.join("reviews.jsonl");
    cli(&["--config", c, "--out", o, "ingest", "--papers", path_str(&papers), "--reviews", path_str(&reviews)])?;
    cli(&["--config", c, "--out", o, "train-lm"])?;
    let model = out.join("model.json");
    cli(&["--config", c, "--out", o, "score", "--model", path_str(&model)])?;
    let synonyms = out.join("synonyms.tsv");
    cli(&[
        "--config",
        c,
        "--out",
        o,
        "report",
        "--svg",
        "--model",
        path_str(&model),
        "--synonyms",
        path_str(&synonyms),
        "--bootstrap",
        "200",
        "--sample",
        "60",
    ])?;
    cli(&["--config", c, "--out", path_str(&imported), "import-logprobs", "--logprobs", path_str(logprobs)])?;
    Ok(())
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn logprobs_fixture(path: &Path) -> Result<(), String> {
    let backend = NGramBackend::new(
        toy_model(&["the cell grows in the tissue .", "we model the growth of a cell ."]),
        "external-lm",
    );
    let mut text = String::new();
    for i in 0..40 {
        let s = backend
            .score_text(&format!("ext{i:03}"), &format!("the cell {} grows in a model .", "tissue ".repeat(i % 7)))
            .map_err(|e| e.to_string())?;
        let line = serde_json::json!({
            "doc_id": s.doc_id, "model_id": s.model_id, "tokens": s.tokens, "logprobs": s.logprobs,
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("perplex.conf");
    fs::write(&config, "seed = 9\ncutoff = 2023-03\nbins = 10\nmax-k = 4\nreps = 2\n").map_err(|e| e.to_string())?;
    let logprobs = tmp.path().join("logprobs.jsonl");
    logprobs_fixture(&logprobs)?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    pipeline_once(&a, &config, &logprobs)?;
    pipeline_once(&b, &config, &logprobs)?;
    let (fa, fb) = (files(&a), files(&b));
    ensure(fa == fb, || "runs produced different file sets".into())?;
    let csvs: Vec<&PathBuf> = fa.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    ensure(csvs.len() >= 20, || format!("only {} CSV files produced", csvs.len()))?;
    for p in &fa {
        let (x, y) = (fs::read(a.join(p)).map_err(|e| e.to_string())?, fs::read(b.join(p)).map_err(|e| e.to_string())?);
        ensure(x == y, || format!("{} differs between runs", p.display()))?;
    }
    Ok(format!("{} files ({} CSV) byte-identical across two runs", fa.len(), csvs.len()))
}
