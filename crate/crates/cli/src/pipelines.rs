//! `analyze <pipeline>` and `report`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use perplex_core::analysis::{
    dispersion_profile, extreme_flags, extreme_share_profile_with_controls, group_profiles,
    interdisciplinarity_profile, jif_citation_by_bin, journal_extreme_flags, quantile_bins, reference_age_profile,
    review_variability, term_set_tests, top_bottom_welch, uncertainty_word_rate, word_ratio_analysis, DocValues,
    QuantileBinning, ReviewMetrics, Tail, DEFAULT_LOWESS_FRAC, DEFAULT_MIN_COUNT, DEFAULT_UNCERTAINTY_LEXICON,
};
use perplex_core::corpus::{
    compute_jif, paper_jif, resolve_citations, CitationIndex, Corpus, JournalMetrics, ReviewBundle,
};
use perplex_core::lm::{synonym_stability, NGramBackend, SynonymLexicon};
use perplex_stats::{bootstrap_ci, sample_skewness, skewness_z, Statistic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{
    cutoff, default_model_id, load_model, load_reviews, load_snapshot, open, out_dir, seed, REVIEWS, SCORES, SNAPSHOT,
};
use crate::output::{num, opt, table, write_stats, StatRow};
use crate::svg::{decile_chart, Point};
use crate::{runtime, usage, CliError, CliResult, Settings};

pub const PIPELINES: [&str; 12] = [
    "jif",
    "extreme-share",
    "dispersion",
    "review",
    "word-ratio",
    "uncertainty",
    "groups",
    "interdisciplinarity",
    "reference-age",
    "jif-citation",
    "skewness",
    "stability",
];

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_VARIANCE_BINS: usize = 20;
pub const DEFAULT_WORD_SHARE: f64 = 0.5;
pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_MAX_K: usize = 10;
pub const DEFAULT_REPS: usize = 1;
pub const DEFAULT_STABILITY_SAMPLE: usize = 1000;

const FLAGS: [&str; 5] = ["jif-top", "jif-bottom", "delay-long", "delay-short", "confidence-low"];
const VALUES: [&str; 6] = ["rating", "disparity", "confidence", "delay", "jif", "citations"];
const LABELS: [&str; 4] = ["funder", "doc-type", "retracted", "field"];

struct Scored {
    values: DocValues,
    model_id: String,
    binning: QuantileBinning,
}

struct Inputs {
    out: PathBuf,
    corpus: Corpus,
    index: CitationIndex,
    scored: Option<Scored>,
    reviews: Option<BTreeMap<String, ReviewBundle>>,
}

fn read_scores(path: &Path, s: &Settings, corpus: &Corpus) -> CliResult<(DocValues, String)> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| runtime(format!("{}: missing column {name}", path.display())))
    };
    let (ci, cm, cp) = (col("doc_id")?, col("model_id")?, col("perplexity")?);
    let wanted = s.raw("model_id");
    let mut by_model: BTreeMap<String, DocValues> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let model = &rec[cm];
        if wanted.is_some_and(|w| w != model) {
            continue;
        }
        let v: f64 = rec[cp]
            .parse()
            .map_err(|_| runtime(format!("{}:{}: bad perplexity {:?}", path.display(), i + 2, &rec[cp])))?;
        let id = rec[ci].to_string();
        if by_model.entry(model.to_string()).or_default().insert(id.clone(), v).is_some() {
            return Err(runtime(format!("{}: {id} scored twice by {model}", path.display())));
        }
    }
    if by_model.len() > 1 {
        let ids: Vec<&str> = by_model.keys().map(String::as_str).collect();
        return Err(usage(format!("scores hold several models ({}); pass --model-id", ids.join(", "))));
    }
    let Some((model_id, mut values)) = by_model.into_iter().next() else {
        return Err(runtime(format!("{}: no scores", path.display())));
    };
    let before = values.len();
    values.retain(|id, _| corpus.contains(id));
    if values.len() < before {
        log::warn!("{} scored documents are not in the snapshot", before - values.len());
    }
    Ok((values, model_id))
}

impl Inputs {
    fn load(s: &Settings, need_scores: bool) -> CliResult<Self> {
        let out = out_dir(s)?;
        let corpus = load_snapshot(&s.input_or_default("snapshot", &out, SNAPSHOT)?)?;
        let index = resolve_citations(&corpus);
        if index.unresolved > 0 {
            log::info!("{} reference entries do not resolve inside the snapshot", index.unresolved);
        }
        let scored = if need_scores {
            let (values, model_id) = read_scores(&s.input_or_default("scores", &out, SCORES)?, s, &corpus)?;
            let binning = quantile_bins(&values, s.get_or("bins", DEFAULT_BINS)?)?;
            Some(Scored { values, model_id, binning })
        } else {
            None
        };
        let reviews = match s.input("reviews")? {
            Some(p) => Some(load_reviews(&p)?),
            None if out.join(REVIEWS).exists() => Some(load_reviews(&out.join(REVIEWS))?),
            None => None,
        };
        Ok(Self { out, corpus, index, scored, reviews })
    }

    fn scored(&self) -> CliResult<&Scored> {
        self.scored.as_ref().ok_or_else(|| usage("this pipeline needs scores"))
    }

    fn reviews(&self) -> CliResult<&BTreeMap<String, ReviewBundle>> {
        self.reviews.as_ref().ok_or_else(|| usage("this pipeline needs reviews; pass --reviews"))
    }

    fn review_metrics(&self) -> CliResult<Vec<ReviewMetrics>> {
        Ok(review_variability(self.reviews()?, &self.scored()?.values))
    }
}

fn jif_map(s: &Settings, inp: &Inputs) -> CliResult<(i32, BTreeMap<String, JournalMetrics>)> {
    let year = match s.get::<i32>("jif_year")? {
        Some(y) => y,
        None => cutoff(s)?
            .map(|c| chrono::Datelike::year(&c))
            .ok_or_else(|| usage("pass --jif-year or --cutoff to choose the JIF year"))?,
    };
    let m = compute_jif(&inp.corpus, &inp.index, year);
    if m.is_empty() {
        return Err(runtime(format!("no journal has citable items in {} or {}", year - 2, year - 1)));
    }
    Ok((year, m))
}

fn share_setting(s: &Settings, key: &str, default: f64) -> CliResult<f64> {
    let v = s.get_or(key, default)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(usage(format!("{key} must lie in (0, 1), got {v}")))
    }
}

fn slug(s: &str) -> String {
    s.replace('-', "_")
}

/// Per-bin statistic with a bootstrap band, drawn when `svg` is set.
fn maybe_svg(
    s: &Settings,
    out: &Path,
    name: &str,
    title: &str,
    y_label: &str,
    samples: Vec<Vec<f64>>,
    stat: Statistic,
) -> CliResult<()> {
    if !s.flag("svg")? {
        return Ok(());
    }
    let b = s.get_or("bootstrap", DEFAULT_BOOTSTRAP)?;
    let seed = seed(s)?;
    let points: Vec<Point> = samples
        .iter()
        .enumerate()
        .map(|(bin, x)| Point {
            bin,
            value: if x.is_empty() { f64::NAN } else { stat.eval(x) },
            ci: if x.len() < 2 { None } else { bootstrap_ci(x, stat, b, seed.wrapping_add(bin as u64)).ok() },
        })
        .collect();
    let path = out.join(format!("{name}.svg"));
    std::fs::write(&path, decile_chart(title, y_label, &points))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn bin_samples(binning: &QuantileBinning, values: &DocValues) -> Vec<Vec<f64>> {
    (0..binning.k()).map(|b| binning.members(b).iter().filter_map(|id| values.get(id).copied()).collect()).collect()
}

fn run_jif(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let (year, m) = jif_map(s, inp)?;
    let mut t =
        table(&inp.out, "jif.csv", &["journal_id", "year", "jif", "citation_numerator", "citable_denominator"])?;
    for j in m.values() {
        t.row(vec![
            j.journal_id.clone(),
            year.to_string(),
            num(j.jif),
            j.citation_numerator.to_string(),
            j.citable_denominator.to_string(),
        ])?;
    }
    t.finish()?;
    Ok(())
}

fn controls(
    s: &Settings,
    inp: &Inputs,
    binning: &QuantileBinning,
) -> CliResult<Vec<(String, BTreeMap<String, String>)>> {
    s.list("controls")
        .into_iter()
        .map(|c| {
            let pick: fn(&perplex_core::corpus::PaperRecord) -> String = match c.as_str() {
                "month" => |p| p.pub_date.format("%Y-%m").to_string(),
                "field" => |p| p.field_groups.iter().next().cloned().unwrap_or_else(|| "none".into()),
                "doc-type" | "doc_type" => |p| p.doc_type.as_str().to_string(),
                other => return Err(usage(format!("unknown control {other:?}; use month, field or doc-type"))),
            };
            let map = binning.ranked_ids().filter_map(|id| inp.corpus.get(id).map(|p| (id.clone(), pick(p)))).collect();
            Ok((slug(&c), map))
        })
        .collect()
}

fn run_extreme_share(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let flag = s.raw("flag").unwrap_or("jif-top");
    let flags = match flag {
        "jif-top" | "jif-bottom" => {
            let share = share_setting(s, "threshold", 0.05)?;
            let (_, m) = jif_map(s, inp)?;
            let tail = if flag == "jif-top" { Tail::Upper } else { Tail::Lower };
            let papers = sc
                .binning
                .ranked_ids()
                .filter_map(|id| inp.corpus.get(id).map(|p| (p.doc_id.as_str(), p.journal_id.as_str())));
            journal_extreme_flags(papers, &m, share, tail)
        }
        "delay-long" | "delay-short" | "confidence-low" => {
            let metrics = inp.review_metrics()?;
            let (values, share, tail): (DocValues, f64, Tail) = if flag == "confidence-low" {
                let v = metrics.iter().filter_map(|m| Some((m.doc_id.clone(), m.mean_confidence?))).collect();
                (v, share_setting(s, "threshold", 0.05)?, Tail::Lower)
            } else {
                let v = metrics.iter().filter_map(|m| Some((m.doc_id.clone(), m.delay_days? as f64))).collect();
                let tail = if flag == "delay-long" { Tail::Upper } else { Tail::Lower };
                (v, share_setting(s, "threshold", 0.01)?, tail)
            };
            if values.is_empty() {
                return Err(runtime(format!("no scored document has a value for {flag}")));
            }
            extreme_flags(&values, share, tail)
        }
        other => return Err(usage(format!("unknown flag {other:?}; choose one of {}", FLAGS.join(", ")))),
    };
    let sub = sc.binning.restrict(flags.keys())?;
    let owned = controls(s, inp, &sub)?;
    let ctl: Vec<(&str, &BTreeMap<String, String>)> = owned.iter().map(|(n, m)| (n.as_str(), m)).collect();
    let prof = extreme_share_profile_with_controls(&sub, &flags, &ctl)?;
    let name = format!("extreme_share_{}", slug(flag));
    let mut t = table(&inp.out, &format!("{name}.csv"), &["bin", "n", "flagged", "proportion"])?;
    for b in &prof.bins {
        t.row(vec![b.bin.to_string(), b.n.to_string(), b.flagged.to_string(), num(b.proportion)])?;
    }
    t.finish()?;
    let pooled_n = prof.pooled.iter().flatten().sum::<f64>() as usize;
    let mut rows = vec![
        StatRow::value("pooled", "top_flagged", prof.pooled[0][0]),
        StatRow::value("pooled", "top_unflagged", prof.pooled[0][1]),
        StatRow::value("pooled", "bottom_flagged", prof.pooled[1][0]),
        StatRow::value("pooled", "bottom_unflagged", prof.pooled[1][1]),
        StatRow::test("chi2", "top_vs_bottom", &prof.chi2.test, Some(pooled_n)),
    ];
    if let Some(f) = &prof.logistic {
        rows.extend(StatRow::fit("logistic", f));
    }
    if let Some(note) = &prof.logistic_note {
        log::warn!("{flag}: {note}");
    }
    write_stats(&inp.out, &format!("{name}_tests.csv"), &rows)?;
    let as_values: DocValues = flags.iter().map(|(k, &v)| (k.clone(), f64::from(u8::from(v)))).collect();
    maybe_svg(
        s,
        &inp.out,
        &name,
        &format!("share flagged: {flag}"),
        "proportion",
        bin_samples(&sub, &as_values),
        Statistic::Mean,
    )
}

fn doc_values(s: &Settings, inp: &Inputs, value: &str) -> CliResult<DocValues> {
    let sc = inp.scored()?;
    let pick = |f: fn(&ReviewMetrics) -> Option<f64>| -> CliResult<DocValues> {
        Ok(inp.review_metrics()?.iter().filter_map(|m| Some((m.doc_id.clone(), f(m)?))).collect())
    };
    let values = match value {
        "rating" => pick(|m| m.mean_rating)?,
        "disparity" => pick(|m| m.disparity)?,
        "confidence" => pick(|m| m.mean_confidence)?,
        "delay" => pick(|m| m.delay_days.map(|d| d as f64))?,
        "jif" => {
            let (_, m) = jif_map(s, inp)?;
            let mut v = paper_jif(&inp.corpus, &m);
            v.retain(|id, _| sc.values.contains_key(id));
            v
        }
        "citations" => sc.values.keys().map(|id| (id.clone(), inp.index.citation_count(id) as f64)).collect(),
        other => return Err(usage(format!("unknown value {other:?}; choose one of {}", VALUES.join(", ")))),
    };
    if values.is_empty() {
        return Err(runtime(format!("no scored document has a {value} value")));
    }
    Ok(values)
}

fn run_dispersion(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let value = s.raw("value").unwrap_or("jif");
    let values = doc_values(s, inp, value)?;
    let sub = sc.binning.restrict(values.keys())?;
    let prof = dispersion_profile(&sub, &values, s.get_or("variance_bins", DEFAULT_VARIANCE_BINS)?)?;
    let name = format!("dispersion_{}", slug(value));
    let mut t = table(&inp.out, &format!("{name}.csv"), &["bin", "n", "mean", "sd"])?;
    for b in &prof.bins {
        t.row(vec![b.bin.to_string(), b.n.to_string(), num(b.mean), num(b.sd)])?;
    }
    t.finish()?;
    let mut rows = Vec::new();
    if let Some(w) = &prof.white {
        rows.push(StatRow::test("white", "log_perplexity", w, Some(sub.len())));
    }
    if let Some(b) = &prof.binned {
        rows.extend(StatRow::fit("binned_variance", &b.fit));
        rows.push(StatRow::value("binned_variance", "bins_omitted", b.bins_omitted as f64));
    }
    if let Some(l) = &prof.levene {
        rows.push(StatRow::test("levene", "top_vs_bottom", l, None));
    }
    if let Some(f) = &prof.fligner {
        rows.push(StatRow::test("fligner", "top_vs_bottom", f, None));
    }
    for n in &prof.notes {
        log::warn!("dispersion {value}: {n}");
    }
    write_stats(&inp.out, &format!("{name}_tests.csv"), &rows)?;
    maybe_svg(
        s,
        &inp.out,
        &name,
        &format!("SD of {value}"),
        "standard deviation",
        bin_samples(&sub, &values),
        Statistic::StdDev,
    )
}

type Measure = fn(&ReviewMetrics) -> Option<f64>;

fn run_review(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let metrics = inp.review_metrics()?;
    if metrics.is_empty() {
        return Err(runtime("no review bundle matches a scored document"));
    }
    let ids: Vec<String> = metrics.iter().map(|m| m.doc_id.clone()).collect();
    let sub = sc.binning.restrict(&ids)?;
    let mut t = table(
        &inp.out,
        "review_metrics.csv",
        &["doc_id", "bin", "perplexity", "n_ratings", "disparity", "mean_rating", "mean_confidence", "delay_days"],
    )?;
    for m in &metrics {
        t.row(vec![
            m.doc_id.clone(),
            sub.bin_of(&m.doc_id).map(|b| b.to_string()).unwrap_or_default(),
            num(m.perplexity),
            m.n_ratings.to_string(),
            opt(m.disparity),
            opt(m.mean_rating),
            opt(m.mean_confidence),
            m.delay_days.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    t.finish()?;
    let measures: [(&str, Measure); 4] = [
        ("disparity", |m| m.disparity),
        ("mean_rating", |m| m.mean_rating),
        ("mean_confidence", |m| m.mean_confidence),
        ("delay_days", |m| m.delay_days.map(|d| d as f64)),
    ];
    let valued: Vec<DocValues> = measures
        .iter()
        .map(|(_, f)| metrics.iter().filter_map(|m| Some((m.doc_id.clone(), f(m)?))).collect())
        .collect();
    let mut header = vec!["bin", "n"];
    header.extend(measures.iter().map(|(n, _)| *n));
    let mut t = table(&inp.out, "review_bins.csv", &header)?;
    let samples: Vec<Vec<Vec<f64>>> = valued.iter().map(|v| bin_samples(&sub, v)).collect();
    for b in 0..sub.k() {
        let mut row = vec![b.to_string(), sub.members(b).len().to_string()];
        for s in &samples {
            let x = &s[b];
            row.push(if x.is_empty() { String::new() } else { num(Statistic::Mean.eval(x)) });
        }
        t.row(row)?;
    }
    t.finish()?;
    let mut rows = Vec::new();
    for ((name, _), v) in measures.iter().zip(&valued) {
        match top_bottom_welch(&sub, v) {
            Ok(r) => rows.push(StatRow::test("welch_top_vs_bottom", name, &r, Some(v.len()))),
            Err(e) => log::warn!("review {name}: {e}"),
        }
    }
    write_stats(&inp.out, "review_tests.csv", &rows)?;
    maybe_svg(
        s,
        &inp.out,
        "review_disparity",
        "rating disparity",
        "max - min rating",
        samples[0].clone(),
        Statistic::Mean,
    )
}

fn text_of(inp: &Inputs, id: &str) -> Option<String> {
    inp.corpus.get(id).map(|p| format!("{} {}", p.title, p.abstract_text))
}

fn read_terms(path: &Path) -> CliResult<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for line in open(path)?.lines() {
        let w = line?.trim().to_lowercase();
        if !w.is_empty() && !w.starts_with('#') {
            out.insert(w);
        }
    }
    Ok(out)
}

fn run_word_ratio(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let share = s.get_or("share", DEFAULT_WORD_SHARE)?;
    if !(0.0..=0.5).contains(&share) {
        return Err(usage(format!("share must lie in [0, 0.5], got {share}")));
    }
    let ranked: Vec<&String> = sc.binning.ranked_ids().collect();
    let m = (share * ranked.len() as f64).floor() as usize;
    let low: Vec<String> = ranked[..m].iter().filter_map(|id| text_of(inp, id)).collect();
    let high: Vec<String> = ranked[ranked.len() - m..].iter().filter_map(|id| text_of(inp, id)).collect();
    if low.is_empty() {
        return Err(runtime(format!(
            "the low-perplexity group is empty (share {share} of {} documents)",
            ranked.len()
        )));
    }
    let ratios = word_ratio_analysis(&high, &low, s.get_or("min_count", DEFAULT_MIN_COUNT)?)?;
    let mut t = table(
        &inp.out,
        "word_ratio.csv",
        &["word", "count_high", "count_low", "freq_high", "freq_low", "r", "display_value", "orientation"],
    )?;
    for r in &ratios {
        t.row(vec![
            r.word.clone(),
            r.count_high.to_string(),
            r.count_low.to_string(),
            num(r.freq_high),
            num(r.freq_low),
            num(r.r),
            num(r.display_value),
            r.orientation.as_str().into(),
        ])?;
    }
    t.finish()?;
    let sets = s
        .list("term_sets")
        .into_iter()
        .map(|p| {
            let path = PathBuf::from(&p);
            if !path.exists() {
                return Err(usage(format!("input file not found: {p}")));
            }
            let name = path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or(p);
            Ok((name, read_terms(&path)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if !sets.is_empty() {
        let tests = term_set_tests(&high, &low, &sets)?;
        let mut t = table(
            &inp.out,
            "word_ratio_term_sets.csv",
            &["name", "hits_high", "tokens_high", "hits_low", "tokens_low", "statistic", "p_value", "residual_high"],
        )?;
        for r in &tests {
            t.row(vec![
                r.name.clone(),
                r.hits_high.to_string(),
                r.tokens_high.to_string(),
                r.hits_low.to_string(),
                r.tokens_low.to_string(),
                num(r.test.statistic),
                num(r.test.p_value),
                num(r.residual_high),
            ])?;
        }
        t.finish()?;
    }
    Ok(())
}

fn run_uncertainty(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let reviews = inp.reviews()?;
    let lexicon = match s.input("lexicon")? {
        Some(p) => read_terms(&p)?,
        None => DEFAULT_UNCERTAINTY_LEXICON.iter().map(|w| w.to_string()).collect(),
    };
    let (bottom, top) = sc.binning.extremes();
    let comments = |ids: Vec<&String>| -> Vec<String> {
        ids.into_iter().filter_map(|id| reviews.get(id)).flat_map(|r| r.comments.iter().cloned()).collect()
    };
    let (high, low) = (comments(top), comments(bottom));
    let r = uncertainty_word_rate(&high, &low, &lexicon)?;
    let mut t = table(&inp.out, "uncertainty.csv", &["word", "count_high", "freq_high", "count_low", "freq_low"])?;
    for w in &r.per_word {
        t.row(vec![
            w.word.clone(),
            w.count_high.to_string(),
            num(w.freq_high),
            w.count_low.to_string(),
            num(w.freq_low),
        ])?;
    }
    t.finish()?;
    let rows = vec![
        StatRow::value("counts", "hits_high", r.hits_high as f64),
        StatRow::value("counts", "tokens_high", r.tokens_high as f64),
        StatRow::value("counts", "hits_low", r.hits_low as f64),
        StatRow::value("counts", "tokens_low", r.tokens_low as f64),
        StatRow::test("chi2", "lexicon_hits", &r.test, Some((r.tokens_high + r.tokens_low) as usize)),
    ];
    write_stats(&inp.out, "uncertainty_tests.csv", &rows)?;
    Ok(())
}

fn read_labels(path: &Path) -> CliResult<BTreeMap<String, BTreeSet<String>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(runtime(format!("{}: expected doc_id,label rows", path.display())));
        }
        out.entry(rec[0].to_string()).or_default().insert(rec[1].to_string());
    }
    Ok(out)
}

fn run_groups(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let (name, labels) = match s.input("labels_file")? {
        Some(p) => ("custom".to_string(), read_labels(&p)?),
        None => {
            let label = s.raw("label").unwrap_or("funder");
            let pick: fn(&perplex_core::corpus::PaperRecord) -> BTreeSet<String> = match label {
                "funder" => |p| p.funders.clone(),
                "doc-type" => |p| BTreeSet::from([p.doc_type.as_str().to_string()]),
                "retracted" => |p| {
                    if p.retracted {
                        BTreeSet::from(["retracted".to_string()])
                    } else {
                        BTreeSet::new()
                    }
                },
                "field" => |p| p.field_groups.clone(),
                other => return Err(usage(format!("unknown label {other:?}; choose one of {}", LABELS.join(", ")))),
            };
            let map = sc.values.keys().filter_map(|id| inp.corpus.get(id).map(|p| (id.clone(), pick(p)))).collect();
            (slug(label), map)
        }
    };
    let g = group_profiles(&sc.binning, &labels)?;
    for l in &g.skipped {
        log::warn!("groups: {l} has fewer than two scored documents");
    }
    if g.profiles.is_empty() {
        return Err(runtime(format!("no {name} label has two or more scored documents")));
    }
    let mut t = table(&inp.out, &format!("groups_{name}.csv"), &["label", "bin", "count", "share"])?;
    let mut rows = Vec::new();
    for p in &g.profiles {
        for (b, (c, sh)) in p.counts.iter().zip(&p.shares).enumerate() {
            t.row(vec![p.label.clone(), b.to_string(), c.to_string(), num(*sh)])?;
        }
        if let Some(f) = &p.logistic {
            rows.extend(StatRow::fit(&format!("{}:logistic", p.label), f));
        }
        if let Some(m) = &p.mann_whitney {
            rows.push(StatRow::test(&p.label, "mann_whitney", m, Some(p.n)));
        }
        for n in &p.notes {
            log::warn!("groups {}: {n}", p.label);
        }
    }
    t.finish()?;
    write_stats(&inp.out, &format!("groups_{name}_tests.csv"), &rows)?;
    Ok(())
}

fn run_interdisciplinarity(_s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let prof = interdisciplinarity_profile(&inp.corpus, &inp.index, &sc.binning)?;
    let mut t = table(
        &inp.out,
        "interdisciplinarity.csv",
        &["bin", "ref_intra", "ref_inter", "ref_ratio", "cit_intra", "cit_inter", "cit_ratio"],
    )?;
    for b in &prof.bins {
        t.row(vec![
            b.bin.to_string(),
            b.references.intra.to_string(),
            b.references.inter.to_string(),
            opt(b.references.ratio()),
            b.citations.intra.to_string(),
            b.citations.inter.to_string(),
            opt(b.citations.ratio()),
        ])?;
    }
    t.finish()?;
    let mut t = table(
        &inp.out,
        "interdisciplinarity_papers.csv",
        &["doc_id", "bin", "ref_intra", "ref_inter", "cit_intra", "cit_inter"],
    )?;
    let mut papers: Vec<_> = prof.papers.iter().collect();
    papers.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for p in papers {
        t.row(vec![
            p.doc_id.clone(),
            sc.binning.bin_of(&p.doc_id).map(|b| b.to_string()).unwrap_or_default(),
            p.references.intra.to_string(),
            p.references.inter.to_string(),
            p.citations.intra.to_string(),
            p.citations.inter.to_string(),
        ])?;
    }
    t.finish()?;
    let mut rows = vec![StatRow::value("references", "unresolved", prof.unresolved_references as f64)];
    if let Some(f) = &prof.reference_fit {
        rows.extend(StatRow::fit("references_negbin", f));
        rows.push(StatRow::value("references_negbin", "dispersion", f.dispersion.unwrap_or(f64::NAN)));
    }
    if let Some(f) = &prof.citation_fit {
        rows.extend(StatRow::fit("citations_negbin", f));
        rows.push(StatRow::value("citations_negbin", "dispersion", f.dispersion.unwrap_or(f64::NAN)));
    }
    for n in &prof.notes {
        log::warn!("interdisciplinarity: {n}");
    }
    write_stats(&inp.out, "interdisciplinarity_tests.csv", &rows)?;
    Ok(())
}

fn run_reference_age(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let (_, m) = jif_map(s, inp)?;
    let prof = reference_age_profile(&inp.corpus, &inp.index, &sc.binning, &m);
    let mut t = table(
        &inp.out,
        "reference_age.csv",
        &["bin", "references", "mean_age", "mean_popularity", "mean_reference_jif"],
    )?;
    for b in &prof.bins {
        t.row(vec![
            b.bin.to_string(),
            b.references.to_string(),
            opt(b.mean_age),
            opt(b.mean_popularity),
            opt(b.mean_reference_jif),
        ])?;
    }
    t.finish()?;
    if prof.unresolved > 0 || prof.without_jif > 0 {
        log::info!(
            "reference-age: {} unresolved references, {} resolved without a JIF",
            prof.unresolved,
            prof.without_jif
        );
    }
    Ok(())
}

fn run_jif_citation(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let jif = doc_values(s, inp, "jif")?;
    let cites = doc_values(s, inp, "citations")?;
    let frac = s.get_or("lowess_frac", DEFAULT_LOWESS_FRAC)?;
    let prof = jif_citation_by_bin(&sc.binning, &jif, &cites, frac)?;
    let mut t =
        table(&inp.out, "jif_citation.csv", &["bin", "n", "mean_jif", "mean_citations", "pearson_r", "r_squared"])?;
    let mut lw = table(&inp.out, "jif_citation_lowess.csv", &["bin", "jif", "fitted_citations"])?;
    for b in &prof.bins {
        t.row(vec![
            b.bin.to_string(),
            b.n.to_string(),
            num(b.mean_jif),
            num(b.mean_citations),
            opt(b.pearson_r),
            opt(b.r_squared),
        ])?;
        for (x, y) in &b.lowess {
            lw.row(vec![b.bin.to_string(), num(*x), num(*y)])?;
        }
    }
    t.finish()?;
    lw.finish()?;
    let mut rows = Vec::new();
    if let Some(f) = &prof.quadratic {
        rows.extend(StatRow::fit("quadratic_citations", f));
    }
    if let Some(c) = &prof.jif_correlation {
        rows.push(StatRow::test("pearson", "log_perplexity_jif", c, Some(jif.len())));
    }
    for n in &prof.notes {
        log::warn!("jif-citation: {n}");
    }
    write_stats(&inp.out, "jif_citation_tests.csv", &rows)?;
    maybe_svg(
        s,
        &inp.out,
        "jif_citation",
        "citations by perplexity bin",
        "mean citations",
        bin_samples(&sc.binning, &cites),
        Statistic::Mean,
    )
}

fn run_skewness(_s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let ppl: Vec<f64> = sc.values.values().copied().collect();
    let logged: Vec<f64> = ppl.iter().map(|v| v.ln()).collect();
    let mut t = table(&inp.out, "skewness.csv", &["model_id", "measure", "n", "skewness", "z", "p_value"])?;
    for (measure, x) in [("perplexity", &ppl), ("log_perplexity", &logged)] {
        let g1 = sample_skewness(x).ok();
        let z = skewness_z(x).ok();
        t.row(vec![
            sc.model_id.clone(),
            measure.into(),
            x.len().to_string(),
            opt(g1),
            opt(z.as_ref().map(|z| z.statistic)),
            opt(z.as_ref().map(|z| z.p_value)),
        ])?;
    }
    t.finish()?;
    Ok(())
}

fn run_stability(s: &Settings, inp: &Inputs) -> CliResult<()> {
    let sc = inp.scored()?;
    let model = load_model(&s.require_input("model")?)?;
    let lexicon = SynonymLexicon::parse(open(&s.require_input("synonyms")?)?)?;
    if lexicon.is_empty() {
        return Err(runtime("synonym lexicon is empty"));
    }
    let id = default_model_id(s, &model);
    let backend = NGramBackend::new(model, id);
    let pool: Vec<&perplex_core::corpus::PaperRecord> = sc.values.keys().filter_map(|id| inp.corpus.get(id)).collect();
    let want = s.get_or("sample", DEFAULT_STABILITY_SAMPLE)?.min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed(s)?);
    let mut picked = rand::seq::index::sample(&mut rng, pool.len(), want).into_vec();
    picked.sort_unstable();
    let docs: Vec<&perplex_core::corpus::PaperRecord> = picked.into_iter().map(|i| pool[i]).collect();
    let curve = synonym_stability(
        &backend,
        &docs,
        &lexicon,
        s.get_or("max_k", DEFAULT_MAX_K)?,
        s.get_or("reps", DEFAULT_REPS)?,
        seed(s)?,
    )?;
    let mut t = table(&inp.out, "stability.csv", &["k", "trials", "mean_abs_delta"])?;
    for i in 0..curve.ks.len() {
        t.row(vec![curve.ks[i].to_string(), curve.trial_counts[i].to_string(), num(curve.mean_abs_delta[i])])?;
    }
    t.finish()?;
    let mut t = table(
        &inp.out,
        "stability_trials.csv",
        &["doc_id", "rep", "k", "base_perplexity", "new_perplexity", "replacements"],
    )?;
    for tr in &curve.trials {
        let reps: Vec<String> = tr.replacements.iter().map(|(pos, w)| format!("{pos}:{w}")).collect();
        t.row(vec![
            tr.doc_id.clone(),
            tr.rep.to_string(),
            tr.k.to_string(),
            num(tr.base_perplexity),
            num(tr.new_perplexity),
            reps.join(";"),
        ])?;
    }
    t.finish()?;
    let mut rows = vec![
        StatRow::value("stability", "reference_sd", curve.reference_sd),
        StatRow::value("stability", "skipped_trials", curve.skipped as f64),
    ];
    match curve.quadratic {
        Some(q) => {
            for (name, c) in ["intercept", "k", "k_sq"].iter().zip(q) {
                rows.push(StatRow::value("quadratic", name, c));
            }
        }
        None => log::warn!("stability: fewer than three k values, no quadratic fit"),
    }
    write_stats(&inp.out, "stability_tests.csv", &rows)?;
    Ok(())
}

fn dispatch(name: &str, s: &Settings, inp: &Inputs) -> CliResult<()> {
    match name {
        "jif" => run_jif(s, inp),
        "extreme-share" => run_extreme_share(s, inp),
        "dispersion" => run_dispersion(s, inp),
        "review" => run_review(s, inp),
        "word-ratio" => run_word_ratio(s, inp),
        "uncertainty" => run_uncertainty(s, inp),
        "groups" => run_groups(s, inp),
        "interdisciplinarity" => run_interdisciplinarity(s, inp),
        "reference-age" => run_reference_age(s, inp),
        "jif-citation" => run_jif_citation(s, inp),
        "skewness" => run_skewness(s, inp),
        "stability" => run_stability(s, inp),
        _ => unreachable!("pipeline names are validated first"),
    }
}

pub fn analyze(s: &Settings, name: &str) -> CliResult<()> {
    if !PIPELINES.contains(&name) {
        return Err(usage(format!("unknown pipeline {name:?}; available: {}", PIPELINES.join(", "))));
    }
    let inp = Inputs::load(s, name != "jif")?;
    log::info!("running {name}");
    dispatch(name, s, &inp)
}

/// Every pipeline variant `report` attempts, as (pipeline, key, value).
const REPORT_STEPS: [(&str, &str, &str); 20] = [
    ("jif", "", ""),
    ("extreme-share", "flag", "jif-top"),
    ("extreme-share", "flag", "jif-bottom"),
    ("extreme-share", "flag", "delay-long"),
    ("extreme-share", "flag", "delay-short"),
    ("extreme-share", "flag", "confidence-low"),
    ("dispersion", "value", "jif"),
    ("dispersion", "value", "citations"),
    ("dispersion", "value", "rating"),
    ("dispersion", "value", "disparity"),
    ("dispersion", "value", "confidence"),
    ("review", "", ""),
    ("uncertainty", "", ""),
    ("word-ratio", "", ""),
    ("groups", "label", "funder"),
    ("groups", "label", "doc-type"),
    ("interdisciplinarity", "", ""),
    ("reference-age", "", ""),
    ("jif-citation", "", ""),
    ("skewness", "", ""),
];

/// Runs every step; steps missing an input are skipped, failures are
/// recorded and turn the exit status into a runtime failure.
pub fn report(s: &Settings) -> CliResult<()> {
    let inp = Inputs::load(s, true)?;
    let mut steps: Vec<(String, &str, Settings)> = REPORT_STEPS
        .iter()
        .map(|(p, k, v)| {
            let mut st = s.clone();
            let label = if k.is_empty() {
                p.to_string()
            } else {
                st.set_flag(k, Some(*v));
                format!("{p}:{v}")
            };
            (label, *p, st)
        })
        .collect();
    if s.raw("model").is_some() && s.raw("synonyms").is_some() {
        steps.push(("stability".into(), "stability", s.clone()));
    }
    let mut idx = table(&inp.out, "report_index.csv", &["step", "status", "detail"])?;
    let mut failed = Vec::new();
    for (label, p, st) in &steps {
        log::info!("report: {label}");
        let (status, detail) = match dispatch(p, st, &inp) {
            Ok(()) => ("ok", String::new()),
            Err(CliError::Usage(m)) => ("skipped", m),
            Err(CliError::Runtime(e)) => {
                failed.push(label.clone());
                ("failed", format!("{e:#}"))
            }
        };
        if status != "ok" {
            log::warn!("{label}: {status}: {detail}");
        }
        idx.row(vec![label.clone(), status.into(), detail])?;
    }
    idx.finish()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(runtime(format!("report steps failed: {}", failed.join(", "))))
    }
}
