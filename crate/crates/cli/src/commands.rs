//! Data-preparation commands: synth, ingest, train-lm, score, import-logprobs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use perplex_core::corpus::{
    filter_post_cutoff, ingest_papers, ingest_reviews, parse_cutoff, write_papers, write_reviews, Corpus, IngestReport,
    ReviewBundle,
};
use perplex_core::lm::{
    import_token_logprobs, score_all, tokenize, train_ngram, ImportedScores, NGramBackend, NGramModel, ScoredDocument,
    ScoringBackend, DEFAULT_DISCOUNT,
};
use perplex_core::synth::{generate, SynthConfig};

use crate::output::{num, table};
use crate::{runtime, usage, CliResult, Settings, DEFAULT_OUT};

pub const SNAPSHOT: &str = "snapshot.jsonl";
pub const REVIEWS: &str = "reviews.jsonl";
pub const MODEL: &str = "model.json";
pub const SCORES: &str = "scores.csv";
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_SEED: u64 = 42;

pub fn out_dir(s: &Settings) -> CliResult<PathBuf> {
    let out = PathBuf::from(s.raw("out").unwrap_or(DEFAULT_OUT));
    std::fs::create_dir_all(&out).map_err(|e| runtime(format!("cannot create {}: {e}", out.display())))?;
    Ok(out)
}

pub fn seed(s: &Settings) -> CliResult<u64> {
    s.get_or("seed", DEFAULT_SEED)
}

pub fn cutoff(s: &Settings) -> CliResult<Option<NaiveDate>> {
    s.raw("cutoff")
        .map(|c| parse_cutoff(c).ok_or_else(|| usage(format!("invalid cutoff {c:?}; expected YYYY-MM or YYYY-MM-DD"))))
        .transpose()
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| runtime(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))
}

fn warn_skips(path: &Path, report: &IngestReport) {
    if report.total_skipped() > 0 {
        log::warn!("{}: {report}", path.display());
    }
}

pub fn load_snapshot(path: &Path) -> CliResult<Corpus> {
    let (corpus, report) = ingest_papers(open(path)?)?;
    warn_skips(path, &report);
    if corpus.is_empty() {
        return Err(runtime(format!("{}: no papers", path.display())));
    }
    Ok(corpus)
}

pub fn load_reviews(path: &Path) -> CliResult<BTreeMap<String, ReviewBundle>> {
    let (reviews, report) = ingest_reviews(open(path)?)?;
    warn_skips(path, &report);
    Ok(reviews)
}

pub fn synth(s: &Settings) -> CliResult<()> {
    let d = SynthConfig::default();
    let cfg = SynthConfig {
        seed: seed(s)?,
        focal_papers: s.get_or("focal_papers", d.focal_papers)?,
        journals: s.get_or("journals", d.journals)?,
        ..d
    };
    let out = out_dir(s)?;
    log::info!("generating {} focal papers", cfg.focal_papers);
    let synth = generate(&cfg)?;
    let corpus = Corpus::from_records(synth.papers)?;
    let mut w = create(&out.join("papers.jsonl"))?;
    write_papers(&corpus, &mut w)?;
    w.flush()?;
    let mut w = create(&out.join(REVIEWS))?;
    write_reviews(&synth.reviews, &mut w)?;
    w.flush()?;
    let mut w = create(&out.join("synonyms.tsv"))?;
    for g in &synth.synonyms {
        writeln!(w, "{}", g.join("\t"))?;
    }
    w.flush()?;
    let mut t = table(&out, "surprise.csv", &["doc_id", "surprise"])?;
    for (id, u) in &synth.surprise {
        t.row(vec![id.clone(), num(*u)])?;
    }
    t.finish()?;
    log::info!(
        "wrote {} papers and {} reviews to {}; cutoff {}",
        corpus.len(),
        synth.reviews.len(),
        out.display(),
        synth.cutoff
    );
    Ok(())
}

pub fn ingest(s: &Settings) -> CliResult<()> {
    let papers = s.require_input("papers")?;
    let reviews = s.input("reviews")?;
    let out = out_dir(s)?;
    let (corpus, report) = ingest_papers(open(&papers)?)?;
    eprintln!("{}: {report}", papers.display());
    let mut diag = table(&out, "ingest_report.csv", &["source", "line", "reason", "detail"])?;
    let mut add = |source: &str, r: &IngestReport| -> CliResult<()> {
        for (line, reason, detail) in &r.diagnostics {
            diag.row(vec![source.into(), line.to_string(), reason.as_str().into(), detail.clone()])?;
        }
        Ok(())
    };
    add("papers", &report)?;
    let mut w = create(&out.join(SNAPSHOT))?;
    write_papers(&corpus, &mut w)?;
    w.flush()?;
    if let Some(path) = reviews {
        let (bundles, rreport) = ingest_reviews(open(&path)?)?;
        eprintln!("{}: {rreport}", path.display());
        add("reviews", &rreport)?;
        let unknown = bundles.keys().filter(|id| !corpus.contains(id)).count();
        if unknown > 0 {
            log::warn!("{unknown} review bundles name papers outside the snapshot");
        }
        let mut w = create(&out.join(REVIEWS))?;
        write_reviews(bundles.values(), &mut w)?;
        w.flush()?;
    }
    diag.finish()?;
    if corpus.is_empty() {
        return Err(runtime(format!("{}: no valid papers", papers.display())));
    }
    Ok(())
}

pub fn train_lm(s: &Settings) -> CliResult<()> {
    let out = out_dir(s)?;
    let snapshot = s.input_or_default("snapshot", &out, SNAPSHOT)?;
    let order = s.get_or("order", DEFAULT_ORDER)?;
    let discount = s.get_or("discount", DEFAULT_DISCOUNT)?;
    let corpus = load_snapshot(&snapshot)?;
    let cutoff = cutoff(s)?;
    if cutoff.is_none() {
        log::warn!("no cutoff given; training on every paper");
    }
    let docs: Vec<Vec<String>> = corpus
        .iter()
        .filter(|p| cutoff.is_none_or(|c| p.pub_date <= c))
        .map(|p| tokenize(&p.abstract_text))
        .filter(|t| !t.is_empty())
        .collect();
    if docs.is_empty() {
        return Err(runtime("no papers on or before the cutoff to train on"));
    }
    log::info!("training order-{order} model on {} abstracts", docs.len());
    let model = train_ngram(&docs, order, discount)?;
    let path = out.join(MODEL);
    let mut w = create(&path)?;
    model.save(&mut w)?;
    w.flush()?;
    log::info!("wrote {} ({} words)", path.display(), model.words().len());
    Ok(())
}

pub fn load_model(path: &Path) -> CliResult<NGramModel> {
    Ok(NGramModel::load(open(path)?)?)
}

pub fn default_model_id(s: &Settings, model: &NGramModel) -> String {
    s.raw("model_id").map(str::to_string).unwrap_or_else(|| format!("kn{}", model.order()))
}

fn import(s: &Settings, path: &Path) -> CliResult<Vec<ScoredDocument>> {
    let (mut docs, report) = import_token_logprobs(open(path)?)?;
    for (line, reason) in &report.rejected {
        log::warn!("{}:{line}: {reason}", path.display());
    }
    if let Some(id) = s.raw("model_id") {
        docs.retain(|d| d.model_id == id);
    }
    if docs.is_empty() {
        return Err(runtime(format!("{}: no usable documents", path.display())));
    }
    Ok(docs)
}

fn write_scores(out: &Path, mut docs: Vec<ScoredDocument>) -> CliResult<()> {
    docs.sort_by(|a, b| (&a.doc_id, &a.model_id).cmp(&(&b.doc_id, &b.model_id)));
    let mut t = table(out, SCORES, &["doc_id", "model_id", "token_count", "perplexity"])?;
    for d in &docs {
        t.row(vec![d.doc_id.clone(), d.model_id.clone(), d.token_count().to_string(), num(d.perplexity)])?;
    }
    t.finish()?;
    Ok(())
}

pub fn score(s: &Settings) -> CliResult<()> {
    let model = s.input("model")?;
    let logprobs = s.input("logprobs")?;
    let out = out_dir(s)?;
    let backend: Box<dyn ScoringBackend> = match (model, logprobs) {
        (Some(_), Some(_)) => return Err(usage("give either --model or --logprobs, not both")),
        (None, None) => return Err(usage("no scoring backend; pass --model or --logprobs")),
        (Some(m), None) => {
            let model = load_model(&m)?;
            let id = default_model_id(s, &model);
            Box::new(NGramBackend::new(model, id))
        }
        (None, Some(l)) => Box::new(ImportedScores::new(import(s, &l)?)?),
    };
    let snapshot = s.input_or_default("snapshot", &out, SNAPSHOT)?;
    let corpus = load_snapshot(&snapshot)?;
    let targets = match cutoff(s)? {
        Some(c) => filter_post_cutoff(&corpus, c),
        None => {
            log::warn!("no cutoff given; scoring every paper");
            corpus
        }
    };
    log::info!("scoring {} abstracts with {}", targets.len(), backend.model_id());
    let (scored, skipped) = score_all(backend.as_ref(), targets.papers());
    if !skipped.is_empty() {
        log::warn!("{} documents could not be scored", skipped.len());
    }
    if scored.is_empty() {
        return Err(runtime("no document could be scored"));
    }
    write_scores(&out, scored)
}

pub fn import_logprobs(s: &Settings) -> CliResult<()> {
    let path = s.require_input("logprobs")?;
    let out = out_dir(s)?;
    let docs = import(s, &path)?;
    log::info!("imported {} documents", docs.len());
    write_scores(&out, docs)
}
