//! Command-line front end: ingestion, n-gram training, scoring, analysis
//! pipelines and report emission.
//!
//! [`run`] is the whole program; the binary only forwards its exit code.
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod commands;
mod config;
mod output;
mod pipelines;
mod svg;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, Settings};
pub use pipelines::PIPELINES;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "PERPLEX_CONFIG";
pub const DEFAULT_OUT: &str = "perplex-out";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.into())
            }
        }
    )*};
}
runtime_from!(anyhow::Error, perplex_core::CoreError, perplex_stats::StatsError, std::io::Error, csv::Error);

pub type CliResult<T> = Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn runtime(msg: impl fmt::Display) -> CliError {
    CliError::Runtime(anyhow::anyhow!("{msg}"))
}

#[derive(Debug, Parser)]
#[command(name = "perplex", version, about = "Perplexity-based corpus analytics")]
struct Cli {
    /// Flat `key = value` config file; any flag given overrides it.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of perplexity bins (default 10).
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Model knowledge cutoff, YYYY-MM or YYYY-MM-DD.
    #[arg(long, global = true, value_name = "DATE")]
    cutoff: Option<String>,
    /// Names n-gram scores (default kn<order>); in analyze, selects rows of scores.csv.
    #[arg(long, global = true)]
    model_id: Option<String>,
    /// Output directory (default perplex-out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Only log warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted surprise effects.
    Synth {
        /// Post-cutoff papers to score (default 10000).
        #[arg(long)]
        focal_papers: Option<usize>,
        /// Number of journals (default 200).
        #[arg(long)]
        journals: Option<usize>,
    },
    /// Validate papers.jsonl (and reviews.jsonl) into a snapshot.
    Ingest {
        /// Paper records, one JSON object per line.
        #[arg(long, value_name = "FILE")]
        papers: Option<PathBuf>,
        /// Optional review bundles, one JSON object per line.
        #[arg(long, value_name = "FILE")]
        reviews: Option<PathBuf>,
    },
    /// Train the Kneser-Ney model on papers published up to the cutoff.
    TrainLm {
        /// Ingested corpus (default <out>/snapshot.jsonl).
        #[arg(long, value_name = "FILE")]
        snapshot: Option<PathBuf>,
        /// N-gram order (default 3).
        #[arg(long)]
        order: Option<usize>,
        /// Absolute discount (default 0.75).
        #[arg(long)]
        discount: Option<f64>,
    },
    /// Score post-cutoff abstracts with a trained model or imported logprobs.
    Score {
        /// Ingested corpus (default <out>/snapshot.jsonl).
        #[arg(long, value_name = "FILE")]
        snapshot: Option<PathBuf>,
        /// Model written by train-lm.
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
        /// Externally produced token logprobs, instead of --model.
        #[arg(long, value_name = "FILE")]
        logprobs: Option<PathBuf>,
    },
    /// Convert an external logprobs.jsonl into scores.csv.
    ImportLogprobs {
        /// One JSON object per document: doc_id, model_id, tokens, logprobs.
        #[arg(long, value_name = "FILE")]
        logprobs: Option<PathBuf>,
    },
    /// Run one analysis pipeline.
    Analyze {
        /// One of: jif, extreme-share, dispersion, review, word-ratio, uncertainty, groups,
        /// interdisciplinarity, reference-age, jif-citation, skewness, stability.
        pipeline: String,
        #[command(flatten)]
        opts: AnalyzeArgs,
    },
    /// Run every pipeline whose inputs are available.
    Report {
        #[command(flatten)]
        opts: AnalyzeArgs,
    },
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Ingested corpus (default <out>/snapshot.jsonl).
    #[arg(long, value_name = "FILE")]
    snapshot: Option<PathBuf>,
    /// Perplexity table (default <out>/scores.csv).
    #[arg(long, value_name = "FILE")]
    scores: Option<PathBuf>,
    /// Review bundles (default <out>/reviews.jsonl when present).
    #[arg(long, value_name = "FILE")]
    reviews: Option<PathBuf>,
    /// Trained model, for the stability pipeline.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Tab-separated synonym groups, for the stability pipeline.
    #[arg(long, value_name = "FILE")]
    synonyms: Option<PathBuf>,
    /// Year whose citations define the JIF (default: cutoff year).
    #[arg(long)]
    jif_year: Option<i32>,
    /// extreme-share flag: jif-top, jif-bottom, delay-long, delay-short, confidence-low.
    #[arg(long)]
    flag: Option<String>,
    /// Extreme share flagged (default 0.05; 0.01 for delays).
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated logistic controls: month, field, doc-type.
    #[arg(long)]
    controls: Option<String>,
    /// dispersion value: rating, disparity, confidence, delay, jif, citations.
    #[arg(long)]
    value: Option<String>,
    /// Quantile bins for the binned-variance regression (default 20).
    #[arg(long)]
    variance_bins: Option<usize>,
    /// word-ratio: share of documents at each end (default 0.5, a median split).
    #[arg(long)]
    share: Option<f64>,
    /// word-ratio: minimum count of a word in each group (default 20).
    #[arg(long)]
    min_count: Option<u64>,
    /// Comma-separated term-set files for word-ratio.
    #[arg(long, value_name = "FILES")]
    term_sets: Option<String>,
    /// Uncertainty lexicon file, one term per line.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// groups label: funder, doc-type, retracted, field.
    #[arg(long)]
    label: Option<String>,
    /// CSV of doc_id,label pairs for the groups pipeline.
    #[arg(long, value_name = "FILE")]
    labels_file: Option<PathBuf>,
    /// jif-citation: LOWESS span as a fraction of the data (default 2/3).
    #[arg(long)]
    lowess_frac: Option<f64>,
    /// Largest number of synonym swaps per document (default 10).
    #[arg(long)]
    max_k: Option<usize>,
    /// Repetitions per swap count (default 1).
    #[arg(long)]
    reps: Option<usize>,
    /// Documents sampled for the stability pipeline (default 1000).
    #[arg(long)]
    sample: Option<usize>,
    /// Also draw SVG decile charts with bootstrap bands.
    #[arg(long)]
    svg: bool,
    /// Bootstrap resamples per bin for SVG bands (default 1000).
    #[arg(long)]
    bootstrap: Option<usize>,
}

fn path_str(p: Option<PathBuf>) -> Option<String> {
    p.map(|p| p.to_string_lossy().into_owned())
}

impl AnalyzeArgs {
    fn apply(self, s: &mut Settings) {
        s.set_flag("snapshot", path_str(self.snapshot));
        s.set_flag("scores", path_str(self.scores));
        s.set_flag("reviews", path_str(self.reviews));
        s.set_flag("model", path_str(self.model));
        s.set_flag("synonyms", path_str(self.synonyms));
        s.set_flag("jif_year", self.jif_year);
        s.set_flag("flag", self.flag);
        s.set_flag("threshold", self.threshold);
        s.set_flag("controls", self.controls);
        s.set_flag("value", self.value);
        s.set_flag("variance_bins", self.variance_bins);
        s.set_flag("share", self.share);
        s.set_flag("min_count", self.min_count);
        s.set_flag("term_sets", self.term_sets);
        s.set_flag("lexicon", path_str(self.lexicon));
        s.set_flag("label", self.label);
        s.set_flag("labels_file", path_str(self.labels_file));
        s.set_flag("lowess_frac", self.lowess_frac);
        s.set_flag("max_k", self.max_k);
        s.set_flag("reps", self.reps);
        s.set_flag("sample", self.sample);
        s.set_flag("svg", self.svg.then_some("true"));
        s.set_flag("bootstrap", self.bootstrap);
    }
}

fn load_settings(config: Option<PathBuf>) -> CliResult<Settings> {
    let Some(path) = config else {
        return Ok(Settings::default());
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    Ok(Settings::from_config(parse_config(&text, &path)?))
}

fn init_logging(quiet: bool) {
    let level = if quiet { "warn" } else { "info" };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("PERPLEX_LOG", level))
        .format_timestamp(None)
        .format_target(false)
        .try_init();
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut s = load_settings(cli.config)?;
    s.set_flag("seed", cli.seed);
    s.set_flag("bins", cli.bins);
    s.set_flag("cutoff", cli.cutoff);
    s.set_flag("model_id", cli.model_id);
    s.set_flag("out", path_str(cli.out));
    match cli.command {
        Command::Synth { focal_papers, journals } => {
            s.set_flag("focal_papers", focal_papers);
            s.set_flag("journals", journals);
            commands::synth(&s)
        }
        Command::Ingest { papers, reviews } => {
            s.set_flag("papers", path_str(papers));
            s.set_flag("reviews", path_str(reviews));
            commands::ingest(&s)
        }
        Command::TrainLm { snapshot, order, discount } => {
            s.set_flag("snapshot", path_str(snapshot));
            s.set_flag("order", order);
            s.set_flag("discount", discount);
            commands::train_lm(&s)
        }
        Command::Score { snapshot, model, logprobs } => {
            s.set_flag("snapshot", path_str(snapshot));
            s.set_flag("model", path_str(model));
            s.set_flag("logprobs", path_str(logprobs));
            commands::score(&s)
        }
        Command::ImportLogprobs { logprobs } => {
            s.set_flag("logprobs", path_str(logprobs));
            commands::import_logprobs(&s)
        }
        Command::Analyze { pipeline, opts } => {
            opts.apply(&mut s);
            pipelines::analyze(&s, &pipeline)
        }
        Command::Report { opts } => {
            opts.apply(&mut s);
            pipelines::report(&s)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(cli.quiet);
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("perplex: {e}");
            e.exit_code()
        }
    }
}
