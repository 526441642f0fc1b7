//! CSV tables with fixed headers. Floats use the shortest round-trip
//! representation, in exponent form outside [1e-4, 1e15); absent values are
//! empty fields.

use std::fs::File;
use std::path::{Path, PathBuf};

use perplex_stats::{RegressionFit, TestResult};

use crate::{runtime, CliResult};

pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Table {
    writer: csv::Writer<File>,
    path: PathBuf,
    width: usize,
}

pub fn table(dir: &Path, name: &str, header: &[&str]) -> CliResult<Table> {
    let path = dir.join(name);
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(header)?;
    Ok(Table { writer, path, width: header.len() })
}

impl Table {
    pub fn row(&mut self, fields: Vec<String>) -> CliResult<()> {
        if fields.len() != self.width {
            return Err(runtime(format!(
                "{}: row has {} fields, header has {}",
                self.path.display(),
                fields.len(),
                self.width
            )));
        }
        self.writer.write_record(&fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.writer.flush()?;
        log::info!("wrote {}", self.path.display());
        Ok(self.path)
    }
}

/// Shared schema for hypothesis tests and regression terms.
pub const STATS_HEADER: [&str; 12] = [
    "analysis",
    "term",
    "estimate",
    "std_error",
    "statistic",
    "df",
    "p_value",
    "ci_low",
    "ci_high",
    "exp_estimate",
    "n",
    "fit_stat",
];

#[derive(Debug, Clone, Default)]
pub struct StatRow {
    pub analysis: String,
    pub term: String,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub statistic: Option<f64>,
    pub df: Option<f64>,
    pub p_value: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub exp_estimate: Option<f64>,
    pub n: Option<usize>,
    pub fit_stat: Option<f64>,
}

impl StatRow {
    /// `estimate` carries the test's effect size.
    pub fn test(analysis: &str, term: &str, t: &TestResult, n: Option<usize>) -> Self {
        Self {
            analysis: analysis.into(),
            term: term.into(),
            estimate: t.effect_size,
            statistic: Some(t.statistic),
            df: t.df,
            p_value: Some(t.p_value),
            ci: t.ci,
            n,
            ..Default::default()
        }
    }

    pub fn value(analysis: &str, term: &str, v: f64) -> Self {
        Self { analysis: analysis.into(), term: term.into(), estimate: Some(v), ..Default::default() }
    }

    pub fn fit(analysis: &str, f: &RegressionFit) -> Vec<Self> {
        (0..f.names.len())
            .map(|i| Self {
                analysis: analysis.into(),
                term: f.names[i].clone(),
                estimate: Some(f.coefficients[i]),
                std_error: Some(f.standard_errors[i]),
                statistic: Some(f.statistics[i]),
                df: Some(f.df_resid),
                p_value: Some(f.p_values[i]),
                ci: Some(f.ci_95[i]),
                exp_estimate: f.exponentiated.as_ref().map(|e| e[i]),
                n: Some(f.n),
                fit_stat: Some(f.fit_stat),
            })
            .collect()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.analysis.clone(),
            self.term.clone(),
            opt(self.estimate),
            opt(self.std_error),
            opt(self.statistic),
            opt(self.df),
            opt(self.p_value),
            opt(self.ci.map(|c| c.0)),
            opt(self.ci.map(|c| c.1)),
            opt(self.exp_estimate),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.fit_stat),
        ]
    }
}

pub fn write_stats(dir: &Path, name: &str, rows: &[StatRow]) -> CliResult<PathBuf> {
    let mut t = table(dir, name, &STATS_HEADER)?;
    for r in rows {
        t.row(r.fields())?;
    }
    t.finish()
}
