//! Linear, logistic and negative-binomial regression.

mod logistic;
mod negbin;

pub use logistic::{fit_logistic, LOGISTIC_MAX_ITER, LOGISTIC_TOL};
pub use negbin::{fit_negbin, NEGBIN_MAX_OUTER};

use crate::describe::mean;
use crate::dist::{t_quantile, t_two_sided};
use crate::error::{Result, StatsError};
use crate::linalg::{least_squares, LeastSquares, Matrix};

/// Named design matrix, one column per regressor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Design {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Design {
    pub fn new() -> Self {
        Self::default()
    }

    /// Design holding only an intercept column of length `n`.
    pub fn with_intercept(n: usize) -> Self {
        Self::new().column("intercept", vec![1.0; n])
    }

    pub fn column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.push(name, values);
        self
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        if let Some(first) = self.columns.first() {
            assert_eq!(first.len(), values.len(), "design columns must share length");
        }
        self.names.push(name.into());
        self.columns.push(values);
    }

    /// Appends treatment-coded dummies for a categorical variable. Levels are
    /// sorted; the first level is the reference and gets no column.
    pub fn push_dummies(&mut self, prefix: &str, labels: &[String]) {
        let mut levels: Vec<&String> = labels.iter().collect();
        levels.sort();
        levels.dedup();
        for level in levels.into_iter().skip(1) {
            let col = labels.iter().map(|l| f64::from(u8::from(l == level))).collect();
            self.push(format!("{prefix}[{level}]"), col);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(&self.columns)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.n_cols() == 0 {
            return Err(StatsError::InvalidInput("design has no columns".into()));
        }
        if self.n_rows() != n {
            return Err(StatsError::InvalidInput(format!("design has {} rows but response has {n}", self.n_rows())));
        }
        if self.columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(StatsError::InvalidInput("non-finite value in design".into()));
        }
        Ok(())
    }

    fn dependent_names(&self, idx: Vec<usize>) -> StatsError {
        StatsError::RankDeficient(idx.into_iter().map(|i| self.names[i].clone()).collect())
    }

    fn solve(&self, x: &Matrix, y: &[f64], w: Option<&[f64]>) -> Result<LeastSquares> {
        least_squares(x, y, w).map_err(|idx| self.dependent_names(idx))
    }
}

/// Fitted regression with classical (or Wald) inference.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// t (OLS) or z (GLM) statistics.
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub ci_95: Vec<(f64, f64)>,
    /// exp(coefficient): odds ratios for logistic, IRRs for negative binomial.
    pub exponentiated: Option<Vec<f64>>,
    /// R² for OLS, McFadden pseudo-R² for GLMs.
    pub fit_stat: f64,
    pub n: usize,
    pub df_resid: f64,
    pub converged: bool,
    pub iterations: usize,
    pub log_likelihood: Option<f64>,
    /// NB2 dispersion α (variance = μ + αμ²).
    pub dispersion: Option<f64>,
}

/// One row of a fitted coefficient table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub standard_error: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub ci_95: (f64, f64),
    pub exponentiated: Option<f64>,
}

impl RegressionFit {
    pub fn term(&self, name: &str) -> Option<Term> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(Term {
            coefficient: self.coefficients[i],
            standard_error: self.standard_errors[i],
            statistic: self.statistics[i],
            p_value: self.p_values[i],
            ci_95: self.ci_95[i],
            exponentiated: self.exponentiated.as_ref().map(|e| e[i]),
        })
    }
}

fn ratio_stat(coef: f64, se: f64) -> f64 {
    if se > 0.0 {
        coef / se
    } else if coef == 0.0 {
        0.0
    } else {
        coef.signum() * f64::INFINITY
    }
}

/// Ordinary least squares with classical standard errors and t-based CIs.
///
/// R² uses the centred total sum of squares and is 0 when `y` is constant.
pub fn fit_linear(y: &[f64], design: &Design) -> Result<RegressionFit> {
    let n = y.len();
    design.validate(n)?;
    let p = design.n_cols();
    if n <= p {
        return Err(StatsError::InsufficientData(format!("OLS needs more observations ({n}) than columns ({p})")));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite response".into()));
    }
    let x = design.matrix();
    let ls = design.solve(&x, y, None)?;
    let df = (n - p) as f64;
    let sigma2 = ls.rss / df;
    let tq = t_quantile(0.975, df);
    let my = mean(y);
    let tss: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let r2 = if tss > 0.0 { 1.0 - ls.rss / tss } else { 0.0 };

    let mut se = Vec::with_capacity(p);
    let mut stat = Vec::with_capacity(p);
    let mut pv = Vec::with_capacity(p);
    let mut ci = Vec::with_capacity(p);
    for (j, &b) in ls.coef.iter().enumerate() {
        let s = (sigma2 * ls.unscaled_cov[j][j]).max(0.0).sqrt();
        let t = ratio_stat(b, s);
        se.push(s);
        stat.push(t);
        pv.push(t_two_sided(t, df));
        ci.push((b - tq * s, b + tq * s));
    }
    Ok(RegressionFit {
        names: design.names().to_vec(),
        coefficients: ls.coef,
        standard_errors: se,
        statistics: stat,
        p_values: pv,
        ci_95: ci,
        exponentiated: None,
        fit_stat: r2,
        n,
        df_resid: df,
        converged: true,
        iterations: 1,
        log_likelihood: None,
        dispersion: None,
    })
}

/// Least-squares polynomial coefficients (ascending powers) without
/// inference; accepts exactly determined systems.
pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidInput("x and y lengths differ".into()));
    }
    if x.len() < degree + 1 {
        return Err(StatsError::InsufficientData(format!("degree {degree} fit needs at least {} points", degree + 1)));
    }
    let mut design = Design::with_intercept(x.len());
    for d in 1..=degree {
        design.push(format!("x^{d}"), x.iter().map(|v| v.powi(d as i32)).collect());
    }
    let m = design.matrix();
    Ok(design.solve(&m, y, None)?.coef)
}

/// Wald inference shared by the GLM fitters.
pub(crate) struct WaldSummary {
    pub se: Vec<f64>,
    pub stat: Vec<f64>,
    pub p: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
}

pub(crate) fn wald(coef: &[f64], unscaled_cov: &[Vec<f64>]) -> WaldSummary {
    use crate::dist::{normal_two_sided, Z_975};
    let mut out = WaldSummary { se: Vec::new(), stat: Vec::new(), p: Vec::new(), ci: Vec::new() };
    for (j, &b) in coef.iter().enumerate() {
        let s = unscaled_cov[j][j].max(0.0).sqrt();
        let z = ratio_stat(b, s);
        out.se.push(s);
        out.stat.push(z);
        out.p.push(normal_two_sided(z));
        out.ci.push((b - Z_975 * s, b + Z_975 * s));
    }
    out
}
