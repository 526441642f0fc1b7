//! Two-sample tests, contingency tables, correlation and skewness.
//!
//! All p-values are two-sided.

use crate::describe::{average_ranks, mean, median, variance};
use crate::dist::{chi2_sf, f_sf, normal_quantile, normal_two_sided, t_quantile, t_two_sided, Z_975};
use crate::error::{Result, StatsError};

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom (numerator df for F tests).
    pub df: Option<f64>,
    /// Denominator degrees of freedom for F tests.
    pub df2: Option<f64>,
    pub p_value: f64,
    /// Cohen's d, rank-biserial r, Cramér's V or g₁ depending on the test.
    pub effect_size: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

impl TestResult {
    /// Result with only a statistic and a p-value (clamped to [0, 1]).
    pub fn new(statistic: f64, p_value: f64) -> Self {
        Self { statistic, df: None, df2: None, p_value: p_value.clamp(0.0, 1.0), effect_size: None, ci: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    WelchT,
    MannWhitneyU,
    Levene,
    FlignerKilleen,
}

pub fn two_sample_test(kind: TestKind, a: &[f64], b: &[f64]) -> Result<TestResult> {
    match kind {
        TestKind::WelchT => welch_t(a, b),
        TestKind::MannWhitneyU => mann_whitney_u(a, b),
        TestKind::Levene => levene(a, b),
        TestKind::FlignerKilleen => fligner_killeen(a, b),
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(StatsError::Empty);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value in sample".into()));
    }
    Ok(())
}

fn require_len(x: &[f64], min: usize, what: &str) -> Result<()> {
    check_finite(x)?;
    if x.len() < min {
        return Err(StatsError::InsufficientData(format!(
            "{what} needs at least {min} observations per sample, got {}",
            x.len()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Welch t
// ---------------------------------------------------------------------------

/// Welch's unequal-variance t-test with pooled-SD Cohen's d.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_len(a, 2, "welch_t")?;
    require_len(b, 2, "welch_t")?;
    let (v1, v2) = (variance(a), variance(b));
    if v1 == 0.0 && v2 == 0.0 {
        return Err(StatsError::Degenerate("both samples have zero variance".into()));
    }
    Ok(welch_from_moments(mean(a), v1, a.len() as f64, mean(b), v2, b.len() as f64))
}

/// Welch's test from summary statistics (mean, SD, n) of each group.
pub fn welch_t_summary(m1: f64, s1: f64, n1: usize, m2: f64, s2: f64, n2: usize) -> Result<TestResult> {
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(StatsError::InvalidInput("standard deviations must be positive".into()));
    }
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::InsufficientData("welch_t_summary needs n >= 2 per group".into()));
    }
    Ok(welch_from_moments(m1, s1 * s1, n1 as f64, m2, s2 * s2, n2 as f64))
}

fn welch_from_moments(m1: f64, v1: f64, n1: f64, m2: f64, v2: f64, n2: f64) -> TestResult {
    let q1 = v1 / n1;
    let q2 = v2 / n2;
    let se = (q1 + q2).sqrt();
    let diff = m1 - m2;
    let t = diff / se;
    let df = (q1 + q2).powi(2) / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
    let pooled = (((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0)).sqrt();
    let tq = t_quantile(0.975, df);
    let mut r = TestResult::new(t, t_two_sided(t, df));
    r.df = Some(df);
    r.effect_size = Some(diff / pooled);
    r.ci = Some((diff - tq * se, diff + tq * se));
    r
}

// ---------------------------------------------------------------------------
// Mann-Whitney U
// ---------------------------------------------------------------------------

/// Largest n₁·n₂ for which the exact null distribution is enumerated.
pub const MANN_WHITNEY_EXACT_LIMIT: usize = 64;

/// Mann-Whitney U of `a` against `b` (count of a > b pairs, ties count ½).
///
/// Exact p-value from the permutation distribution of the (mid)rank sum when
/// n₁·n₂ ≤ 64; otherwise a tie-corrected normal approximation with
/// continuity correction. Effect size is the rank-biserial correlation.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<TestResult> {
    check_finite(a)?;
    check_finite(b)?;
    let n1 = a.len();
    let n2 = b.len();
    let combined: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&combined);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let nn = (n1 * n2) as f64;

    let p = if n1 * n2 <= MANN_WHITNEY_EXACT_LIMIT {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        exact_rank_sum_p(&doubled, n1)
    } else {
        let n = (n1 + n2) as f64;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
        let sigma = (nn / 12.0 * ((n + 1.0) - tie_term)).sqrt();
        if sigma == 0.0 {
            1.0
        } else {
            let dev = u1 - nn / 2.0;
            let corrected = (dev.abs() - 0.5).max(0.0);
            normal_two_sided(corrected / sigma)
        }
    };
    let mut r = TestResult::new(u1, p);
    r.effect_size = Some(2.0 * u1 / nn - 1.0);
    Ok(r)
}

/// Two-sided exact p for the sum of the first `n1` entries of `doubled`
/// (integer doubled midranks) under random relabelling.
fn exact_rank_sum_p(doubled: &[usize], n1: usize) -> f64 {
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled-rank sum s.
    let mut counts = vec![vec![0u128; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for (i, &r) in doubled.iter().enumerate() {
        for k in (1..=n1.min(i + 1)).rev() {
            let (lo, hi) = counts.split_at_mut(k);
            let prev = &lo[k - 1];
            let cur = &mut hi[0];
            for s in (0..=max_sum - r).rev() {
                if prev[s] != 0 {
                    cur[s + r] += prev[s];
                }
            }
        }
    }
    let observed: usize = doubled[..n1].iter().sum();
    let dist = &counts[n1];
    let total: u128 = dist.iter().sum();
    let le: u128 = dist[..=observed].iter().sum();
    let ge: u128 = dist[observed..].iter().sum();
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

// ---------------------------------------------------------------------------
// Scale tests
// ---------------------------------------------------------------------------

/// Levene's test for equal variances, median-centred (Brown-Forsythe form).
pub fn levene(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_len(a, 2, "levene")?;
    require_len(b, 2, "levene")?;
    let groups: Vec<Vec<f64>> = [a, b]
        .iter()
        .map(|g| {
            let c = median(g);
            g.iter().map(|v| (v - c).abs()).collect()
        })
        .collect();
    let n_total = (a.len() + b.len()) as f64;
    let k = 2.0;
    let grand = groups.iter().flatten().sum::<f64>() / n_total;
    let between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|v| (v - m).powi(2)).sum::<f64>()
        })
        .sum();
    if within == 0.0 {
        return Err(StatsError::Degenerate("absolute deviations are constant within groups".into()));
    }
    let w = (n_total - k) / (k - 1.0) * between / within;
    let mut r = TestResult::new(w, f_sf(w, k - 1.0, n_total - k));
    r.df = Some(k - 1.0);
    r.df2 = Some(n_total - k);
    Ok(r)
}

/// Fligner-Killeen median-centred test of equal scale.
pub fn fligner_killeen(a: &[f64], b: &[f64]) -> Result<TestResult> {
    require_len(a, 2, "fligner_killeen")?;
    require_len(b, 2, "fligner_killeen")?;
    let dev: Vec<f64> = [a, b]
        .iter()
        .flat_map(|g| {
            let c = median(g);
            g.iter().map(move |v| (v - c).abs())
        })
        .collect();
    let n = dev.len() as f64;
    let (ranks, _) = average_ranks(&dev);
    let scores: Vec<f64> = ranks.iter().map(|r| normal_quantile(0.5 + r / (2.0 * (n + 1.0)))).collect();
    let var_all = variance(&scores);
    if var_all == 0.0 {
        return Err(StatsError::Degenerate("all absolute deviations tied".into()));
    }
    let grand = mean(&scores);
    let (sa, sb) = scores.split_at(a.len());
    let stat = [sa, sb].iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum::<f64>() / var_all;
    let mut r = TestResult::new(stat, chi2_sf(stat, 1.0));
    r.df = Some(1.0);
    Ok(r)
}

// ---------------------------------------------------------------------------
// Contingency tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyResult {
    pub test: TestResult,
    pub expected: Vec<Vec<f64>>,
    /// Adjusted (Haberman) standardized residuals.
    pub residuals: Vec<Vec<f64>>,
}

/// Pearson χ² test of independence on an r×c table of counts.
pub fn contingency_test(table: &[Vec<f64>]) -> Result<ContingencyResult> {
    let r = table.len();
    let c = table.first().map_or(0, Vec::len);
    if r < 2 || c < 2 || table.iter().any(|row| row.len() != c) {
        return Err(StatsError::InvalidInput("contingency table must be rectangular and at least 2x2".into()));
    }
    if table.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(StatsError::InvalidInput("counts must be finite and >= 0".into()));
    }
    let row_tot: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let col_tot: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum()).collect();
    let total: f64 = row_tot.iter().sum();
    if row_tot.iter().chain(&col_tot).any(|&m| m == 0.0) {
        return Err(StatsError::Degenerate("zero row or column marginal".into()));
    }
    let mut chi2 = 0.0;
    let mut expected = vec![vec![0.0; c]; r];
    let mut residuals = vec![vec![0.0; c]; r];
    for i in 0..r {
        for j in 0..c {
            let e = row_tot[i] * col_tot[j] / total;
            let o = table[i][j];
            expected[i][j] = e;
            chi2 += (o - e) * (o - e) / e;
            let denom = (e * (1.0 - row_tot[i] / total) * (1.0 - col_tot[j] / total)).sqrt();
            residuals[i][j] = (o - e) / denom;
        }
    }
    let df = ((r - 1) * (c - 1)) as f64;
    let mut test = TestResult::new(chi2, chi2_sf(chi2, df));
    test.df = Some(df);
    test.effect_size = Some((chi2 / (total * ((r.min(c) - 1) as f64))).sqrt());
    Ok(ContingencyResult { test, expected, residuals })
}

// ---------------------------------------------------------------------------
// Correlation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

/// Correlation coefficient with t-based p-value and Fisher-z 95% CI.
/// `statistic` holds the coefficient itself.
pub fn correlation(kind: CorrelationKind, x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(StatsError::InvalidInput("x and y lengths differ".into()));
    }
    require_len(x, 3, "correlation")?;
    require_len(y, 3, "correlation")?;
    let coef = match kind {
        CorrelationKind::Pearson => pearson(x, y)?,
        CorrelationKind::Spearman => pearson(&average_ranks(x).0, &average_ranks(y).0)?,
    };
    let n = x.len() as f64;
    let df = n - 2.0;
    let p = if coef.abs() >= 1.0 { 0.0 } else { t_two_sided(coef * (df / (1.0 - coef * coef)).sqrt(), df) };
    let ci = if coef.abs() >= 1.0 {
        (coef, coef)
    } else if n > 3.0 {
        let z = coef.atanh();
        let se = 1.0 / (n - 3.0).sqrt();
        ((z - Z_975 * se).tanh(), (z + Z_975 * se).tanh())
    } else {
        (-1.0, 1.0)
    };
    let mut r = TestResult::new(coef, p);
    r.df = Some(df);
    r.effect_size = Some(coef);
    r.ci = Some(ci);
    Ok(r)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Degenerate("constant input to correlation".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

// ---------------------------------------------------------------------------
// Skewness
// ---------------------------------------------------------------------------

/// Moment skewness g₁ = m₃ / m₂^{3/2} (population moments).
pub fn sample_skewness(x: &[f64]) -> Result<f64> {
    require_len(x, 3, "skewness")?;
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    if m2 == 0.0 {
        return Err(StatsError::Degenerate("zero variance".into()));
    }
    Ok(m3 / m2.powf(1.5))
}

/// D'Agostino skewness test: `statistic` is the normal z, `effect_size` g₁.
pub fn skewness_z(x: &[f64]) -> Result<TestResult> {
    require_len(x, 8, "skewness_z")?;
    let g1 = sample_skewness(x)?;
    let n = x.len() as f64;
    let y = g1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 =
        3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let z = delta * (y / alpha).asinh();
    let mut r = TestResult::new(z, normal_two_sided(z));
    r.df = Some(n - 1.0);
    r.effect_size = Some(g1);
    Ok(r)
}
