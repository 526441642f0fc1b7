use super::{wald, Design, RegressionFit};
use crate::error::{Result, StatsError};
use crate::linalg::Matrix;
use crate::special::ln_gamma;

pub const NEGBIN_MAX_OUTER: usize = 200;
const INNER_MAX_ITER: usize = 100;
const TOL: f64 = 1e-8;
/// Below this α the NB2 likelihood is evaluated as Poisson.
const POISSON_ALPHA: f64 = 1e-12;

struct InnerFit {
    beta: Vec<f64>,
    mu: Vec<f64>,
    cov: Vec<Vec<f64>>,
    iterations: usize,
}

/// IRLS for β with the NB2 dispersion held fixed (α = 0 is Poisson).
fn irls_fixed_alpha(
    y: &[f64],
    design: &Design,
    x: &Matrix,
    offset: &[f64],
    alpha: f64,
    start: Option<&[f64]>,
) -> Result<InnerFit> {
    let n = y.len();
    let p = design.n_cols();
    let mut beta = match start {
        Some(b) => b.to_vec(),
        None => vec![0.0; p],
    };
    let mut eta: Vec<f64> = if start.is_some() {
        x.mul_vec(&beta).iter().zip(offset).map(|(a, o)| a + o).collect()
    } else {
        // Start from the saturated-ish predictor log(y + 0.1).
        y.iter().map(|v| (v + 0.1).ln()).collect()
    };
    let mut iterations = 0;
    let mut first = start.is_none();
    for it in 1..=INNER_MAX_ITER {
        iterations = it;
        let mut w = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let mu = eta[i].exp();
            w.push(mu / (1.0 + alpha * mu));
            z.push(eta[i] - offset[i] + (y[i] - mu) / mu);
        }
        let ls = design.solve(x, &z, Some(&w))?;
        let max_change = if first {
            f64::INFINITY
        } else {
            ls.coef.iter().zip(&beta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        first = false;
        beta = ls.coef;
        eta = x.mul_vec(&beta).iter().zip(offset).map(|(a, o)| a + o).collect();
        if eta.iter().any(|e| !e.is_finite() || *e > 700.0) {
            return Err(StatsError::NonConvergence { iterations: it, detail: "linear predictor diverged".into() });
        }
        if max_change < TOL {
            let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
            let w: Vec<f64> = mu.iter().map(|m| m / (1.0 + alpha * m)).collect();
            let zeros = vec![0.0; n];
            let cov = design.solve(x, &zeros, Some(&w))?.unscaled_cov;
            return Ok(InnerFit { beta, mu, cov, iterations });
        }
    }
    Err(StatsError::NonConvergence { iterations, detail: format!("IRLS for beta did not converge at alpha = {alpha}") })
}

fn moment_alpha(y: &[f64], mu: &[f64], p: usize) -> f64 {
    let n = y.len();
    let s: f64 = y.iter().zip(mu).map(|(yi, m)| ((yi - m).powi(2) - m) / (m * m)).sum();
    (s / (n - p) as f64).max(0.0)
}

fn nb_log_likelihood(y: &[f64], mu: &[f64], alpha: f64) -> f64 {
    if alpha < POISSON_ALPHA {
        return y.iter().zip(mu).map(|(yi, m)| yi * m.ln() - m - ln_gamma(yi + 1.0)).sum();
    }
    let r = 1.0 / alpha;
    y.iter()
        .zip(mu)
        .map(|(yi, m)| {
            ln_gamma(yi + r) - ln_gamma(r) - ln_gamma(yi + 1.0) + r * (r / (r + m)).ln() + yi * (m / (r + m)).ln()
        })
        .sum()
}

/// NB2 regression with an offset on the log scale.
///
/// Alternates IRLS for β at fixed α with a method-of-moments update
/// α = Σ((y−μ)² − μ)/μ² / (n − p), clamped at 0, until both settle (at most
/// 200 outer rounds). When α is 0 the fit is exactly Poisson. IRRs are
/// exp(β); `fit_stat` is McFadden's pseudo-R² against the intercept-only
/// model with the same offset and α.
pub fn fit_negbin(y: &[f64], design: &Design, offset: &[f64]) -> Result<RegressionFit> {
    let n = y.len();
    design.validate(n)?;
    if offset.len() != n {
        return Err(StatsError::InvalidInput("offset length differs from response".into()));
    }
    if offset.iter().any(|o| !o.is_finite()) {
        return Err(StatsError::InvalidInput("offset must be finite".into()));
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0 || v.fract() != 0.0) {
        return Err(StatsError::InvalidInput("counts must be non-negative integers".into()));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(StatsError::Degenerate("all counts are zero".into()));
    }
    let p = design.n_cols();
    if n <= p {
        return Err(StatsError::InsufficientData(format!(
            "negative binomial needs more observations ({n}) than columns ({p})"
        )));
    }
    let x = design.matrix();

    let mut fit = irls_fixed_alpha(y, design, &x, offset, 0.0, None)?;
    let mut alpha = 0.0;
    let mut total_iter = fit.iterations;
    let mut converged = false;
    let mut outer = 0;
    while outer < NEGBIN_MAX_OUTER {
        outer += 1;
        let new_alpha = moment_alpha(y, &fit.mu, p);
        let next = irls_fixed_alpha(y, design, &x, offset, new_alpha, Some(&fit.beta))?;
        total_iter += next.iterations;
        let d_beta = next.beta.iter().zip(&fit.beta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let d_alpha = (new_alpha - alpha).abs();
        alpha = new_alpha;
        fit = next;
        if d_alpha < TOL && d_beta < TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(StatsError::NonConvergence {
            iterations: outer,
            detail: format!("alpha = {alpha}, beta = {:?}", fit.beta),
        });
    }

    let ll = nb_log_likelihood(y, &fit.mu, alpha);
    let null_design = Design::with_intercept(n);
    let null_x = null_design.matrix();
    let ll_null = irls_fixed_alpha(y, &null_design, &null_x, offset, alpha, None)
        .map(|f| nb_log_likelihood(y, &f.mu, alpha))
        .unwrap_or(f64::NAN);
    let pseudo_r2 = if ll_null != 0.0 { 1.0 - ll / ll_null } else { 0.0 };

    let summary = wald(&fit.beta, &fit.cov);
    Ok(RegressionFit {
        names: design.names().to_vec(),
        exponentiated: Some(fit.beta.iter().map(|b| b.exp()).collect()),
        coefficients: fit.beta,
        standard_errors: summary.se,
        statistics: summary.stat,
        p_values: summary.p,
        ci_95: summary.ci,
        fit_stat: pseudo_r2,
        n,
        df_resid: (n - p) as f64,
        converged,
        iterations: total_iter,
        log_likelihood: Some(ll),
        dispersion: Some(alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_equal_to_exposure_give_unit_irr() {
        let m = [1.0, 3.0, 7.0, 2.0, 5.0];
        let offset: Vec<f64> = m.iter().map(|v: &f64| v.ln()).collect();
        let fit = fit_negbin(&m, &Design::with_intercept(5), &offset).unwrap();
        assert!((fit.exponentiated.as_ref().unwrap()[0] - 1.0).abs() < 1e-10);
        assert_eq!(fit.dispersion, Some(0.0));
    }

    #[test]
    fn all_zero_counts_rejected() {
        let err = fit_negbin(&[0.0; 4], &Design::with_intercept(4), &[0.0; 4]).unwrap_err();
        assert!(matches!(err, StatsError::Degenerate(_)));
    }

    #[test]
    fn overdispersed_counts_get_positive_alpha() {
        let y = [0.0, 0.0, 1.0, 0.0, 12.0, 0.0, 3.0, 0.0, 25.0, 1.0, 0.0, 7.0];
        let fit = fit_negbin(&y, &Design::with_intercept(12), &[0.0; 12]).unwrap();
        assert!(fit.dispersion.unwrap() > 1.0);
        // Intercept-only with equal exposure: μ̂ is the sample mean for any α.
        let mean = y.iter().sum::<f64>() / 12.0;
        assert!((fit.exponentiated.unwrap()[0] - mean).abs() < 1e-8);
    }
}
