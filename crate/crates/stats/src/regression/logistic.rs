use super::{wald, Design, RegressionFit};
use crate::error::{Result, StatsError};

pub const LOGISTIC_MAX_ITER: usize = 100;
pub const LOGISTIC_TOL: f64 = 1e-8;

/// |η| beyond which a fitted probability is numerically 0 or 1.
const BOUNDARY_ETA: f64 = 15.0;
/// |η| at which μ(1−μ) falls below double precision; no finite MLE puts an
/// observation here.
const DIVERGED_ETA: f64 = 36.0;

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

fn log_likelihood(y: &[f64], eta: &[f64]) -> f64 {
    y.iter().zip(eta).map(|(yi, e)| yi * e - softplus(*e)).sum()
}

/// Logistic regression by iteratively reweighted least squares.
///
/// Converges when max |Δβ| < 1e-8 (at most 100 iterations). Reports odds
/// ratios, Wald 95% CIs and McFadden's pseudo-R². Failing to converge while
/// some fitted probabilities sit on the 0/1 boundary is reported as
/// separation.
pub fn fit_logistic(y: &[f64], design: &Design) -> Result<RegressionFit> {
    let n = y.len();
    design.validate(n)?;
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(StatsError::InvalidInput("logistic outcomes must be 0 or 1".into()));
    }
    let positives: f64 = y.iter().sum();
    if positives == 0.0 || positives == n as f64 {
        return Err(StatsError::Degenerate("outcome has a single class".into()));
    }
    let p = design.n_cols();
    let x = design.matrix();

    let mut beta = vec![0.0; p];
    let mut eta = vec![0.0; n];
    let mut ll = log_likelihood(y, &eta);
    let mut converged = false;
    let mut iterations = 0;
    let mut cov = Vec::new();

    for it in 1..=LOGISTIC_MAX_ITER {
        iterations = it;
        let mut w = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for (yi, &e) in y.iter().zip(&eta) {
            let mu = sigmoid(e);
            let wi = (mu * (1.0 - mu)).max(1e-300);
            w.push(wi);
            z.push(e + (yi - mu) / wi);
        }
        let ls = match design.solve(&x, &z, Some(&w)) {
            Ok(ls) => ls,
            Err(StatsError::RankDeficient(cols)) if it > 1 && eta.iter().any(|e| e.abs() > BOUNDARY_ETA) => {
                return Err(StatsError::Separation(format!(
                    "weights collapsed while fitting columns {}",
                    cols.join(", ")
                )));
            }
            Err(e) => return Err(e),
        };
        cov = ls.unscaled_cov;
        let mut step: Vec<f64> = ls.coef.iter().zip(&beta).map(|(b1, b0)| b1 - b0).collect();
        let mut new_beta: Vec<f64> = ls.coef;
        let mut new_eta = x.mul_vec(&new_beta);
        let mut new_ll = log_likelihood(y, &new_eta);
        let mut halvings = 0;
        while new_ll < ll - 1e-12 * ll.abs().max(1.0) && halvings < 20 {
            for s in &mut step {
                *s *= 0.5;
            }
            new_beta = beta.iter().zip(&step).map(|(b, s)| b + s).collect();
            new_eta = x.mul_vec(&new_beta);
            new_ll = log_likelihood(y, &new_eta);
            halvings += 1;
        }
        let max_change = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        beta = new_beta;
        eta = new_eta;
        ll = new_ll;
        let diverged = eta.iter().filter(|e| e.abs() > DIVERGED_ETA).count();
        if diverged > 0 {
            return Err(StatsError::Separation(format!(
                "coefficients diverging; {diverged} observations fitted at probability 0 or 1"
            )));
        }
        if max_change < LOGISTIC_TOL {
            converged = true;
            break;
        }
    }

    if !converged {
        let boundary = eta.iter().filter(|e| e.abs() > BOUNDARY_ETA).count();
        if boundary > 0 {
            return Err(StatsError::Separation(format!(
                "coefficients diverging; {boundary} observations fitted at probability 0 or 1"
            )));
        }
        return Err(StatsError::NonConvergence { iterations, detail: format!("log-likelihood {ll}") });
    }

    // Covariance at the converged estimate.
    let w: Vec<f64> = eta
        .iter()
        .map(|&e| {
            let mu = sigmoid(e);
            (mu * (1.0 - mu)).max(1e-300)
        })
        .collect();
    let zeros = vec![0.0; n];
    if let Ok(ls) = design.solve(&x, &zeros, Some(&w)) {
        cov = ls.unscaled_cov;
    }

    let pbar = positives / n as f64;
    let ll_null = positives * pbar.ln() + (n as f64 - positives) * (1.0 - pbar).ln();
    let summary = wald(&beta, &cov);
    Ok(RegressionFit {
        names: design.names().to_vec(),
        exponentiated: Some(beta.iter().map(|b| b.exp()).collect()),
        coefficients: beta,
        standard_errors: summary.se,
        statistics: summary.stat,
        p_values: summary.p,
        ci_95: summary.ci,
        fit_stat: 1.0 - ll / ll_null,
        n,
        df_resid: (n - p) as f64,
        converged,
        iterations,
        log_likelihood: Some(ll),
        dispersion: None,
    })
}
