//! White's heteroskedasticity test for a single regressor.

use crate::describe::mean;
use crate::dist::chi2_sf;
use crate::error::{Result, StatsError};
use crate::hypothesis::TestResult;
use crate::regression::{fit_linear, Design};

/// Fits `y ~ 1 + x`, then the squared residuals on `1 + x + x²`, and returns
/// n·R² of the auxiliary regression against χ²(2).
///
/// Squared residuals that are constant up to rounding give a statistic of 0.
pub fn white_test(y: &[f64], x: &[f64]) -> Result<TestResult> {
    let n = y.len();
    if x.len() != n {
        return Err(StatsError::InvalidInput("x and y lengths differ".into()));
    }
    if n < 10 {
        return Err(StatsError::InsufficientData(format!("white_test needs n >= 10, got {n}")));
    }
    if x.iter().all(|v| *v == x[0]) {
        return Err(StatsError::Degenerate("constant regressor".into()));
    }
    let base = fit_linear(y, &Design::with_intercept(n).column("x", x.to_vec()))?;
    let (b0, b1) = (base.coefficients[0], base.coefficients[1]);
    let e2: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| (yi - b0 - b1 * xi).powi(2)).collect();

    let m = mean(&e2);
    let spread = e2.iter().fold(0.0f64, |acc, v| acc.max((v - m).abs()));
    let stat = if spread <= 1e-10 * m.max(f64::MIN_POSITIVE) || m == 0.0 {
        0.0
    } else {
        let aux = Design::with_intercept(n).column("x", x.to_vec()).column("x2", x.iter().map(|v| v * v).collect());
        n as f64 * fit_linear(&e2, &aux)?.fit_stat
    };
    Ok(TestResult {
        statistic: stat,
        df: Some(2.0),
        df2: None,
        p_value: chi2_sf(stat, 2.0),
        effect_size: None,
        ci: None,
    })
}
