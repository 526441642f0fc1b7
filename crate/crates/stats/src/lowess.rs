//! Single-pass LOWESS: tricube-weighted local linear fits, no robustness
//! iterations.

use crate::error::{Result, StatsError};

/// Smooths `y` against `x`, returning `(x, ŷ)` pairs sorted by `x`.
///
/// Each point uses its ⌊frac·n⌋ nearest neighbours; the bandwidth is the
/// distance to the farthest of them.
pub fn lowess(x: &[f64], y: &[f64], frac: f64) -> Result<Vec<(f64, f64)>> {
    let n = x.len();
    if y.len() != n {
        return Err(StatsError::InvalidInput("x and y lengths differ".into()));
    }
    if n < 5 {
        return Err(StatsError::InsufficientData(format!("lowess needs n >= 5, got {n}")));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(StatsError::InvalidInput("frac must lie in (0, 1]".into()));
    }
    if frac * (n as f64) < 2.0 {
        return Err(StatsError::InsufficientData(format!("frac * n = {} is below 2", frac * n as f64)));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite input".into()));
    }
    let span = ((frac * n as f64) + 1e-10).floor() as usize;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();

    let mut out = Vec::with_capacity(n);
    // Sliding window [lo, lo + span) of nearest neighbours in sorted order.
    let mut lo = 0usize;
    for i in 0..n {
        let xi = xs[i];
        while lo + span < n && xi - xs[lo] > xs[lo + span] - xi {
            lo += 1;
        }
        let hi = lo + span - 1;
        let h = (xi - xs[lo]).max(xs[hi] - xi);
        out.push((xi, local_fit(&xs, &ys, xi, h, lo, hi)));
    }
    Ok(out)
}

fn local_fit(xs: &[f64], ys: &[f64], x0: f64, h: f64, lo: usize, hi: usize) -> f64 {
    // Points outside the window but tied at distance h still get zero
    // weight from the tricube kernel, so restricting to the window is exact.
    let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in lo..=hi {
        let w = if h > 0.0 {
            let d = ((xs[j] - x0).abs() / h).min(1.0);
            (1.0 - d * d * d).powi(3)
        } else {
            1.0
        };
        sw += w;
        swx += w * xs[j];
        swy += w * ys[j];
        swxx += w * xs[j] * xs[j];
        swxy += w * xs[j] * ys[j];
    }
    if sw <= 0.0 {
        return ys[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    }
    let xbar = swx / sw;
    let ybar = swy / sw;
    let sxx = swxx / sw - xbar * xbar;
    let sxy = swxy / sw - xbar * ybar;
    let range = xs[hi] - xs[lo];
    if sxx <= 1e-12 * range * range || range == 0.0 {
        return ybar;
    }
    ybar + sxy / sxx * (x0 - xbar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_data_reproduced() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.5 * v - 4.0).collect();
        for frac in [0.1, 0.3, 1.0] {
            for (xv, yv) in lowess(&x, &y, frac).unwrap() {
                assert!((yv - (1.5 * xv - 4.0)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn output_sorted_and_constant_preserved() {
        let x = [5.0, 1.0, 3.0, 2.0, 4.0, 0.0];
        let out = lowess(&x, &[7.0; 6], 0.5).unwrap();
        assert!(out.windows(2).all(|w| w[0].0 <= w[1].0));
        assert!(out.iter().all(|(_, v)| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn small_span_rejected() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        assert!(lowess(&x, &x, 0.1).is_err());
    }
}
