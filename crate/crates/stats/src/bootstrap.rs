//! Percentile bootstrap confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::describe::{mean, median, quantile_sorted, std_dev, variance};
use crate::error::{Result, StatsError};

/// Statistic evaluated on each resample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Median,
    StdDev,
    Variance,
}

impl Statistic {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Statistic::Mean => mean(x),
            Statistic::Median => median(x),
            Statistic::StdDev => std_dev(x),
            Statistic::Variance => variance(x),
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "median" => Ok(Statistic::Median),
            "sd" | "std" => Ok(Statistic::StdDev),
            "var" | "variance" => Ok(Statistic::Variance),
            other => Err(StatsError::InvalidInput(format!("unknown statistic {other:?}"))),
        }
    }
}

pub const MIN_RESAMPLES: usize = 100;

/// 95% percentile interval over `resamples` draws with replacement.
///
/// Resample `b` draws from its own ChaCha stream `b` under `seed`, so the
/// result does not depend on thread scheduling.
pub fn bootstrap_ci(sample: &[f64], statistic: Statistic, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(StatsError::Empty);
    }
    if resamples < MIN_RESAMPLES {
        return Err(StatsError::InvalidInput(format!("need at least {MIN_RESAMPLES} resamples, got {resamples}")));
    }
    let n = sample.len();
    let mut stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let draw: Vec<f64> = (0..n).map(|_| sample[rng.random_range(0..n)]).collect();
            statistic.eval(&draw)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&stats, 0.025), quantile_sorted(&stats, 0.975)))
}
