//! Numerical statistics engine used by the perplexity analytics toolkit.
//!
//! Everything here is a pure function of its inputs. Special functions,
//! distributions, dense least squares and the GLM fitters are implemented
//! in-crate so results do not depend on an external numerics stack.

#![allow(clippy::needless_range_loop)]

pub mod bootstrap;
pub mod describe;
pub mod dist;
pub mod error;
pub mod hetero;
pub mod hypothesis;
pub mod linalg;
pub mod lowess;
pub mod regression;
pub mod special;

pub use bootstrap::{bootstrap_ci, Statistic};
pub use error::{Result, StatsError};
pub use hetero::white_test;
pub use hypothesis::{
    contingency_test, correlation, fligner_killeen, levene, mann_whitney_u, sample_skewness, skewness_z,
    two_sample_test, welch_t, welch_t_summary, ContingencyResult, CorrelationKind, TestKind, TestResult,
};
pub use lowess::lowess;
pub use regression::{fit_linear, fit_logistic, fit_negbin, polyfit, Design, RegressionFit, Term};
