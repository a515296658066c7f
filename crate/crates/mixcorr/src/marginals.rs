//! Empirical marginal distributions and pseudo-observations.
//!
//! Each column is reduced to its empirical CDF. Because the copula likelihood
//! evaluates Gaussian quantiles of CDF values, the top step of a raw empirical
//! CDF (exactly 1) would map to an infinite quantile; all CDF values are
//! therefore rescaled by n/(n+1), the usual pseudo-observation convention.
//! The left limit at the smallest observed value is kept at exactly 0, which
//! the quantile side treats as an infinite lower integration bound.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Whether a column is treated as continuous or discrete by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalKind {
    Continuous,
    Discrete,
}

/// Empirical CDF of one observed column: sorted distinct values, the raw CDF
/// step heights at each, and the sample size behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMarginal {
    support: Vec<f64>,
    cdf: Vec<f64>,
    n: usize,
}

/// Fits the empirical CDF of `column`, which must be non-empty and finite.
pub fn fit_empirical(column: &[f64]) -> Result<EmpiricalMarginal> {
    if column.is_empty() {
        return Err(Error::EmptySample);
    }
    for (index, v) in column.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { index });
        }
    }
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut support = Vec::new();
    let mut cdf = Vec::new();
    let mut seen = 0usize;
    let mut i = 0usize;
    while i < n {
        let v = sorted[i];
        let mut j = i;
        while j < n && sorted[j] == v {
            j += 1;
        }
        seen += j - i;
        support.push(v);
        cdf.push(seen as f64 / n as f64);
        i = j;
    }
    Ok(EmpiricalMarginal { support, cdf, n })
}

impl EmpiricalMarginal {
    /// Number of observations the CDF was fitted on.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted distinct observed values.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Raw empirical CDF heights aligned with [`support`](Self::support);
    /// strictly increasing, ending at exactly 1.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// The pseudo-observation rescale factor n/(n+1).
    pub fn rescale(&self) -> f64 {
        self.n as f64 / (self.n + 1) as f64
    }

    fn position(&self, x: f64) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::ValueNotObserved { value: x });
        }
        self.support
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
            .map_err(|_| Error::ValueNotObserved { value: x })
    }

    /// Rescaled pseudo-observation pair `(u_hi, u_lo)` at an observed value:
    /// `u_hi = s * F(x)` and `u_lo = s * F(x-)` with `s = n/(n+1)`. At the
    /// smallest observed value `u_lo` is exactly 0.
    pub fn pseudo_u(&self, x: f64) -> Result<(f64, f64)> {
        let i = self.position(x)?;
        let s = self.rescale();
        let hi = s * self.cdf[i];
        let lo = if i == 0 { 0.0 } else { s * self.cdf[i - 1] };
        Ok((hi, lo))
    }
}
