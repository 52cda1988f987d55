//! Poisson log-pmf, log-survival function and the Chernoff upper-tail bound.

use super::{log1m_exp, log_factorial, LogAccumulator};
use crate::error::{Error, Result};
use crate::logprob::LogProb;

/// Upward summation stops once the geometric bound on the rest drops below
/// this fraction of the running sum.
const SF_TAIL_TOL: f64 = 1e-18;

/// `ln P(X = k)` for `X ~ Poisson(lambda)`.
///
/// # Panics
/// If `lambda` is not positive and finite.
pub fn log_poisson_pmf(k: u64, lambda: f64) -> LogProb {
    assert!(
        lambda > 0.0 && lambda.is_finite(),
        "Poisson rate must be positive, got {lambda}"
    );
    let v = if k == 0 {
        -lambda
    } else {
        k as f64 * lambda.ln() - lambda - log_factorial(k)
    };
    LogProb::from_computed(v)
}

/// `ln P(X >= m)` for `X ~ Poisson(lambda)`.
///
/// Above the mean the pmf is summed upward from `m`; consecutive terms shrink
/// by `p = lambda / (k + 1) < 1`, so the remainder after term `k` is at most
/// `term_k * p / (1 - p)` and the sum stops when that falls below `1e-18` of
/// the total. At or below the mean the complement `1 - P(X <= m - 1)` is used.
///
/// # Panics
/// If `lambda` is not positive and finite.
pub fn log_poisson_sf(m: u64, lambda: f64) -> LogProb {
    if m == 0 {
        return LogProb::ONE;
    }
    if m as f64 <= lambda {
        let mut cdf = LogAccumulator::new();
        for k in 0..m {
            cdf.add(log_poisson_pmf(k, lambda).ln());
        }
        return LogProb::from_computed(log1m_exp(cdf.value().min(0.0)));
    }

    let lead = log_poisson_pmf(m, lambda).ln();
    // Terms relative to the first one; all <= 1 and decreasing.
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = m;
    loop {
        let p = lambda / (k + 1) as f64;
        if term * p / (1.0 - p) < SF_TAIL_TOL * sum {
            break;
        }
        term *= p;
        sum += term;
        k += 1;
    }
    LogProb::from_computed(lead + sum.ln())
}

/// Chernoff bound `ln P(Y >= m) <= -m ln(m / lambda) + m - lambda`, from
/// Markov's inequality on `exp(tY)` at the optimal tilt `t = ln(m / lambda)`.
///
/// The tilt is positive only for `m > lambda`; anything else is a domain error.
pub fn chernoff_log_bound(m: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(m > lambda) {
        return Err(Error::domain(
            "chernoff_log_bound",
            format!("threshold {m} must exceed the rate {lambda} > 0"),
        ));
    }
    Ok(-m * (m / lambda).ln() + m - lambda)
}
