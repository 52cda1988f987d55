//! Truncated asymptotic expansions of the two-factor log-tail, the
//! `m`-factor two-term heuristic, and two diagnostics: the region bounds
//! that justify restricting attention to balanced pairs, and the exponent
//! error caused by replacing the saddle point with its leading asymptote.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PoissonModel;
use crate::saddle::solve_saddle_2;
use crate::special::{chernoff_log_bound, log_factorial, log_sum_exp};

fn check_n(op: &'static str, n: u64, min: u64) -> Result<f64> {
    if n < min {
        return Err(Error::domain(op, format!("n = {n} must be >= {min}")));
    }
    Ok(n as f64)
}

/// First one, two or three terms of the log-tail expansion:
///
/// ```text
/// L1 = -sqrt(n) ln n
/// L2 = L1 + sqrt(n) (2 + ln(lambda1 lambda2))
/// L3 = L2 - 1/2 ln n
/// ```
pub fn expansion_log_tail(lambda1: f64, lambda2: f64, n: u64, order: u8) -> Result<f64> {
    PoissonModel::pair(lambda1, lambda2)?;
    let nf = check_n("expansion_log_tail", n, 2)?;
    let (root, log_n) = (nf.sqrt(), nf.ln());
    let l1 = -root * log_n;
    match order {
        1 => Ok(l1),
        2 => Ok(l1 + root * (2.0 + (lambda1 * lambda2).ln())),
        3 => Ok(l1 + root * (2.0 + (lambda1 * lambda2).ln()) - 0.5 * log_n),
        _ => Err(Error::InvalidArgument(format!(
            "expansion order must be 1, 2 or 3, got {order}"
        ))),
    }
}

/// Leading-order estimate with the `sqrt(2 pi) n^(1/4)` prefactor and the
/// two-term exponent.
pub fn coarse_log_tail(lambda1: f64, lambda2: f64, n: u64) -> Result<f64> {
    coarse_log_tail_with_order(lambda1, lambda2, n, 2)
}

/// [`coarse_log_tail`] with the exponent truncated at `order` terms.
pub fn coarse_log_tail_with_order(lambda1: f64, lambda2: f64, n: u64, order: u8) -> Result<f64> {
    let exponent = expansion_log_tail(lambda1, lambda2, n, order)?;
    Ok(0.5 * (2.0 * PI).ln() + 0.25 * (n as f64).ln() + exponent)
}

/// Two-term heuristic for `m` factors:
///
/// ```text
/// (m-1)/2 ln(2 pi) + (m-1)/(2m) ln n - n^(1/m) ln n + n^(1/m) (m + sum ln lambda_i)
/// ```
pub fn heuristic_two_term_m(model: &PoissonModel, n: u64) -> Result<f64> {
    let nf = check_n("heuristic_two_term_m", n, 2)?;
    let m = model.dim();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "the heuristic needs at least two factors".into(),
        ));
    }
    let mf = m as f64;
    let log_n = nf.ln();
    let root = nf.powf(1.0 / mf);
    Ok(0.5 * (mf - 1.0) * (2.0 * PI).ln() + (mf - 1.0) / (2.0 * mf) * log_n - root * log_n
        + root * (mf + model.log_rate_sum()))
}

/// Bounds from splitting `{k l >= n}` at `a_n = sqrt(n) / ln n`.
///
/// `R1` (`k <= a_n`) forces `l >= m_n = n / a_n` and is bounded above by the
/// Chernoff bound on `P(Y >= m_n)`; `R2` symmetrically. The balanced region
/// `R3` is bounded below by its single diagonal point `(m, m)`,
/// `m = ceil(sqrt n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBounds {
    pub a_n: f64,
    pub m_n: f64,
    pub m_diag: u64,
    pub log_ub_r1: f64,
    pub log_ub_r2: f64,
    pub log_lb_r3: f64,
    /// `ln(ub_R1 + ub_R2) - ln lb_R3`.
    pub log_ratio: f64,
}

pub fn region_bounds(lambda1: f64, lambda2: f64, n: u64) -> Result<RegionBounds> {
    const OP: &str = "region_bounds";
    PoissonModel::pair(lambda1, lambda2)?;
    let nf = check_n(OP, n, 2)?;
    let a_n = nf.sqrt() / nf.ln();
    let m_n = nf / a_n;
    if !(m_n > lambda1.max(lambda2)) {
        return Err(Error::domain(
            OP,
            format!("m_n = {m_n} must exceed both rates"),
        ));
    }
    let log_ub_r1 = chernoff_log_bound(m_n, lambda2)?;
    let log_ub_r2 = chernoff_log_bound(m_n, lambda1)?;
    let m_diag = (nf.sqrt().ceil() as u64).max(1);
    // Correct an off-by-one from the float square root.
    let m_diag = if (m_diag - 1) * (m_diag - 1) >= n { m_diag - 1 } else { m_diag };
    let md = m_diag as f64;
    let log_lb_r3 =
        -(lambda1 + lambda2) + md * (lambda1 * lambda2).ln() - 2.0 * log_factorial(m_diag);
    let log_ratio = log_sum_exp(&[log_ub_r1, log_ub_r2])? - log_lb_r3;
    Ok(RegionBounds {
        a_n,
        m_n,
        m_diag,
        log_ub_r1,
        log_ub_r2,
        log_lb_r3,
        log_ratio,
    })
}

/// Exponent error from evaluating `T` at the truncated saddle
/// `(sqrt n, sqrt n)` instead of the solved one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationGap {
    pub n: u64,
    /// `k~ - k*`.
    pub delta_k: f64,
    /// `T(k~, n/k~) - T(k*, l*)`.
    pub delta_t: f64,
    /// `delta_t / (sqrt(n) (ln ln n)^2 / ln n)`.
    pub growth_ratio: f64,
}

pub fn truncation_gap(lambda1: f64, lambda2: f64, n: u64) -> Result<TruncationGap> {
    let nf = check_n("truncation_gap", n, 16)?;
    let model = PoissonModel::pair(lambda1, lambda2)?;
    let saddle = solve_saddle_2(lambda1, lambda2, n)?;
    let k_trunc = nf.sqrt();
    let l_trunc = nf / k_trunc;
    // Both T values are O(sqrt(n) ln n) while their difference can be zero;
    // expand per coordinate around the saddle to avoid the cancellation:
    // f(k~) - f(k*) = d (ln lambda + 1 - ln k~) - (k* + 1/2) ln1p(d / k*).
    // The saddle's second coordinate comes from its own Lambert evaluation, so
    // k* l* misses n by a few ulps, and T changes at first order off the
    // constraint. Compare two points that both lie exactly on it.
    let star = [saddle.k[0], nf / saddle.k[0]];
    let mut delta_t = 0.0;
    for ((&trunc, &star), &lambda) in [k_trunc, l_trunc].iter().zip(&star).zip(model.lambdas()) {
        let d = trunc - star;
        delta_t += d * (lambda.ln() + 1.0 - trunc.ln()) - (star + 0.5) * (d / star).ln_1p();
    }
    let log_n = nf.ln();
    let scale = nf.sqrt() * log_n.ln().powi(2) / log_n;
    Ok(TruncationGap {
        n,
        delta_k: k_trunc - saddle.k[0],
        delta_t,
        growth_ratio: delta_t / scale,
    })
}
