//! Exact right tail of a Poisson product, summed in log space.
//!
//! For two factors,
//!
//! ```text
//! P(X1 X2 >= n) = sum_{k >= 1} P(X1 = k) * P(X2 >= ceil(n / k))
//! ```
//!
//! The `k = 0` term vanishes for `n >= 1`. For `k >= n` every threshold is
//! `ceil(n / k) = 1`, so that whole tail collapses to `P(X1 >= n) P(X2 >= 1)`
//! and is added in closed form. Before that, the outer sum stops once the
//! pmf tail of `X1` (which bounds the remainder, because the survival factor
//! is at most 1) drops below `rel_tol` times the running total.
//!
//! More factors peel off one at a time with the same sum, memoized on
//! `(factor index, threshold)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::logprob::LogProb;
use crate::model::PoissonModel;
use crate::special::{chernoff_log_bound, log_poisson_pmf, log_poisson_sf, LogAccumulator};

pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Omitted-mass limit for [`brute_force_tail`].
pub const BRUTE_FORCE_MASS_LIMIT: f64 = 1e-15;

/// A validated request for `P(X1 ... Xm >= n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailQuery {
    pub model: PoissonModel,
    pub n: u64,
    pub rel_tol: f64,
}

impl TailQuery {
    pub fn new(model: PoissonModel, n: u64) -> Result<Self> {
        Self::with_tolerance(model, n, DEFAULT_REL_TOL)
    }

    pub fn with_tolerance(model: PoissonModel, n: u64, rel_tol: f64) -> Result<Self> {
        check_threshold(n)?;
        check_tolerance(rel_tol)?;
        Ok(TailQuery { model, n, rel_tol })
    }

    pub fn exact(&self) -> LogProb {
        // Already validated.
        exact_tail_m(&self.model, self.n, self.rel_tol).expect("validated query")
    }
}

fn check_threshold(n: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("threshold n must be >= 1".into()));
    }
    Ok(())
}

fn check_tolerance(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rel_tol must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

/// `ln sum_{k >= 1} P(X = k) * exp(inner(ceil(t / k)))` for `X ~ Poisson(lambda)`.
fn outer_sum(lambda: f64, t: u64, rel_tol: f64, inner: &mut dyn FnMut(u64) -> f64) -> f64 {
    let log_tol = rel_tol.ln();
    let mut acc = LogAccumulator::new();
    let mut k = 1u64;
    loop {
        if k >= t {
            acc.add(log_poisson_sf(k, lambda).ln() + inner(1));
            break;
        }
        acc.add(log_poisson_pmf(k, lambda).ln() + inner(t.div_ceil(k)));
        let ratio = lambda / (k + 2) as f64;
        if ratio < 1.0 {
            let rest = log_poisson_pmf(k + 1, lambda).ln() - (-ratio).ln_1p();
            if rest < log_tol + acc.value() {
                break;
            }
        }
        k += 1;
    }
    acc.value()
}

/// `ln P(X1 X2 >= n)` for independent `X1 ~ Poisson(lambda1)`, `X2 ~ Poisson(lambda2)`.
///
/// ```
/// use poisson_product_tail::exact::exact_tail_2;
///
/// // XY >= 1 iff both factors are nonzero.
/// let v = exact_tail_2(2.0, 3.0, 1, 1e-12).unwrap().ln();
/// let expect = ((1.0 - (-2.0f64).exp()) * (1.0 - (-3.0f64).exp())).ln();
/// assert!((v - expect).abs() < 1e-14);
/// ```
pub fn exact_tail_2(lambda1: f64, lambda2: f64, n: u64, rel_tol: f64) -> Result<LogProb> {
    PoissonModel::pair(lambda1, lambda2)?;
    check_threshold(n)?;
    check_tolerance(rel_tol)?;
    let v = outer_sum(lambda1, n, rel_tol, &mut |c| log_poisson_sf(c, lambda2).ln());
    Ok(LogProb::from_computed(v))
}

struct ProductTail<'a> {
    lambdas: &'a [f64],
    rel_tol: f64,
    memo: HashMap<(usize, u64), f64>,
}

impl ProductTail<'_> {
    /// `ln P(X_depth ... X_m >= t)`.
    fn eval(&mut self, depth: usize, t: u64) -> f64 {
        let lambda = self.lambdas[depth];
        if depth + 1 == self.lambdas.len() {
            return log_poisson_sf(t, lambda).ln();
        }
        if let Some(&v) = self.memo.get(&(depth, t)) {
            return v;
        }
        let rel_tol = self.rel_tol;
        let v = outer_sum(lambda, t, rel_tol, &mut |c| self.eval(depth + 1, c));
        self.memo.insert((depth, t), v);
        v
    }
}

/// `ln P(X1 ... Xm >= n)` for the factors of `model`.
///
/// Reduces to [`log_poisson_sf`] for one factor and follows the same
/// summation as [`exact_tail_2`] for two. The memo table lives for one call.
pub fn exact_tail_m(model: &PoissonModel, n: u64, rel_tol: f64) -> Result<LogProb> {
    check_threshold(n)?;
    check_tolerance(rel_tol)?;
    let mut tail = ProductTail {
        lambdas: model.lambdas(),
        rel_tol,
        memo: HashMap::new(),
    };
    Ok(LogProb::from_computed(tail.eval(0, n)))
}

/// Upper bound on the mass outside `[0, cap]^m`, via per-coordinate Chernoff bounds.
pub fn brute_force_omitted_mass(model: &PoissonModel, cap: u64) -> f64 {
    let edge = (cap + 1) as f64;
    model
        .lambdas()
        .iter()
        .map(|&l| chernoff_log_bound(edge, l).map_or(1.0, f64::exp))
        .sum()
}

/// Smallest cap accepted by [`brute_force_tail`] for this model.
pub fn minimal_brute_force_cap(model: &PoissonModel) -> u64 {
    let mut cap = 1;
    while brute_force_omitted_mass(model, cap) > BRUTE_FORCE_MASS_LIMIT {
        cap += 1;
    }
    cap
}

/// Test oracle: sums `prod P(X_i = k_i)` over every tuple in `[0, cap]^m`
/// with `prod k_i >= n`. Deliberately `O(cap^m)`, with no ceilings and no
/// truncation rule.
///
/// Fails when the Chernoff bound on the mass beyond `cap` exceeds `1e-15`.
pub fn brute_force_tail(model: &PoissonModel, n: u64, cap: u64) -> Result<LogProb> {
    check_threshold(n)?;
    let bound = brute_force_omitted_mass(model, cap);
    if bound > BRUTE_FORCE_MASS_LIMIT {
        return Err(Error::CapTooSmall {
            cap,
            bound,
            limit: BRUTE_FORCE_MASS_LIMIT,
        });
    }
    let pmf: Vec<Vec<f64>> = model
        .lambdas()
        .iter()
        .map(|&l| (0..=cap).map(|k| log_poisson_pmf(k, l).prob()).collect())
        .collect();
    let m = model.dim();
    let mut idx = vec![0u64; m];
    let mut total = 0.0_f64;
    'tuples: loop {
        let product = idx.iter().fold(1u64, |acc, &k| acc.saturating_mul(k));
        if product >= n {
            total += idx
                .iter()
                .zip(&pmf)
                .map(|(&k, table)| table[k as usize])
                .product::<f64>();
        }
        for slot in idx.iter_mut().rev() {
            if *slot < cap {
                *slot += 1;
                continue 'tuples;
            }
            *slot = 0;
        }
        break;
    }
    Ok(LogProb::from_computed(total.ln()))
}
