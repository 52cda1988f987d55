//! Constrained saddle point of the Stirling surrogate on `prod k_i = n`.
//!
//! Stationarity of `T(k) - alpha (prod k_i - n)` gives, for each factor,
//!
//! ```text
//! ln lambda_i - ln k_i [- 1/(2 k_i)] - alpha * prod_{j != i} k_j = 0
//! ```
//!
//! where the bracketed term is present only in the refined system. With
//! `s = -alpha n` and `x = s - 1/2` (refined) or `x = s` (plain), each
//! coordinate is `k_i = x / W(x / lambda_i)` on the principal Lambert branch,
//! and the constraint becomes the scalar equation
//!
//! ```text
//! m ln x - ln n - sum_i ln W(x / lambda_i) = 0.
//! ```
//!
//! Its left side has derivative `sum_i W_i / (1 + W_i) > 0` in `ln x`, and
//! tends to `ln(prod lambda_i / n)` as `x -> 0`, so a positive root exists
//! and is unique exactly when `n > prod lambda_i`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PoissonModel;
use crate::roots::newton_bisect;
use crate::special::lambert_w0;

const MAX_ITER: usize = 200;
const LOG_X_TOL: f64 = 1e-15;

/// Which stationarity system to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Keeps the `-1/(2k)` terms from the `1/2 ln(2 pi k)` Stirling correction.
    #[default]
    Refined,
    /// Drops them.
    Plain,
}

impl Variant {
    /// `s - x`: 1/2 for the refined system, 0 for the plain one.
    pub fn shift(self) -> f64 {
        match self {
            Variant::Refined => 0.5,
            Variant::Plain => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Refined => "refined",
            Variant::Plain => "plain",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refined" => Ok(Variant::Refined),
            "plain" => Ok(Variant::Plain),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

/// A solved saddle point with its residual certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub k: Vec<f64>,
    /// `s = -alpha n`.
    pub s: f64,
    pub alpha: f64,
    /// Absolute residual of each stationarity equation.
    pub stationarity_residuals: Vec<f64>,
    /// `|prod k_i - n| / n`.
    pub constraint_residual: f64,
    pub iterations: usize,
    pub variant: Variant,
}

impl SaddlePoint {
    pub fn max_stationarity_residual(&self) -> f64 {
        self.stationarity_residuals
            .iter()
            .fold(0.0, |acc, r| acc.max(r.abs()))
    }
}

/// Leading-order saddle quantities, valid only as `n -> infinity`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaddleAsymptotics {
    pub k: Vec<f64>,
    pub s: f64,
    pub alpha: f64,
}

struct ScalarRoot {
    x: f64,
    iterations: usize,
}

fn scalar_equation(lambdas: &[f64], n: f64, log_x: f64) -> Result<(f64, f64)> {
    let x = log_x.exp();
    let mut value = lambdas.len() as f64 * log_x - n.ln();
    let mut slope = 0.0;
    for &l in lambdas {
        let w = lambert_w0(x / l)?;
        value -= w.ln();
        slope += w / (1.0 + w);
    }
    Ok((value, slope))
}

fn initial_s(m: usize, n: f64) -> f64 {
    let log_n = n.ln();
    (n.powf(1.0 / m as f64) / m as f64) * (log_n - log_n.ln())
}

fn solve_scalar(model: &PoissonModel, n: u64, variant: Variant) -> Result<ScalarRoot> {
    const OP: &str = "saddle";
    if model.dim() < 2 {
        return Err(Error::InvalidArgument(
            "the saddle system needs at least two factors".into(),
        ));
    }
    if n < 2 {
        return Err(Error::domain(OP, format!("threshold n = {n} must be >= 2")));
    }
    let lambdas = model.lambdas();
    let nf = n as f64;
    if nf <= lambdas.iter().product::<f64>() {
        return Err(Error::domain(
            OP,
            format!("no positive root: n = {n} does not exceed the rate product"),
        ));
    }

    let g = |u: f64| scalar_equation(lambdas, nf, u);
    let x0 = if n >= 16 {
        initial_s(model.dim(), nf) - variant.shift()
    } else {
        0.0
    };
    let u0 = if x0 > 0.0 { x0.ln() } else { nf.ln() / model.dim() as f64 };

    // Expand outward from the initializer until the sign changes.
    let mut evals = 0usize;
    let (mut lo, mut hi) = (u0, u0);
    let mut step = 1.0;
    let g0 = g(u0)?.0;
    if g0 < 0.0 {
        loop {
            hi += step;
            evals += 1;
            if g(hi)?.0 > 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            if evals > MAX_ITER {
                return Err(Error::NoConvergence { op: OP, iterations: evals });
            }
        }
    } else if g0 > 0.0 {
        loop {
            lo -= step;
            evals += 1;
            if g(lo)?.0 < 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
            if evals > MAX_ITER {
                return Err(Error::NoConvergence { op: OP, iterations: evals });
            }
        }
    } else {
        return Ok(ScalarRoot {
            x: x0,
            iterations: 0,
        });
    }

    // W is total on positive arguments, so the closure cannot fail inside
    // the bracket; errors are still carried out rather than unwrapped.
    let mut failure = None;
    let root = newton_bisect(
        OP,
        |u| match g(u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        },
        lo,
        hi,
        u0,
        LOG_X_TOL,
        MAX_ITER - evals.min(MAX_ITER - 1),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ScalarRoot {
        x: root.x.exp(),
        iterations: evals + root.iterations,
    })
}

/// Root `s` of `(s - 1/2)^2 = n W((s - 1/2)/lambda1) W((s - 1/2)/lambda2)`.
pub fn solve_s_2(lambda1: f64, lambda2: f64, n: u64) -> Result<f64> {
    let model = PoissonModel::pair(lambda1, lambda2)?;
    Ok(solve_scalar(&model, n, Variant::Refined)?.x + 0.5)
}

/// `k_i = (s - shift) / W((s - shift) / lambda_i)`.
pub fn saddle_from_s(model: &PoissonModel, s: f64, variant: Variant) -> Result<Vec<f64>> {
    let x = s - variant.shift();
    if !(x > 0.0) {
        return Err(Error::domain(
            "saddle_from_s",
            format!("s = {s} must exceed {}", variant.shift()),
        ));
    }
    model
        .lambdas()
        .iter()
        .map(|&l| Ok(x / lambert_w0(x / l)?))
        .collect()
}

/// Refined two-factor saddle coordinates `(k, l)` for a given `s > 1/2`.
pub fn saddle_from_s_2(s: f64, lambda1: f64, lambda2: f64) -> Result<(f64, f64)> {
    let model = PoissonModel::pair(lambda1, lambda2)?;
    let k = saddle_from_s(&model, s, Variant::Refined)?;
    Ok((k[0], k[1]))
}

fn certify(model: &PoissonModel, n: u64, k: Vec<f64>, s: f64, iterations: usize, variant: Variant) -> SaddlePoint {
    let nf = n as f64;
    let alpha = -s / nf;
    let stationarity_residuals = model
        .lambdas()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let others: f64 = k
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, kj)| kj)
                .product();
            let correction = match variant {
                Variant::Refined => 0.5 / k[i],
                Variant::Plain => 0.0,
            };
            (l.ln() - k[i].ln() - correction - alpha * others).abs()
        })
        .collect();
    let constraint_residual = (k.iter().product::<f64>() - nf).abs() / nf;
    SaddlePoint {
        k,
        s,
        alpha,
        stationarity_residuals,
        constraint_residual,
        iterations,
        variant,
    }
}

/// Saddle point of the `m`-factor system, `m >= 2`, `n >= 2`.
///
/// ```
/// use poisson_product_tail::{PoissonModel, saddle::{solve_saddle_m, Variant}};
///
/// let model = PoissonModel::equal(2.0, 3).unwrap();
/// let sp = solve_saddle_m(&model, 1_000_000, Variant::Plain).unwrap();
/// assert!(sp.k.iter().all(|k| (k - 100.0).abs() < 1e-10));
/// ```
pub fn solve_saddle_m(model: &PoissonModel, n: u64, variant: Variant) -> Result<SaddlePoint> {
    let root = solve_scalar(model, n, variant)?;
    let s = root.x + variant.shift();
    let k = saddle_from_s(model, s, variant)?;
    Ok(certify(model, n, k, s, root.iterations, variant))
}

/// Refined two-factor saddle point.
pub fn solve_saddle_2(lambda1: f64, lambda2: f64, n: u64) -> Result<SaddlePoint> {
    solve_saddle_m(&PoissonModel::pair(lambda1, lambda2)?, n, Variant::Refined)
}

/// `k_i = n^(1/m)`, `s = n^(1/m) (ln n - ln ln n) / m`, `alpha = -s / n`.
///
/// Needs `n >= 16` so that `ln ln n > 0`.
pub fn saddle_asymptotics(model: &PoissonModel, n: u64) -> Result<SaddleAsymptotics> {
    if n < 16 {
        return Err(Error::domain(
            "saddle_asymptotics",
            format!("n = {n} must be >= 16"),
        ));
    }
    let m = model.dim();
    let nf = n as f64;
    let root = nf.powf(1.0 / m as f64);
    let s = initial_s(m, nf);
    Ok(SaddleAsymptotics {
        k: vec![root; m],
        s,
        alpha: -s / nf,
    })
}
