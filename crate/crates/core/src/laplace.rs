//! Laplace estimate of the product tail at the constrained saddle point.
//!
//! The tail is approximated by the surrogate exponent at the saddle times the
//! Gaussian factor of the constraint manifold,
//!
//! ```text
//! ln p ~ T(k*) + (m-1)/2 ln(2 pi) - 1/2 ln det(A restricted to u-perp)
//! ```
//!
//! with `A = -Hess T` and `u = grad(prod k_i)`. The restricted determinant
//! uses `det(A|u-perp) = det(A) (u' A^-1 u) / (u' u)`, evaluated entirely in
//! logs since `u_i = prod_{j != i} k_j` overflows quickly.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logprob::LogProb;
use crate::model::PoissonModel;
use crate::saddle::{solve_saddle_m, SaddlePoint, Variant};
use crate::special::LogAccumulator;

/// How the Gaussian prefactor is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PrefactorMode {
    /// Restricted determinant at the solved saddle, diagonal `1/k - 1/(2k^2)`.
    #[default]
    ExactHessian,
    /// `(2 pi)^((m-1)/2) n^((m-1)/(2m))`, the `n -> infinity` form.
    Asymptotic,
}

impl PrefactorMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrefactorMode::ExactHessian => "exact-hessian",
            PrefactorMode::Asymptotic => "asymptotic",
        }
    }
}

impl std::str::FromStr for PrefactorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-hessian" => Ok(PrefactorMode::ExactHessian),
            "asymptotic" => Ok(PrefactorMode::Asymptotic),
            _ => Err(Error::InvalidArgument(format!("unknown prefactor mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceEstimate {
    pub log_p: LogProb,
    pub t_at_saddle: f64,
    pub log_prefactor: f64,
    pub prefactor_mode: PrefactorMode,
    pub saddle: SaddlePoint,
}

fn check_coords(op: &'static str, k: &[f64]) -> Result<()> {
    if k.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = k.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::domain(op, format!("coordinate {bad} must be positive")));
    }
    Ok(())
}

/// Stirling surrogate of `ln P(X_1 = k_1, ..., X_m = k_m)`:
///
/// ```text
/// T(k) = -sum lambda_i + sum k_i (ln lambda_i - ln k_i + 1) [- sum 1/2 ln(2 pi k_i)]
/// ```
///
/// The bracketed term belongs to the refined variant.
pub fn t_value(k: &[f64], model: &PoissonModel, variant: Variant) -> Result<f64> {
    check_coords("t_value", k)?;
    if k.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} coordinates for a {}-factor model",
            k.len(),
            model.dim()
        )));
    }
    let mut t = -model.rate_sum();
    for (&ki, &l) in k.iter().zip(model.lambdas()) {
        t += ki * (l.ln() - ki.ln() + 1.0);
        if variant == Variant::Refined {
            t -= 0.5 * (2.0 * PI * ki).ln();
        }
    }
    Ok(t)
}

/// `ln det(A|u-perp)` for diagonal `A` and `u_i = prod_{j != i} k_j`.
///
/// ```
/// use poisson_product_tail::laplace::{constrained_hessian_logdet, PrefactorMode};
///
/// // Symmetric point on k l = 10^4: the restricted determinant is n^(-1/2).
/// let v = constrained_hessian_logdet(&[100.0, 100.0], PrefactorMode::Asymptotic).unwrap();
/// assert!((v - (0.01f64).ln()).abs() < 1e-13);
/// ```
pub fn constrained_hessian_logdet(k: &[f64], mode: PrefactorMode) -> Result<f64> {
    const OP: &str = "constrained_hessian_logdet";
    check_coords(OP, k)?;
    let log_diag = k
        .iter()
        .map(|&x| {
            let d = match mode {
                PrefactorMode::ExactHessian => 1.0 / x - 0.5 / (x * x),
                PrefactorMode::Asymptotic => 1.0 / x,
            };
            if d > 0.0 {
                Ok(d.ln())
            } else {
                Err(Error::domain(
                    OP,
                    format!("Hessian entry at k = {x} is not positive"),
                ))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let log_k_total: f64 = k.iter().map(|x| x.ln()).sum();
    let log_det: f64 = log_diag.iter().sum();
    let mut quad = LogAccumulator::new();
    let mut norm = LogAccumulator::new();
    for (x, ld) in k.iter().zip(&log_diag) {
        let log_u = log_k_total - x.ln();
        quad.add(2.0 * log_u - ld);
        norm.add(2.0 * log_u);
    }
    Ok(log_det + quad.value() - norm.value())
}

/// Laplace estimate of `ln P(X_1 ... X_m >= n)`.
///
/// ```
/// use poisson_product_tail::{PoissonModel, laplace::{laplace_tail, PrefactorMode}, saddle::Variant};
///
/// let model = PoissonModel::pair(2.0, 3.0).unwrap();
/// let est = laplace_tail(&model, 1000, Variant::Refined, PrefactorMode::ExactHessian).unwrap();
/// assert_eq!(est.log_p.ln(), est.t_at_saddle + est.log_prefactor);
/// ```
pub fn laplace_tail(
    model: &PoissonModel,
    n: u64,
    variant: Variant,
    mode: PrefactorMode,
) -> Result<LaplaceEstimate> {
    let saddle = solve_saddle_m(model, n, variant)?;
    let m = model.dim() as f64;
    let t_at_saddle = t_value(&saddle.k, model, variant)?;
    let gaussian = 0.5 * (m - 1.0) * (2.0 * PI).ln();
    let log_prefactor = match mode {
        PrefactorMode::ExactHessian => gaussian - 0.5 * constrained_hessian_logdet(&saddle.k, mode)?,
        PrefactorMode::Asymptotic => gaussian + (m - 1.0) / (2.0 * m) * (n as f64).ln(),
    };
    let log_p = LogProb::new(t_at_saddle + log_prefactor).map_err(|_| {
        Error::domain(
            "laplace_tail",
            format!("estimate exceeds probability 1 at n = {n}; n is too small"),
        )
    })?;
    Ok(LaplaceEstimate {
        log_p,
        t_at_saddle,
        log_prefactor,
        prefactor_mode: mode,
        saddle,
    })
}
