//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// The branch point `-1/e`.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const MAX_ITER: usize = 50;
const STEP_TOL: f64 = 1e-15;

/// Principal real branch `W0(x)`, the solution `w >= -1` of `w * exp(w) = x`.
///
/// Halley iteration. For `x > e` it runs on the log form `w + ln w = ln x`,
/// seeded by [`lambert_w0_asymptotic`]; below that it runs on the product form,
/// seeded by `x(1 - x)` near zero and by the branch-point series near `-1/e`.
///
/// ```
/// use poisson_product_tail::special::lambert_w0;
///
/// let w = lambert_w0(1.0).unwrap();
/// assert!((w * w.exp() - 1.0).abs() < 1e-15);
/// assert!(lambert_w0(-1.0).is_err());
/// ```
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH_POINT {
        return Err(Error::domain(
            "lambert_w0",
            format!("argument {x} below the branch point -1/e"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x > E {
        Ok(halley_log_form(x))
    } else {
        Ok(halley_product_form(x))
    }
}

/// Solves `w + ln w - ln x = 0`; well conditioned for large `x`.
fn halley_log_form(x: f64) -> f64 {
    let log_x = x.ln();
    let log_log_x = log_x.ln();
    let mut w = log_x - log_log_x;
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - log_x;
        let g1 = 1.0 + 1.0 / w;
        let g2 = -1.0 / (w * w);
        let step = 2.0 * g * g1 / (2.0 * g1 * g1 - g * g2);
        w -= step;
        if step.abs() <= STEP_TOL * w.abs() {
            break;
        }
    }
    w
}

fn halley_product_form(x: f64) -> f64 {
    let mut w = if x.abs() < 0.25 {
        x * (1.0 - x)
    } else if x < 0.0 {
        // W near -1/e: w = -1 + p - p^2/3 + 11 p^3 / 72, p = sqrt(2(ex + 1)).
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x.ln_1p()
    };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= STEP_TOL * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Leading large-argument approximation `W(x) ~ ln x - ln ln x`.
///
/// Only an initializer and a diagnostic; the error is `o(1)` and not small
/// at moderate `x`. Requires `x > e` so that `ln ln x > 0`.
pub fn lambert_w0_asymptotic(x: f64) -> Result<f64> {
    if !(x > E) {
        return Err(Error::domain(
            "lambert_w0_asymptotic",
            format!("argument {x} must exceed e"),
        ));
    }
    let log_x = x.ln();
    Ok(log_x - log_x.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection on `w e^w - x`, independent of the Halley path.
    fn bisect_w(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0_f64, x.max(1.0));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() <= 1e-15);
        assert_eq!(lambert_w0(BRANCH_POINT).unwrap(), -1.0);
    }

    #[test]
    fn omega_constant() {
        let oracle = bisect_w(1.0);
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-14);
        assert!((lambert_w0(1.0).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn defining_identity_on_grid() {
        for &x in &[1e-3, 1.0, 10.0, 1e3, 1e6, 1e9] {
            let w = lambert_w0(x).unwrap();
            let residual = (w * w.exp() - x).abs();
            assert!(residual <= 1e-14 * (1.0 + x), "x={x} residual={residual}");
        }
    }

    #[test]
    fn negative_arguments() {
        for &x in &[-0.3678, -0.36, -0.3, -0.2, -0.1, -1e-8] {
            let w = lambert_w0(x).unwrap();
            assert!(w >= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-13, "x={x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
        assert!(lambert_w0_asymptotic(E).is_err());
        assert!(lambert_w0_asymptotic(1.0).is_err());
    }

    #[test]
    fn asymptotic_values() {
        let v = lambert_w0_asymptotic(E.powf(E)).unwrap();
        assert!((v - (E - 1.0)).abs() < 1e-12);
        // ln 1e6 - ln ln 1e6, evaluated by hand.
        let v = lambert_w0_asymptotic(1e6).unwrap();
        assert!((v - 11.189_718_643_488_263).abs() < 1e-12);
        let gap = lambert_w0(1e6).unwrap() - v;
        let oracle_gap = bisect_w(1e6) - v;
        assert!((gap - oracle_gap).abs() < 1e-10);
        assert!(gap.abs() < 1.0);
    }

    #[test]
    fn increasing_on_grid() {
        let grid = [-0.3, -0.1, 0.0, 1e-3, 1.0, E, 10.0, 1e3, 1e6, 1e9, 1e300];
        let values: Vec<f64> = grid.iter().map(|&x| lambert_w0(x).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }
}
