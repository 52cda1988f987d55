//! Safeguarded Newton iteration for scalar roots on a sign-change bracket.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// Function value at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Finds a root of `f` inside `[lo, hi]`, where `f(lo) < 0 < f(hi)`.
///
/// `f` returns `(value, derivative)`. Newton steps are taken from `start`
/// while they land strictly inside the current bracket; otherwise the step
/// falls back to bisection. Stops when the step is below `x_tol * max(1, |x|)`
/// or the value is exactly zero.
pub fn newton_bisect<F>(
    op: &'static str,
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    if !(lo < hi) {
        return Err(Error::domain(op, format!("empty bracket [{lo}, {hi}]")));
    }
    let mut x = start.clamp(lo, hi);
    for iter in 1..=max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(Root {
                x,
                residual: 0.0,
                iterations: iter,
            });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= x_tol * x.abs().max(1.0) || hi - lo <= x_tol * x.abs().max(1.0) {
            let (fx, _) = f(x);
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        op,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = newton_bisect("t", |x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1.0, 1e-15, 100).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.iterations < 10);
    }

    #[test]
    fn falls_back_to_bisection_on_flat_derivative() {
        // Newton from 0 would jump outside the bracket.
        let r = newton_bisect("t", |x| (x.powi(3) - 0.001, 3.0 * x * x), -1.0, 1.0, 0.0, 1e-14, 200)
            .unwrap();
        assert!((r.x - 0.1).abs() < 1e-12);
    }

    #[test]
    fn reports_non_convergence() {
        let err = newton_bisect("t", |x| (x - 0.3, 0.0), 0.0, 1.0, 0.5, 1e-300, 5).unwrap_err();
        assert_eq!(err, Error::NoConvergence { op: "t", iterations: 5 });
    }

    #[test]
    fn rejects_empty_bracket() {
        assert!(newton_bisect("t", |x| (x, 1.0), 1.0, 1.0, 1.0, 1e-12, 10).is_err());
    }
}
